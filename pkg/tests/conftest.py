import sys

import pytest
from hypothesis import strategies as st

from bbo.space import ParamSpec, SearchSpace

ECHO_CHILD = [sys.executable, "-m", "bbo.harness.echo_child"]


@st.composite
def param_specs(draw, name):
    kind = draw(st.sampled_from(["real", "integer", "categorical", "boolean"]))
    if kind == "boolean":
        return ParamSpec.boolean(name)
    if kind == "categorical":
        k = draw(st.integers(2, 5))
        return ParamSpec.categorical(name, [f"c{i}" for i in range(k)])
    log = draw(st.booleans())
    if kind == "integer":
        low = draw(st.integers(1 if log else -20, 50))
        high = low + draw(st.integers(0, 200))
        return ParamSpec.integer(name, low, high, "log" if log else "linear")
    low = draw(st.floats(1e-4, 10.0)) if log else draw(st.floats(-100.0, 100.0))
    high = low * draw(st.floats(1.5, 1e4)) if log else low + draw(st.floats(1e-3, 1e3))
    return ParamSpec.real(name, low, high, "log" if log else "linear")


@st.composite
def spaces(draw, max_params=5):
    n = draw(st.integers(1, max_params))
    return SearchSpace([draw(param_specs(f"p{i}")) for i in range(n)])


@pytest.fixture
def mixed_space():
    return SearchSpace(
        [
            ParamSpec.real("lr", 1e-4, 1e-1, "log"),
            ParamSpec.integer("depth", 1, 12),
            ParamSpec.categorical("kind", ["a", "b", "c"]),
            ParamSpec.boolean("flag"),
        ]
    )


# -- acceptance reporting ------------------------------------------------------
# Tests marked ``criterion(n, title)`` get one PASS/FAIL line each in the
# terminal summary; ``record_property("detail", ...)`` adds indented notes.

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "details": [], "ran": False})
    if rep.when == "call":
        entry["ran"] = True
    if rep.failed:
        entry["ok"] = False
    entry["details"] += [v for k, v in item.user_properties if k == "detail" and rep.when == "call"]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        verdict = "PASS" if e["ok"] and e["ran"] else "FAIL"
        tr.write_line(f"criterion {n} ({e['title']}): {verdict}")
        for d in e["details"]:
            tr.write_line(f"    {d}")
