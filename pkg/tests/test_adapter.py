"""Line protocol and child-process optimizers."""

import math
import sys
import textwrap

import pytest

from bbo.conformance import check_optimizer
from bbo.errors import AdapterTimeout, ContractViolation, ProtocolError
from bbo.harness.adapter import AdapterOptimizer, decode, encode
from bbo.harness.jobs import StudyConfig
from bbo.harness.runner import ensure_baselines, run_search
from bbo.benchmark import get_objective
from bbo.registry import make_optimizer

from conftest import ECHO_CHILD


def child(body):
    """Command for a throwaway child that runs ``body`` once per suggest."""
    src = textwrap.dedent(
        """
        import json, sys
        for line in sys.stdin:
            msg = json.loads(line)
            if msg["type"] == "suggest":
        {body}
                sys.stdout.flush()
            elif msg["type"] == "stop":
                break
        """
    ).format(body=textwrap.indent(textwrap.dedent(body), " " * 8))
    return [sys.executable, "-c", src]


class TestCodec:
    def test_round_trip(self):
        msg = {"type": "suggest", "n": 4}
        line = encode(msg)
        assert line.endswith("\n") and "\n" not in line[:-1]
        assert decode(line) == msg

    def test_round_trip_observe(self):
        msg = {"type": "observe", "params": [{"x": 1.5, "c": "a"}], "scores": [None]}
        assert decode(encode(msg).encode()) == msg

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            encode({"type": "observe", "params": [{}], "scores": [math.nan]})

    @pytest.mark.parametrize("line", ["not json", "[1, 2]", '{"type": "hello"}', '{"type": "suggestions"}'])
    def test_malformed(self, line):
        with pytest.raises(ProtocolError):
            decode(line)

    def test_unknown_type_on_encode(self):
        with pytest.raises(ProtocolError):
            encode({"type": "nope"})


class TestEchoChild:
    def test_conformance(self, mixed_space):
        res = check_optimizer(lambda s: AdapterOptimizer(mixed_space, s, command=ECHO_CHILD, name="echo"), mixed_space)
        assert res.passed, str(res)

    def test_pair_with_builtin(self, mixed_space):
        ext = {"echo": ECHO_CHILD}
        res = check_optimizer(lambda s: make_optimizer("echo+tpe", mixed_space, s, external=ext), mixed_space)
        assert res.passed, str(res)

    def test_non_finite_scores_accepted(self, mixed_space):
        with AdapterOptimizer(mixed_space, 0, command=ECHO_CHILD) as opt:
            pts = opt.suggest(3)
            opt.observe(pts, [math.nan, math.inf, 1.0])
            assert len(opt.suggest(2)) == 2

    def test_through_search(self, tmp_path):
        cfg = StudyConfig(n_step=2, n_batch=4, n_repeat=1, baseline_pool=200, baseline_runs=5, workers=2)
        objs = [get_objective("mixed-dt")]
        res = run_search(cfg, ["echo", "de"], objs, tmp_path, external={"echo": ECHO_CHILD})
        assert res.complete and res.studies == ["echo", "de", "echo+de"]


class TestFaultyChildren:
    def test_malformed_reply(self, mixed_space):
        cmd = child('print("this is not json")')
        with AdapterOptimizer(mixed_space, 0, command=cmd) as opt:
            with pytest.raises(ProtocolError):
                opt.suggest(4)

    def test_short_reply(self, mixed_space):
        cmd = child(
            """
            p = {"lr": 0.01, "depth": 3, "kind": "a", "flag": True}
            print(json.dumps({"type": "suggestions", "params": [p] * (msg["n"] - 1)}))
            """
        )
        with AdapterOptimizer(mixed_space, 0, command=cmd) as opt:
            with pytest.raises(ContractViolation, match="3 suggestions for a request of 4"):
                opt.suggest(4)

    def test_out_of_domain_reply(self, mixed_space):
        cmd = child(
            """
            p = {"lr": 5.0, "depth": 3, "kind": "a", "flag": True}
            print(json.dumps({"type": "suggestions", "params": [p] * msg["n"]}))
            """
        )
        with AdapterOptimizer(mixed_space, 0, command=cmd) as opt:
            with pytest.raises(ContractViolation):
                opt.suggest(2)

    def test_child_exit(self, mixed_space):
        with AdapterOptimizer(mixed_space, 0, command=[sys.executable, "-c", "pass"]) as opt:
            with pytest.raises(ProtocolError):
                opt.suggest(1)

    def test_timeout(self, mixed_space):
        cmd = child("import time; time.sleep(30)")
        opt = AdapterOptimizer(mixed_space, 0, command=cmd, timeout=0.3)
        try:
            with pytest.raises(AdapterTimeout):
                opt.suggest(1)
        finally:
            opt._proc.kill()
            opt.close()
