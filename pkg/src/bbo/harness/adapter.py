"""External optimizers over a newline-delimited JSON protocol.

The parent writes one JSON object per line to the child's stdin:

* ``{"type": "space", "specs": [...], "seed": S}`` once at start-up
  (``specs`` uses the space-file format of :mod:`bbo.space`);
* ``{"type": "suggest", "n": N}``, answered by one line
  ``{"type": "suggestions", "params": [{...}, ...]}`` on the child's stdout;
* ``{"type": "observe", "params": [...], "scores": [...]}`` (no answer;
  non-finite scores are sent as ``null``);
* ``{"type": "stop"}`` before the parent closes the pipes.

Anything the child writes to stderr is passed through untouched.
"""

from __future__ import annotations

import json
import logging
import math
import queue
import subprocess
import threading
import time

from ..errors import AdapterTimeout, ContractViolation, DomainError, ProtocolError
from ..optimizers.base import Optimizer

log = logging.getLogger(__name__)

REQUIRED = {
    "space": ("specs", "seed"),
    "suggest": ("n",),
    "suggestions": ("params",),
    "observe": ("params", "scores"),
    "stop": (),
}
DEFAULT_TIMEOUT = 40.0


def encode(msg: dict) -> str:
    if msg.get("type") not in REQUIRED:
        raise ProtocolError(f"unknown message type {msg.get('type')!r}")
    return json.dumps(msg, separators=(",", ":"), allow_nan=False) + "\n"


def decode(line) -> dict:
    raw = line if isinstance(line, str) else line.decode("utf8", errors="replace")
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError:
        log.error("malformed protocol line: %r", raw)
        raise ProtocolError(f"malformed protocol line: {raw!r}") from None
    if not isinstance(msg, dict) or msg.get("type") not in REQUIRED:
        log.error("malformed protocol line: %r", raw)
        raise ProtocolError(f"unexpected message: {raw!r}")
    missing = [k for k in REQUIRED[msg["type"]] if k not in msg]
    if missing:
        log.error("malformed protocol line: %r", raw)
        raise ProtocolError(f"{msg['type']} message missing {missing}: {raw!r}")
    return msg


def _json_score(s: float):
    return s if math.isfinite(s) else None


class AdapterOptimizer(Optimizer):
    """Runs ``command`` as a child process and speaks the line protocol.

    Replies are awaited until ``deadline`` (set by the harness per
    iteration) or, outside a harness, for ``timeout`` seconds.
    """

    uses_warmup = False
    defaults = {"timeout": DEFAULT_TIMEOUT}

    def __init__(self, space, seed=0, *, command, name="external", **hyperparams):
        self.name = name
        super().__init__(space, seed, **hyperparams)
        self.command = list(command)
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._send({"type": "space", "specs": space.to_dicts(), "seed": int(seed)})

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _send(self, msg: dict) -> None:
        try:
            self._proc.stdin.write(encode(msg))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"child {self.command!r} closed its input: {exc}") from None

    def _remaining(self) -> float:
        if self.deadline is not None:
            return max(0.0, self.deadline - time.monotonic())
        return float(self.hyperparams["timeout"])

    def _recv(self) -> dict:
        try:
            line = self._lines.get(timeout=self._remaining())
        except queue.Empty:
            raise AdapterTimeout(f"child {self.command!r} did not reply within the budget") from None
        if line is None:
            raise ProtocolError(f"child {self.command!r} exited (status {self._proc.poll()})")
        return decode(line)

    def suggest(self, n: int) -> list[dict]:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n == 0:
            return []
        self._send({"type": "suggest", "n": int(n)})
        msg = self._recv()
        if msg["type"] != "suggestions":
            raise ProtocolError(f"expected suggestions, got {msg['type']!r}")
        params = msg["params"]
        if not isinstance(params, list) or len(params) != n:
            got = len(params) if isinstance(params, list) else type(params).__name__
            raise ContractViolation(f"{self.name} returned {got} suggestions for a request of {n}")
        out = []
        for p in params:
            if not isinstance(p, dict):
                raise ContractViolation(f"{self.name} returned a non-object suggestion {p!r}")
            try:
                self.space.validate(p)
            except DomainError as exc:
                raise ContractViolation(f"{self.name} suggested an invalid point: {exc}") from None
            out.append(p)
        return out

    def observe(self, params, scores) -> None:
        params = [dict(p) for p in params]
        scores = [float(s) for s in scores]
        super().observe(params, scores)
        if params:
            self._send({"type": "observe", "params": params, "scores": [_json_score(s) for s in scores]})

    def close(self, timeout: float = 5.0) -> None:
        if self._proc.poll() is None:
            try:
                self._send({"type": "stop"})
                self._proc.stdin.close()
            except (ProtocolError, OSError):
                pass
            try:
                self._proc.wait(timeout=timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        for stream in (self._proc.stdin, self._proc.stdout):
            try:
                stream.close()
            except OSError:
                pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        proc = getattr(self, "_proc", None)
        if proc is not None and proc.poll() is None:
            proc.kill()
