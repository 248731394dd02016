"""Reference external optimizer: answers every suggest with uniform samples.

Run as ``python -m bbo.harness.echo_child``.
"""

import json
import sys

import numpy as np

from bbo.space import SearchSpace


def main(stdin=sys.stdin, stdout=sys.stdout) -> int:
    space, rng = None, None
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        kind = msg.get("type")
        if kind == "space":
            space = SearchSpace.from_dicts(msg["specs"])
            rng = np.random.default_rng(msg["seed"])
        elif kind == "suggest":
            params = space.unwarp_many(rng.random((msg["n"], space.warped_dim)))
            stdout.write(json.dumps({"type": "suggestions", "params": params}) + "\n")
            stdout.flush()
        elif kind == "observe":
            pass
        elif kind == "stop":
            break
    return 0


if __name__ == "__main__":
    sys.exit(main())
