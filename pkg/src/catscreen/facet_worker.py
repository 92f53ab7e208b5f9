"""Per-facet worker process entry point.

Reads one JSON task from stdin, evaluates one facet, writes one JSON
result to stdout. Run as: python -m catscreen.facet_worker
"""

import json
import os
import signal
import sys


def main():
    line = sys.stdin.readline()
    if not line.strip():
        return 1
    task = json.loads(line)

    kill_hkl = os.environ.get("CATSCREEN_FACET_TEST_KILL")
    if kill_hkl and json.loads(kill_hkl) == task["hkl"]:
        # test hook: simulate a hard worker crash for this facet
        os.kill(os.getpid(), signal.SIGKILL)

    from .adsorb import engine_from_config

    engine = engine_from_config(task["engine"])
    doping = tuple(task["doping"]) if task.get("doping") else None
    block = engine.evaluate_facet(
        task["source"],
        task["hkl"],
        task.get("strain"),
        doping,
        task["adsorbate"],
        task["n_placements"],
        task["seed"],
    )
    sys.stdout.write(json.dumps(block))
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
