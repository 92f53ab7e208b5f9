"""Minimal bridge worker used by the primary test suite.

Speaks the line-delimited JSON wire protocol and hosts the in-process
surrogate. The standalone reference worker lives in the separate
bridge-worker package; this stub exists so the primary suite is
self-contained.
"""

import json
import sys


def main():
    from catscreen.energetics import BRIDGE_PROTOCOL_VERSION, MorseSurrogate

    calc = MorseSurrogate()
    ready = False
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            print(json.dumps({"ok": False, "error": "malformed request line"}), flush=True)
            continue
        op = request.get("op")
        if op == "hello":
            ready = True
            print(json.dumps({"ok": True, "protocol": BRIDGE_PROTOCOL_VERSION}), flush=True)
        elif op == "shutdown":
            print(json.dumps({"ok": True}), flush=True)
            return 0
        elif op == "evaluate":
            if not ready:
                print(json.dumps({"ok": False, "error": "handshake required"}), flush=True)
                continue
            try:
                ef = calc.evaluate(
                    request["cell"], request["species"], request["positions"],
                    pbc=tuple(request.get("pbc", (True, True, True))),
                )
                print(json.dumps({"ok": True, "energy": ef.energy,
                                  "forces": ef.forces.tolist()}), flush=True)
            except Exception as exc:
                print(json.dumps({"ok": False, "error": str(exc)}), flush=True)
        else:
            print(json.dumps({"ok": False, "error": f"unknown op {op!r}"}), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
