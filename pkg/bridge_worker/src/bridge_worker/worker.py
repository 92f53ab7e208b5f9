"""Reference calculator worker speaking the catscreen bridge wire protocol.

One JSON object per line on stdin, one reply per request on stdout:

    -> {"op": "hello", "protocol": 1}
    <- {"ok": true, "protocol": 1}
    -> {"op": "evaluate", "cell": [[...]*3], "species": [...],
        "positions": [[x,y,z], ...], "pbc": [true, true, true]}
    <- {"ok": true, "energy": E, "forces": [[fx,fy,fz], ...]}
    -> {"op": "shutdown"}
    <- {"ok": true}

Backends:
    surrogate (default)  the catscreen analytic pair potential, for parity
                         testing against the in-process implementation
    module:pkg.attr      any object with evaluate(cell, species, positions,
                         pbc) returning something with .energy and .forces,
                         e.g. a wrapper around a third-party ML potential

Malformed lines get an {"ok": false, ...} reply and the loop continues;
SIGTERM exits cleanly.
"""

from __future__ import annotations

import argparse
import importlib
import json
import signal
import sys

PROTOCOL_VERSION = 1


class BackendLoadError(Exception):
    pass


def load_backend(spec):
    if spec == "surrogate":
        try:
            from catscreen.energetics import MorseSurrogate
        except ImportError as exc:
            raise BackendLoadError(f"catscreen is not installed: {exc}") from exc
        return MorseSurrogate()
    if spec.startswith("module:"):
        target = spec.split(":", 1)[1]
        module_name, _, attr = target.rpartition(".")
        if not module_name:
            raise BackendLoadError(f"backend spec {spec!r} needs module.attr form")
        try:
            module = importlib.import_module(module_name)
            factory = getattr(module, attr)
        except (ImportError, AttributeError) as exc:
            raise BackendLoadError(f"cannot load backend {target!r}: {exc}") from exc
        backend = factory() if callable(factory) else factory
        if not hasattr(backend, "evaluate"):
            raise BackendLoadError(f"backend {target!r} has no evaluate()")
        return backend
    raise BackendLoadError(f"unknown backend {spec!r}")


class BridgeSession:
    """Protocol state for one worker process."""

    def __init__(self, backend):
        self.backend = backend
        self.handshaken = False
        self.evaluations = 0

    def handle(self, request):
        if not isinstance(request, dict) or "op" not in request:
            return {"ok": False, "error": "request must be an object with an 'op'"}
        op = request["op"]
        if op == "hello":
            asked = request.get("protocol", PROTOCOL_VERSION)
            if asked != PROTOCOL_VERSION:
                return {"ok": False, "error": f"unsupported protocol {asked}",
                        "protocol": PROTOCOL_VERSION}
            self.handshaken = True
            return {"ok": True, "protocol": PROTOCOL_VERSION}
        if op == "shutdown":
            return {"ok": True, "_shutdown": True}
        if op == "evaluate":
            if not self.handshaken:
                return {"ok": False, "error": "handshake required"}
            try:
                ef = self.backend.evaluate(
                    request["cell"],
                    request["species"],
                    request["positions"],
                    pbc=tuple(bool(p) for p in request.get("pbc", (True, True, True))),
                )
            except KeyError as exc:
                return {"ok": False, "error": f"evaluate request missing field {exc}"}
            except Exception as exc:
                return {"ok": False, "error": f"{type(exc).__name__}: {exc}"}
            self.evaluations += 1
            forces = ef.forces
            forces = forces.tolist() if hasattr(forces, "tolist") else list(forces)
            return {"ok": True, "energy": float(ef.energy), "forces": forces}
        return {"ok": False, "error": f"unknown op {op!r}"}


def main_loop(stdin, stdout, backend):
    session = BridgeSession(backend)

    def emit(obj):
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            emit({"ok": False, "error": "malformed request line"})
            continue
        reply = session.handle(request)
        shutdown = reply.pop("_shutdown", False)
        emit(reply)
        if shutdown:
            return 0
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="bridge-worker",
        description="calculator worker for the catscreen bridge protocol",
    )
    parser.add_argument("--backend", default="surrogate",
                        help="surrogate (default) or module:pkg.attr")
    args = parser.parse_args(argv)
    try:
        backend = load_backend(args.backend)
    except BackendLoadError as exc:
        sys.stderr.write(f"backend load failure: {exc}\n")
        return 3

    signal.signal(signal.SIGTERM, lambda *_: sys.exit(0))
    return main_loop(sys.stdin, sys.stdout, backend)


if __name__ == "__main__":
    sys.exit(main())
