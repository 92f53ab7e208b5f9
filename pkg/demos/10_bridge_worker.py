"""Outsource energy evaluation to an external worker process.

The bridge client spawns a worker, performs the hello handshake, and
sends one evaluate request per line. Any process speaking the protocol
can serve: here the reference bridge-worker package hosts the same
surrogate, so remote and in-process energies agree to floating-point
noise. A worker crash surfaces as a contained BridgeUnavailable error.
"""

import sys

import numpy as np

from catscreen.energetics import BridgeCalculator, MorseSurrogate
from catscreen.errors import BridgeUnavailable

WORKER = [sys.executable, "-m", "bridge_worker", "--backend", "surrogate"]

local = MorseSurrogate()
cell = np.eye(3) * 20.0
species = ["O", "H", "Cu", "Cu"]
positions = np.array([
    [9.0, 9.0, 11.0],
    [9.0, 9.0, 11.97],
    [8.0, 8.5, 9.0],
    [10.3, 9.2, 9.1],
])

try:
    with BridgeCalculator(WORKER, timeout=30.0) as bridge:
        remote = bridge.evaluate(cell, species, positions)
        mine = local.evaluate(cell, species, positions)
        print(f"worker energy:     {remote.energy:+.12f} eV")
        print(f"in-process energy: {mine.energy:+.12f} eV")
        print(f"difference:        {abs(remote.energy - mine.energy):.2e} eV")
except BridgeUnavailable as exc:
    print("bridge worker unavailable (is the bridge-worker package installed?)")
    print(f"  {exc}")
    raise SystemExit(1)

print("\ncrash containment:")
calc = BridgeCalculator(WORKER, timeout=30.0)
calc._proc.kill()
calc._proc.wait()
try:
    calc.evaluate(cell, species, positions)
except BridgeUnavailable as exc:
    print(f"  worker killed mid-session -> BridgeUnavailable: {exc}")
finally:
    calc.close()
