"""Energy/forces contract, analytic pair-potential surrogate, LBFGS relaxer,
and the line-protocol bridge client for external calculator workers.

The surrogate is a Morse-form pair potential under the minimum-image
convention with an energy shift to zero at the cutoff. It exists so the
pipeline has smooth, exactly-differentiable energetics to test against;
its parameters are generated from covalent radii and are deliberately
not physical.
"""

from __future__ import annotations

import json
import math
import selectors
import subprocess
from dataclasses import dataclass

import numpy as np

from . import elements
from .errors import (
    BridgeUnavailable,
    CalculatorFailure,
    NonFiniteResult,
    ProtocolViolation,
    WorkerTimeout,
)

BRIDGE_PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class EnergyForces:
    energy: float
    forces: np.ndarray

    def __post_init__(self):
        forces = np.asarray(self.forces, dtype=float)
        object.__setattr__(self, "forces", forces)
        if not math.isfinite(self.energy) or not np.all(np.isfinite(forces)):
            raise NonFiniteResult("calculator produced non-finite energy or forces")


@dataclass(frozen=True)
class RelaxSettings:
    fmax: float = 0.05
    max_steps: int = 300
    history_size: int = 10
    step_cap: float = 0.2
    # extra quasi-Newton iterations once fmax is reached; sharpens minima
    # far beyond the force threshold at negligible cost
    polish_steps: int = 2

    def __post_init__(self):
        if self.fmax <= 0:
            raise ValueError("fmax must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def to_dict(self):
        return {
            "fmax": self.fmax,
            "max_steps": self.max_steps,
            "history_size": self.history_size,
            "step_cap": self.step_cap,
            "polish_steps": self.polish_steps,
        }

    @classmethod
    def from_dict(cls, d):
        d = d or {}
        return cls(
            fmax=d.get("fmax", 0.05),
            max_steps=d.get("max_steps", 300),
            history_size=d.get("history_size", 10),
            step_cap=d.get("step_cap", 0.2),
            polish_steps=d.get("polish_steps", 2),
        )


class SurrogateParams:
    """Per-pair (D_e, a, r0) with a global cutoff; symmetric in pair order."""

    def __init__(self, pairs=None, cutoff=6.0, default_d_e=1.0, default_a=1.5):
        if cutoff <= 0:
            raise ValueError("cutoff must be positive")
        self.cutoff = float(cutoff)
        self.default_d_e = float(default_d_e)
        self.default_a = float(default_a)
        self._pairs = {}
        for key, val in (pairs or {}).items():
            e1, e2 = key
            d_e, a, r0 = (float(x) for x in val)
            if d_e <= 0 or a <= 0 or r0 <= 0:
                raise ValueError(f"pair parameters must be positive, got {val} for {key}")
            self._pairs[self._key(e1, e2)] = (d_e, a, r0)

    @staticmethod
    def _key(e1, e2):
        return (e1, e2) if e1 <= e2 else (e2, e1)

    def pair(self, e1, e2):
        key = self._key(e1, e2)
        if key in self._pairs:
            return self._pairs[key]
        r0 = elements.covalent_radius(e1) + elements.covalent_radius(e2)
        return (self.default_d_e, self.default_a, r0)

    def to_dict(self):
        return {
            "cutoff": self.cutoff,
            "default_d_e": self.default_d_e,
            "default_a": self.default_a,
            "pairs": {f"{k[0]}-{k[1]}": list(v) for k, v in self._pairs.items()},
        }

    @classmethod
    def from_dict(cls, d):
        d = d or {}
        pairs = {}
        for key, val in (d.get("pairs") or {}).items():
            e1, e2 = key.split("-")
            pairs[(e1, e2)] = tuple(val)
        return cls(
            pairs=pairs,
            cutoff=d.get("cutoff", 6.0),
            default_d_e=d.get("default_d_e", 1.0),
            default_a=d.get("default_a", 1.5),
        )


def morse_pair_energy(r, d_e, a, r0, cutoff):
    """Shifted Morse pair energy: zero at and beyond the cutoff."""
    if r >= cutoff:
        return 0.0
    def well(x):
        e = math.exp(-a * (x - r0))
        return d_e * (e * e - 2.0 * e)
    return well(r) - well(cutoff)


def _min_image_vectors(cell, pbc):
    """Offsets used in the minimum-image search (27 neighbor cells)."""
    axes = [(-1, 0, 1) if p else (0,) for p in pbc]
    return np.array([[i, j, k] for i in axes[0] for j in axes[1] for k in axes[2]], dtype=float)


class MorseSurrogate:
    """Analytic pair-potential calculator.

    Pairs are summed once (i < j) at their minimum-image separation; an
    atom never interacts with its own periodic images, which keeps the
    single-atom reference energy exactly zero.
    """

    kind = "surrogate"

    def __init__(self, params=None):
        self.params = params or SurrogateParams()

    def evaluate(self, cell, species, positions, pbc=(True, True, True)):
        positions = np.asarray(positions, dtype=float)
        n = len(species)
        forces = np.zeros((n, 3))
        if n < 2:
            return EnergyForces(energy=0.0, forces=forces)

        cell = np.asarray(cell, dtype=float)
        iu, ju = np.triu_indices(n, k=1)
        raw = positions[ju] - positions[iu]
        if any(pbc):
            inv = np.linalg.inv(cell)
            frac = raw @ inv
            frac -= np.where(pbc, np.round(frac), 0.0)
            offsets = _min_image_vectors(cell, pbc)
            cands = (frac[:, None, :] + offsets[None, :, :]) @ cell
            d2 = np.einsum("pij,pij->pi", cands, cands)
            pick = np.argmin(d2, axis=1)
            vec = cands[np.arange(len(pick)), pick]
        else:
            vec = raw
        r = np.linalg.norm(vec, axis=1)

        d_e = np.empty(len(r))
        a = np.empty(len(r))
        r0 = np.empty(len(r))
        cache = {}
        for p, (i, j) in enumerate(zip(iu, ju)):
            key = (species[i], species[j])
            if key not in cache:
                cache[key] = self.params.pair(*key)
            d_e[p], a[p], r0[p] = cache[key]

        cutoff = self.params.cutoff
        active = (r < cutoff) & (r > 1e-12)
        energy = 0.0
        if np.any(active):
            rr, dd, aa, rr0 = r[active], d_e[active], a[active], r0[active]
            e = np.exp(-aa * (rr - rr0))
            e_c = np.exp(-aa * (cutoff - rr0))
            energy = float(np.sum(dd * (e * e - 2.0 * e) - dd * (e_c * e_c - 2.0 * e_c)))
            # dV/dr of the (shift-invariant) Morse well
            dv = 2.0 * dd * aa * (e - e * e)
            grads = dv[:, None] * vec[active] / rr[:, None]
            np.add.at(forces, iu[active], grads)
            np.add.at(forces, ju[active], -grads)
        return EnergyForces(energy=energy, forces=forces)

    def to_config(self):
        return {"kind": "surrogate", "params": self.params.to_dict()}


def evaluate(system, calculator):
    """Evaluate a Structure or Slab with any calculator."""
    structure = getattr(system, "structure", system)
    return calculator.evaluate(
        structure.lattice.rows,
        list(structure.species),
        structure.cart_coords(),
        pbc=(True, True, True),
    )


class _PositionsProblem:
    """Adapter: flattens free-atom coordinates for the optimizer."""

    def __init__(self, cell, species, positions, free_mask, calculator):
        self.cell = cell
        self.species = species
        self.positions = np.array(positions, dtype=float)
        self.free = np.asarray(free_mask, dtype=bool)
        self.calculator = calculator
        self.evaluations = 0

    def eval_at(self, x):
        pos = self.positions.copy()
        pos[self.free] = x.reshape(-1, 3)
        self.evaluations += 1
        ef = self.calculator.evaluate(self.cell, self.species, pos, pbc=(True, True, True))
        grad = -ef.forces[self.free].reshape(-1)
        return float(ef.energy), grad, ef.forces

    def x0(self):
        return self.positions[self.free].reshape(-1).copy()


def relax(system, calculator, settings=None, frozen=None):
    """LBFGS relaxation with backtracking; frozen sites never move.

    Returns (relaxed_system, converged, steps, final_energy). The relaxed
    system preserves the input type (Slab in, Slab out).
    """
    settings = settings or RelaxSettings()
    structure = getattr(system, "structure", system)
    n = len(structure)
    frozen = set(frozen or ())
    free_mask = np.array([i not in frozen for i in range(n)], dtype=bool)

    cell = structure.lattice.rows
    positions = structure.cart_coords()
    problem = _PositionsProblem(cell, list(structure.species), positions, free_mask, calculator)

    if not free_mask.any():
        try:
            ef = calculator.evaluate(cell, list(structure.species), positions, pbc=(True, True, True))
        except Exception as exc:
            raise CalculatorFailure(0, str(exc)) from exc
        return system, True, 0, float(ef.energy)

    x = problem.x0()
    try:
        energy, grad, forces = problem.eval_at(x)
    except NonFiniteResult:
        raise
    except Exception as exc:
        raise CalculatorFailure(0, str(exc)) from exc

    def max_free_force(forces):
        norms = np.linalg.norm(forces[free_mask], axis=1)
        return float(norms.max()) if norms.size else 0.0

    s_hist, y_hist, rho_hist = [], [], []
    steps = 0
    converged = max_free_force(forces) <= settings.fmax
    polish_left = settings.polish_steps if not converged else 0

    while (not converged or polish_left > 0) and steps < settings.max_steps:
        # two-loop recursion
        q = grad.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            alpha = rho * np.dot(s, q)
            alphas.append(alpha)
            q -= alpha * y
        if y_hist:
            gamma = np.dot(s_hist[-1], y_hist[-1]) / np.dot(y_hist[-1], y_hist[-1])
            q *= max(gamma, 1e-10)
        else:
            q *= 0.1  # conservative first step
        for (s, y, rho), alpha in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            beta = rho * np.dot(y, q)
            q += s * (alpha - beta)
        direction = -q

        # cap the largest per-atom displacement
        disp = np.linalg.norm(direction.reshape(-1, 3), axis=1).max()
        if disp > settings.step_cap:
            direction *= settings.step_cap / disp

        step_scale = 1.0
        accepted = False
        for _ in range(12):
            x_trial = x + step_scale * direction
            try:
                e_trial, g_trial, f_trial = problem.eval_at(x_trial)
            except NonFiniteResult:
                step_scale *= 0.5
                continue
            except Exception as exc:
                raise CalculatorFailure(steps + 1, str(exc)) from exc
            if e_trial <= energy + 1e-12:
                accepted = True
                break
            step_scale *= 0.5
        if not accepted:
            # flat or noisy region: restart memory; stop if gradient step fails too
            if not s_hist:
                break
            s_hist, y_hist, rho_hist = [], [], []
            continue

        s_vec = x_trial - x
        y_vec = g_trial - grad
        sy = float(np.dot(s_vec, y_vec))
        if sy > 1e-12:
            s_hist.append(s_vec)
            y_hist.append(y_vec)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > settings.history_size:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)

        x, energy, grad, forces = x_trial, e_trial, g_trial, f_trial
        steps += 1
        if converged:
            polish_left -= 1
        converged = max_free_force(forces) <= settings.fmax
        if not converged:
            polish_left = settings.polish_steps

    final_positions = problem.positions.copy()
    final_positions[free_mask] = x.reshape(-1, 3)
    frac = final_positions @ structure.lattice.inverse()

    from .crystal import Structure

    relaxed_structure = Structure(structure.lattice, structure.species, frac, structure.metadata)
    if hasattr(system, "with_structure"):
        relaxed = system.with_structure(relaxed_structure)
    else:
        relaxed = relaxed_structure
    return relaxed, converged, steps, float(energy)


# ---------------------------------------------------------------------------
# Bridge client: line-delimited JSON over a worker's stdin/stdout.
# ---------------------------------------------------------------------------


class BridgeCalculator:
    """Calculator backed by an external worker process.

    Wire protocol (one JSON object per line):
      -> {"op": "hello", "protocol": 1}
      <- {"ok": true, "protocol": 1}
      -> {"op": "evaluate", "cell": [[...]*3], "species": [...],
          "positions": [[x,y,z], ...], "pbc": [true, true, true]}
      <- {"ok": true, "energy": E, "forces": [[fx,fy,fz], ...]}
      -> {"op": "shutdown"}
    """

    kind = "bridge"

    def __init__(self, command, timeout=60.0):
        self.command = list(command)
        self.timeout = timeout
        self._proc = None
        self._selector = None
        self._buffer = b""
        self._start()

    def _start(self):
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise BridgeUnavailable(f"failed to spawn worker {self.command}: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._proc.stdout, selectors.EVENT_READ)
        reply = self._roundtrip({"op": "hello", "protocol": BRIDGE_PROTOCOL_VERSION})
        if not reply.get("ok") or reply.get("protocol") != BRIDGE_PROTOCOL_VERSION:
            raise ProtocolViolation(f"handshake failed: {reply}")

    def _read_line(self):
        deadline = self.timeout
        while b"\n" not in self._buffer:
            if self._proc.poll() is not None:
                raise BridgeUnavailable(
                    f"worker exited with code {self._proc.returncode} mid-request"
                )
            events = self._selector.select(timeout=deadline)
            if not events:
                raise WorkerTimeout(f"no response within {self.timeout}s")
            chunk = self._proc.stdout.read1(65536)
            if not chunk:
                raise BridgeUnavailable("worker closed its output stream")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line.decode("utf-8", errors="replace")

    def _roundtrip(self, request):
        if self._proc is None or self._proc.poll() is not None:
            raise BridgeUnavailable("worker process is not running")
        try:
            self._proc.stdin.write((json.dumps(request) + "\n").encode())
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeUnavailable(f"failed to write to worker: {exc}") from exc
        line = self._read_line()
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation("worker sent a non-JSON response line", line=line) from exc

    def evaluate(self, cell, species, positions, pbc=(True, True, True)):
        reply = self._roundtrip({
            "op": "evaluate",
            "cell": np.asarray(cell, dtype=float).tolist(),
            "species": list(species),
            "positions": np.asarray(positions, dtype=float).tolist(),
            "pbc": list(bool(p) for p in pbc),
        })
        if not isinstance(reply, dict) or "ok" not in reply:
            raise ProtocolViolation("response lacks the 'ok' field", line=json.dumps(reply))
        if not reply["ok"]:
            raise BridgeUnavailable(f"worker error: {reply.get('error', 'unspecified')}")
        if "energy" not in reply or "forces" not in reply:
            raise ProtocolViolation("evaluate response lacks energy/forces", line=json.dumps(reply))
        return EnergyForces(energy=float(reply["energy"]), forces=np.array(reply["forces"], dtype=float))

    def close(self):
        if self._proc is None:
            return
        try:
            if self._proc.poll() is None:
                try:
                    self._proc.stdin.write(b'{"op": "shutdown"}\n')
                    self._proc.stdin.flush()
                except (BrokenPipeError, OSError):
                    pass
                try:
                    self._proc.wait(timeout=2)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
                    self._proc.wait()
        finally:
            if self._selector is not None:
                self._selector.close()
            self._proc = None

    def to_config(self):
        return {"kind": "bridge", "command": self.command, "timeout": self.timeout}

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def calculator_from_config(config):
    """Rebuild a calculator in a worker process from its JSON config."""
    kind = config.get("kind", "surrogate")
    if kind == "surrogate":
        return MorseSurrogate(SurrogateParams.from_dict(config.get("params")))
    if kind == "bridge":
        return BridgeCalculator(config["command"], timeout=config.get("timeout", 60.0))
    raise ValueError(f"unknown calculator kind {kind!r}")
