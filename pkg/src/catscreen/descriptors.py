"""Reaction descriptor criteria and proximity-band classification.

Three built-in tasks:
  ORR   - E_ads(*OH) in the 0.9-1.1 eV window, with Close (0.8-1.2) and
          Near (0.7-1.3) bands for near-miss handling;
  CO2RR - E_ads(*CO) in [-0.82, -0.52] and E_ads(*H) >= 0.33;
  NRR   - E_ads(*N) in [-2.0, -0.5] and delta = E(*N) - E(*N2) > 0, with a
          near-miss band at -0.2 < delta <= 0.

Windows are closed intervals; a boundary value belongs to the tighter
band. Every verdict carries a scalar `gap` (eV of total constraint
violation, 0 when passing) used by the campaign's moved-closer logic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import NonFiniteInput

BAND_OPTIMAL = "Optimal"
BAND_CLOSE = "Close"
BAND_NEAR = "Near"
BAND_AWAY = "Away"

_BAND_RANK = {BAND_OPTIMAL: 0, BAND_CLOSE: 1, BAND_NEAR: 2, BAND_AWAY: 3}


def band_rank(band):
    return _BAND_RANK.get(band, len(_BAND_RANK))


@dataclass(frozen=True)
class Verdict:
    passed: bool
    band: str | None
    reasons: tuple = ()
    delta: float | None = None
    gap: float = 0.0

    def to_dict(self):
        return {
            "pass": self.passed,
            "band": self.band,
            "reasons": list(self.reasons),
            "delta": self.delta,
            "gap": self.gap,
        }


def _require_finite(**values):
    for name, value in values.items():
        if value is None or not math.isfinite(value):
            raise NonFiniteInput(f"{name} must be finite, got {value}")


def _interval_distance(x, lo, hi):
    if x < lo:
        return lo - x
    if x > hi:
        return x - hi
    return 0.0


@dataclass(frozen=True)
class TaskSpec:
    """A reaction's adsorbates, windows, and near-miss bands."""

    task: str
    adsorbates: tuple
    windows: dict = field(default_factory=dict)
    bands: tuple = ()  # ORR-style nested (name, lo, hi), tightest first

    def __post_init__(self):
        for name, (lo, hi) in self.windows.items():
            if lo > hi:
                raise ValueError(f"window {name} has lower > upper")
        prev = None
        for name, lo, hi in self.bands:
            if lo > hi:
                raise ValueError(f"band {name} has lower > upper")
            if prev is not None and not (lo <= prev[0] and hi >= prev[1]):
                raise ValueError("bands must nest from tightest to widest")
            prev = (lo, hi)

    def classify(self, energies):
        """Map {adsorbate label: eV} to a Verdict for this task."""
        if self.task == "ORR":
            return classify_orr(energies["*OH"], self)
        if self.task == "CO2RR":
            return check_co2rr(energies["*CO"], energies["*H"], self)
        if self.task == "NRR":
            return check_nrr(energies["*N"], energies["*N2"], self)
        raise ValueError(f"unknown task {self.task!r}")

    def to_dict(self):
        return {
            "task": self.task,
            "adsorbates": list(self.adsorbates),
            "windows": {k: list(v) for k, v in self.windows.items()},
            "bands": [list(b) for b in self.bands],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            task=d["task"],
            adsorbates=tuple(d["adsorbates"]),
            windows={k: tuple(v) for k, v in (d.get("windows") or {}).items()},
            bands=tuple(tuple(b) for b in (d.get("bands") or [])),
        )

    @classmethod
    def from_json_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


ORR_TASK = TaskSpec(
    task="ORR",
    adsorbates=("*OH",),
    windows={"*OH": (0.9, 1.1)},
    bands=((BAND_OPTIMAL, 0.9, 1.1), (BAND_CLOSE, 0.8, 1.2), (BAND_NEAR, 0.7, 1.3)),
)

CO2RR_TASK = TaskSpec(
    task="CO2RR",
    adsorbates=("*CO", "*H"),
    windows={"*CO": (-0.82, -0.52), "*H": (0.33, math.inf)},
)

NRR_TASK = TaskSpec(
    task="NRR",
    adsorbates=("*N", "*N2"),
    windows={"*N": (-2.0, -0.5)},
)

BUILTIN_TASKS = {"ORR": ORR_TASK, "CO2RR": CO2RR_TASK, "NRR": NRR_TASK}


def classify_orr(e_oh, spec=ORR_TASK):
    """Band classification for the *OH descriptor; pass means Optimal."""
    _require_finite(e_oh=e_oh)
    lo, hi = spec.windows["*OH"]
    gap = _interval_distance(e_oh, lo, hi)
    band = BAND_AWAY
    for name, blo, bhi in spec.bands:
        if blo <= e_oh <= bhi:
            band = name
            break
    passed = band == BAND_OPTIMAL
    reasons = ()
    if not passed:
        reasons = ("OH below window",) if e_oh < lo else ("OH above window",)
    return Verdict(passed=passed, band=band, reasons=reasons, gap=gap)


def check_co2rr(e_co, e_h, spec=CO2RR_TASK):
    """Dual constraint: *CO within its window and *H at or above threshold."""
    _require_finite(e_co=e_co, e_h=e_h)
    co_lo, co_hi = spec.windows["*CO"]
    h_min = spec.windows["*H"][0]
    reasons = []
    if e_co > co_hi:
        reasons.append("CO weak")
    elif e_co < co_lo:
        reasons.append("CO strong")
    if e_h < h_min:
        reasons.append("H low")
    gap = _interval_distance(e_co, co_lo, co_hi) + max(0.0, h_min - e_h)
    passed = not reasons
    if passed:
        band = BAND_OPTIMAL
    elif len(reasons) == 1:
        band = BAND_CLOSE  # near-miss: exactly one criterion failed
    else:
        band = BAND_AWAY
    return Verdict(passed=passed, band=band, reasons=tuple(reasons), gap=gap)


def check_nrr(e_n, e_n2, spec=NRR_TASK):
    """*N window plus delta = E(*N) - E(*N2) strictly positive.

    The near-miss band is -0.2 < delta <= 0 with *N in-window; delta = 0
    is a near-miss, never a pass.
    """
    _require_finite(e_n=e_n, e_n2=e_n2)
    n_lo, n_hi = spec.windows["*N"]
    delta = e_n - e_n2
    window_gap = _interval_distance(e_n, n_lo, n_hi)
    delta_gap = max(0.0, -delta)
    gap = window_gap + delta_gap
    reasons = []
    if e_n > n_hi:
        reasons.append("N weak")
    elif e_n < n_lo:
        reasons.append("N strong")
    if delta <= 0:
        reasons.append("delta not positive")
    passed = not reasons
    if passed:
        band = BAND_OPTIMAL
    elif window_gap == 0.0 and -0.2 < delta <= 0:
        band = BAND_CLOSE  # near-miss
    else:
        band = BAND_AWAY
    return Verdict(passed=passed, band=band, reasons=tuple(reasons), delta=delta, gap=gap)
