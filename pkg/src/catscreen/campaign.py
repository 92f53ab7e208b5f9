"""Deterministic closed-loop screening driver and campaign metrics.

The driver replaces an interactive planner with an explicit policy walk:
baseline evaluation, then modification proposals gated on near-miss
verdicts, re-evaluated until success, exhaustion, or budget. Every trial
lands in a line-delimited JSON ledger from which the metrics engine
derives success rates, trials-to-success, and modification-effort
statistics.

A modification trial counts as "successful" when it produced a passing
facet or moved the best descriptor strictly closer to the target window
than the immediately preceding trial (the moved-closer convention used in
the reference campaign records); anything else is unsuccessful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .descriptors import BAND_CLOSE, BAND_NEAR, TaskSpec, band_rank
from .errors import (
    EmptyLedger,
    EvaluationBackendFailure,
    MalformedLedgerLine,
)

NEAR_MISS_BANDS = (BAND_CLOSE, BAND_NEAR)


@dataclass(frozen=True)
class ModPlan:
    """A proposed modification: strain value and/or a doping substitution."""

    strain: float | None = None
    doping: tuple | None = None  # (from_element_or_None, to_element)

    def key(self):
        strain = None if self.strain is None else round(self.strain, 10)
        return (strain, self.doping)

    def to_record(self):
        out = {}
        if self.strain is not None:
            out["strain"] = {
                "value": self.strain,
                "percentage": 100.0 * abs(self.strain),
                "type": "compressive" if self.strain > 0 else "tensile",
            }
        if self.doping is not None:
            out["doping"] = {"from": self.doping[0], "to": self.doping[1]}
        return out or None

    @classmethod
    def from_record(cls, record):
        if not record:
            return None
        strain = record.get("strain")
        doping = record.get("doping")
        return cls(
            strain=strain["value"] if strain else None,
            doping=(doping.get("from"), doping["to"]) if doping else None,
        )


@dataclass
class Trial:
    material: str
    index: int  # 1-based
    modification: ModPlan | None
    facets: dict  # facet key -> {adsorbate label: eV}
    identifier: object = None
    error: str | None = None

    def verdicts(self, task):
        """Per-facet verdicts; facets missing a required adsorbate energy
        are unusable and skipped."""
        out = {}
        for facet, energies in self.facets.items():
            if all(label in energies for label in task.adsorbates):
                out[facet] = task.classify(energies)
        return out

    def best(self, task):
        """(passed, best_gap, best_band) across facets."""
        verdicts = self.verdicts(task)
        if not verdicts:
            return (False, math.inf, None)
        passed = any(v.passed for v in verdicts.values())
        best_gap = min(v.gap for v in verdicts.values())
        best_band = min((v.band for v in verdicts.values()), key=band_rank)
        return (passed, best_gap, best_band)

    def to_dict(self):
        return {
            "type": "trial",
            "material": self.material,
            "identifier": self.identifier,
            "trial": self.index,
            "modification": self.modification.to_record() if self.modification else None,
            "facets": self.facets,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            material=d["material"],
            identifier=d.get("identifier"),
            index=d["trial"],
            modification=ModPlan.from_record(d.get("modification")),
            facets=d.get("facets") or {},
            error=d.get("error"),
        )


@dataclass
class TrialLedger:
    task: TaskSpec
    materials: dict = field(default_factory=dict)  # name -> [Trial, ...]

    def add(self, trial):
        self.materials.setdefault(trial.material, []).append(trial)

    def outcome(self, material):
        trials = self.materials[material]
        return "success" if any(t.best(self.task)[0] for t in trials) else "failure"

    def validate(self):
        for name, trials in self.materials.items():
            for pos, trial in enumerate(trials, start=1):
                if trial.index != pos:
                    raise MalformedLedgerLine(0, f"{name} trials not contiguous at index {trial.index}")
            if trials and trials[0].modification is not None:
                raise MalformedLedgerLine(0, f"{name} baseline trial carries a modification")

    def write_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"type": "header", "task": self.task.to_dict()}) + "\n")
            for trials in self.materials.values():
                for trial in trials:
                    fh.write(json.dumps(trial.to_dict()) + "\n")

    @classmethod
    def read_jsonl(cls, path):
        task = None
        ledger = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedLedgerLine(lineno, str(exc)) from exc
                kind = record.get("type")
                if kind == "header":
                    task = TaskSpec.from_dict(record["task"])
                    ledger = cls(task=task)
                elif kind == "trial":
                    if ledger is None:
                        raise MalformedLedgerLine(lineno, "trial record before ledger header")
                    try:
                        ledger.add(Trial.from_dict(record))
                    except KeyError as exc:
                        raise MalformedLedgerLine(lineno, f"missing field {exc}") from exc
                else:
                    raise MalformedLedgerLine(lineno, f"unknown record type {kind!r}")
        if ledger is None or not ledger.materials:
            raise EmptyLedger(f"ledger {path} holds no trials")
        ledger.validate()
        return ledger


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class FixedPolicy:
    """Walks an explicit list of modification plans, never repeating one."""

    def __init__(self, plans):
        self.plans = [p if isinstance(p, ModPlan) else ModPlan.from_record(p) for p in plans]
        self._used = set()

    def next_modification(self, history):
        for plan in self.plans:
            if plan.key() not in self._used:
                self._used.add(plan.key())
                return plan
        return None


class AdaptivePolicy:
    """Default strain-then-doping walk.

    Strain phase first: +0.02, then the opposite sign when the last strain
    trial moved the best descriptor away from the target, then the +-0.01
    refinements. Doping phase afterwards: each configured substitution
    once, combined with the best improving strain found so far (if any).
    """

    def __init__(self, dopants=(), strains=(0.02, -0.02, 0.01, -0.01)):
        self.dopants = [tuple(d) for d in dopants]
        self.strains = list(strains)
        self._used = set()

    def _unused_strains(self):
        return [s for s in self.strains if ModPlan(strain=s).key() not in self._used]

    def _pick(self, plan):
        self._used.add(plan.key())
        return plan

    def next_modification(self, history):
        unused = self._unused_strains()
        if unused:
            last_strain_step = next(
                (h for h in reversed(history)
                 if h["modification"] is not None and h["modification"].strain is not None
                 and h["modification"].doping is None),
                None,
            )
            if last_strain_step is None:
                return self._pick(ModPlan(strain=unused[0]))
            last_sign = 1 if last_strain_step["modification"].strain > 0 else -1
            moved_away = last_strain_step["gap"] > last_strain_step["prev_gap"]
            want_sign = -last_sign if moved_away else last_sign
            for s in unused:
                if (s > 0) == (want_sign > 0):
                    return self._pick(ModPlan(strain=s))
            return self._pick(ModPlan(strain=unused[0]))

        best_strain = None
        best_gap = None
        baseline_gap = history[0]["gap"] if history else None
        for h in history:
            plan = h["modification"]
            if plan is not None and plan.strain is not None and plan.doping is None:
                if best_gap is None or h["gap"] < best_gap:
                    best_gap = h["gap"]
                    best_strain = plan.strain
        if baseline_gap is not None and best_gap is not None and best_gap >= baseline_gap:
            best_strain = None

        for dopant in self.dopants:
            plan = ModPlan(strain=best_strain, doping=dopant)
            if plan.key() in self._used:
                plan = ModPlan(strain=None, doping=dopant)
            if plan.key() not in self._used:
                return self._pick(plan)
        return None


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "adaptive"
    dopants: tuple = ()
    strains: tuple = (0.02, -0.02, 0.01, -0.01)
    plans: tuple = ()

    def build(self):
        if self.kind == "adaptive":
            return AdaptivePolicy(dopants=self.dopants, strains=self.strains)
        if self.kind == "fixed":
            return FixedPolicy(list(self.plans))
        raise ValueError(f"unknown policy kind {self.kind!r}")

    @classmethod
    def from_dict(cls, d):
        d = d or {}
        return cls(
            kind=d.get("kind", "adaptive"),
            dopants=tuple(tuple(x) for x in d.get("dopants", ())),
            strains=tuple(d.get("strains", (0.02, -0.02, 0.01, -0.01))),
            plans=tuple(d.get("plans", ())),
        )


# ---------------------------------------------------------------------------
# Campaign driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    name: str
    identifier: object = None
    source: dict = field(default_factory=dict)


def run_campaign(candidates, task, policy, budget, backend):
    """Baseline each candidate, then iterate near-miss materials.

    The modification loop stays open while the material's best band seen
    so far is Close or Near; it stops on success, policy exhaustion,
    budget, or an Away baseline.
    """
    if not candidates:
        raise ValueError("campaign needs at least one candidate")
    if budget < 1:
        raise ValueError("budget must be at least 1 trial per material")
    policy_config = policy if isinstance(policy, PolicyConfig) else PolicyConfig.from_dict(policy)

    ledger = TrialLedger(task=task)
    for cand in candidates:
        cand = cand if isinstance(cand, Candidate) else Candidate(**cand)
        material_policy = policy_config.build()
        history = []

        def record(index, plan):
            try:
                facets = backend.evaluate(cand, plan)
                error = None
            except EvaluationBackendFailure as exc:
                facets = {}
                error = str(exc)
            trial = Trial(
                material=cand.name,
                identifier=cand.identifier,
                index=index,
                modification=plan,
                facets=facets,
                error=error,
            )
            ledger.add(trial)
            passed, gap, band = trial.best(task)
            prev_gap = history[-1]["gap"] if history else math.inf
            history.append({
                "modification": plan,
                "passed": passed,
                "gap": gap,
                "band": band,
                "prev_gap": prev_gap,
                "error": error,
            })
            return history[-1]

        state = record(1, None)
        if state["error"] is not None:
            continue
        best_band = state["band"]
        trials = 1
        while (not state["passed"]
               and best_band in NEAR_MISS_BANDS
               and trials < budget):
            plan = material_policy.next_modification(history)
            if plan is None:
                break
            trials += 1
            state = record(trials, plan)
            if state["error"] is not None:
                break
            if state["band"] is not None and band_rank(state["band"]) < band_rank(best_band):
                best_band = state["band"]
    return ledger


class ScriptedBackend:
    """Evaluation backend replaying fixed per-(material, modification) energies."""

    def __init__(self, table):
        # table: name -> {"baseline": facets, "mods": [{"strain":, "doping":, "facets":}]}
        self.table = table

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh)["materials"])

    def evaluate(self, candidate, plan):
        entry = self.table.get(candidate.name)
        if entry is None:
            raise EvaluationBackendFailure(f"no scripted data for material {candidate.name!r}")
        if plan is None:
            return entry["baseline"]
        for mod in entry.get("mods", ()):
            doping = tuple(mod["doping"]) if mod.get("doping") else None
            strain = mod.get("strain")
            if ModPlan(strain=strain, doping=doping).key() == plan.key():
                return mod["facets"]
        raise EvaluationBackendFailure(
            f"no scripted data for {candidate.name!r} with modification {plan.key()}"
        )


class LiveBackend:
    """Backend that runs the adsorption pipeline for each task adsorbate."""

    def __init__(self, task, engine, hkls, n_placements=5, seed=0, isolation="inline"):
        self.task = task
        self.engine = engine
        self.hkls = list(hkls)
        self.n_placements = n_placements
        self.seed = seed
        self.isolation = isolation

    @staticmethod
    def _resolve_source(candidate):
        source = dict(candidate.source)
        source.setdefault("identifier", candidate.identifier)
        if "structure" not in source and source.get("cif_path"):
            from .crystal import parse_cif

            try:
                with open(source["cif_path"], encoding="utf-8") as fh:
                    structure = parse_cif(fh.read())
            except (OSError, Exception) as exc:
                raise EvaluationBackendFailure(
                    f"cannot load {source['cif_path']}: {exc}"
                ) from exc
            source["structure"] = structure.to_dict()
            source.setdefault("formula", structure.reduced_formula())
            source.setdefault("spacegroup", structure.metadata.spacegroup)
        return source

    def evaluate(self, candidate, plan):
        from .adsorb import evaluate_facets

        strain = plan.strain if plan else None
        doping = plan.doping if plan else None
        source = self._resolve_source(candidate)
        merged = {}
        for label in self.task.adsorbates:
            try:
                results = evaluate_facets(
                    source, label, self.hkls, self.engine,
                    strain=strain, doping=doping,
                    n_placements=self.n_placements, seed=self.seed,
                    isolation=self.isolation,
                )
            except Exception as exc:
                raise EvaluationBackendFailure(f"{type(exc).__name__}: {exc}") from exc
            for facet, block in results.items():
                if block.get("error") or not block.get("minimum_energy_results"):
                    continue
                merged.setdefault(facet, {})[label] = block["minimum_energy_results"]["adsorption_energy"]
        complete = {
            facet: energies for facet, energies in merged.items()
            if all(label in energies for label in self.task.adsorbates)
        }
        if not complete:
            raise EvaluationBackendFailure(
                f"no facet produced energies for all adsorbates of {candidate.name!r}"
            )
        return complete


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _mean_std(values):
    """Mean and sample standard deviation (0.0 when fewer than two values)."""
    values = list(values)
    if not values:
        return (0.0, 0.0)
    mean = sum(values) / len(values)
    if len(values) < 2:
        return (mean, 0.0)
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return (mean, math.sqrt(var))


@dataclass
class MetricsReport:
    task: str
    n_materials: int
    n_success: int
    success_rate: float
    t_mean: float
    t_std: float
    modification_frequency: dict
    modification_effort: dict
    trial_counts: dict

    def to_dict(self):
        return {
            "task": self.task,
            "n_materials": self.n_materials,
            "n_success": self.n_success,
            "n_failure": self.n_materials - self.n_success,
            "success_rate": self.success_rate,
            "trials_to_success": {"mean": self.t_mean, "std": self.t_std},
            "modification_frequency": self.modification_frequency,
            "modification_effort": self.modification_effort,
            "trial_counts": self.trial_counts,
        }

    CSV_COLUMNS = (
        "schema_version", "task", "n_materials", "n_success", "success_rate",
        "t_mean", "t_std", "fmod_success", "fmod_failure",
        "n_modified_success", "succ_mods_success_mean", "succ_mods_success_std",
        "unsucc_mods_success_mean", "unsucc_mods_success_std",
        "n_modified_failure", "succ_mods_failure_mean", "succ_mods_failure_std",
        "unsucc_mods_failure_mean", "unsucc_mods_failure_std",
    )

    def to_csv(self):
        effort = self.modification_effort
        row = [
            "1", self.task, self.n_materials, self.n_success,
            f"{self.success_rate:.6f}", f"{self.t_mean:.6f}", f"{self.t_std:.6f}",
            f"{self.modification_frequency['success']:.6f}",
            f"{self.modification_frequency['failure']:.6f}",
        ]
        for cat in ("success", "failure"):
            cell = effort[cat]
            row.extend([
                cell["n_modified"],
                f"{cell['successful_mods']['mean']:.6f}",
                f"{cell['successful_mods']['std']:.6f}",
                f"{cell['unsuccessful_mods']['mean']:.6f}",
                f"{cell['unsuccessful_mods']['std']:.6f}",
            ])
        header = ",".join(self.CSV_COLUMNS)
        return header + "\n" + ",".join(str(x) for x in row) + "\n"


def compute_metrics(ledger):
    """Fold a ledger into campaign statistics (order-independent)."""
    if not ledger.materials:
        raise EmptyLedger("ledger holds no materials")
    task = ledger.task

    per_material = []
    for name in sorted(ledger.materials):
        trials = sorted(ledger.materials[name], key=lambda t: t.index)
        evaluated = [(t, *t.best(task)) for t in trials]
        passed_at = next((t.index for t, passed, _, _ in evaluated if passed), None)
        succ_mods = 0
        unsucc_mods = 0
        prev_gap = None
        for t, passed, gap, _band in evaluated:
            if t.modification is not None:
                improved = passed or (prev_gap is not None and gap < prev_gap)
                if improved:
                    succ_mods += 1
                else:
                    unsucc_mods += 1
            prev_gap = gap
        per_material.append({
            "name": name,
            "trials": len(trials),
            "success": passed_at is not None,
            "t_first_success": passed_at,
            "successful_mods": succ_mods,
            "unsuccessful_mods": unsucc_mods,
        })

    n_total = len(per_material)
    successes = [m for m in per_material if m["success"]]
    failures = [m for m in per_material if not m["success"]]
    t_mean, t_std = _mean_std([m["t_first_success"] for m in successes])

    def fmod(group):
        if not group:
            return 0.0
        return sum(1 for m in group if m["trials"] > 1) / len(group)

    def effort(group):
        modified = [m for m in group if m["trials"] > 1]
        succ_mean, succ_std = _mean_std([m["successful_mods"] for m in modified])
        un_mean, un_std = _mean_std([m["unsuccessful_mods"] for m in modified])
        return {
            "n_modified": len(modified),
            "n_category": len(group),
            "successful_mods": {"mean": succ_mean, "std": succ_std},
            "unsuccessful_mods": {"mean": un_mean, "std": un_std},
        }

    def counts(group):
        dist = {}
        for m in group:
            dist[m["trials"]] = dist.get(m["trials"], 0) + 1
        return {str(k): dist[k] for k in sorted(dist)}

    return MetricsReport(
        task=task.task,
        n_materials=n_total,
        n_success=len(successes),
        success_rate=len(successes) / n_total,
        t_mean=t_mean,
        t_std=t_std,
        modification_frequency={"success": fmod(successes), "failure": fmod(failures)},
        modification_effort={"success": effort(successes), "failure": effort(failures)},
        trial_counts={"success": counts(successes), "failure": counts(failures)},
    )
