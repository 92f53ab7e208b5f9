"""Closed-loop campaign replay: the CoGa2O4 four-trial trajectory.

Baseline lands just above the window (near-miss), a combined doping-plus-
compression trial moves away, compression alone moves closer but not in,
and tensile strain lands the (0,0,1) facet inside the window. The ledger
records 2 successful and 1 unsuccessful modifications. Afterwards the
bundled campaign ledgers reproduce the recorded screening statistics.
"""

import json

from catscreen.campaign import (
    Candidate,
    PolicyConfig,
    ScriptedBackend,
    TrialLedger,
    compute_metrics,
    run_campaign,
)
from catscreen.data import path as data_path
from catscreen.descriptors import BUILTIN_TASKS

with open(data_path("campaign", "coga2o4_replay.json")) as fh:
    config = json.load(fh)
backend = ScriptedBackend.from_file(data_path("campaign", "coga2o4_energies.json"))
task = BUILTIN_TASKS[config["task"]]

ledger = run_campaign(
    [Candidate(**config["candidates"][0])], task,
    PolicyConfig.from_dict(config["policy"]), config["budget"], backend,
)

for trial in ledger.materials["CoGa2O4"]:
    passed, gap, band = trial.best(task)
    mod = trial.modification.to_record() if trial.modification else "baseline"
    best = min(trial.facets.items(), key=lambda kv: abs(kv[1]["*OH"] - 1.0))
    print(f"trial {trial.index}: {mod}")
    print(f"  best facet {best[0]} at {best[1]['*OH']:+.4f} eV -> "
          f"band {band}, gap {gap:.4f}, pass={passed}")

report = compute_metrics(ledger)
effort = report.modification_effort["success"]
print(f"\nsuccess on trial {report.t_mean:.0f}; modifications: "
      f"{effort['successful_mods']['mean']:.0f} successful, "
      f"{effort['unsuccessful_mods']['mean']:.0f} unsuccessful")

print("\nbundled campaign ledgers:")
for name in ("orr", "nrr", "co2rr"):
    ledger = TrialLedger.read_jsonl(data_path("ledgers", f"{name}.jsonl"))
    r = compute_metrics(ledger)
    print(f"  {name.upper():6s} n={r.n_materials:3d} success rate {r.success_rate:.2f} "
          f"trials-to-success {r.t_mean:.2f} +- {r.t_std:.2f}")
