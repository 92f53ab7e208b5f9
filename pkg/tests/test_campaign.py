import json
import math
import random

import pytest

from catscreen.campaign import (
    AdaptivePolicy,
    Candidate,
    FixedPolicy,
    ModPlan,
    PolicyConfig,
    ScriptedBackend,
    Trial,
    TrialLedger,
    compute_metrics,
    run_campaign,
)
from catscreen.data import path as data_path
from catscreen.descriptors import BUILTIN_TASKS
from catscreen.errors import EmptyLedger, EvaluationBackendFailure, MalformedLedgerLine


@pytest.fixture
def orr_task():
    return BUILTIN_TASKS["ORR"]


@pytest.fixture
def coga_setup():
    with open(data_path("campaign", "coga2o4_replay.json")) as fh:
        config = json.load(fh)
    backend = ScriptedBackend.from_file(data_path("campaign", "coga2o4_energies.json"))
    return config, backend


def scripted(table):
    return ScriptedBackend(table)


class TestRunCampaign:
    def test_baseline_pass_is_single_trial(self, orr_task):
        backend = scripted({"M": {"baseline": {"(0,0,1)": {"*OH": 1.0}}}})
        ledger = run_campaign(
            [Candidate(name="M")], orr_task, PolicyConfig(), budget=10, backend=backend,
        )
        trials = ledger.materials["M"]
        assert len(trials) == 1
        assert ledger.outcome("M") == "success"

    def test_away_baseline_stops_immediately(self, orr_task):
        backend = scripted({"M": {"baseline": {"(0,0,1)": {"*OH": -3.0}}}})
        ledger = run_campaign(
            [Candidate(name="M")], orr_task,
            PolicyConfig(dopants=(("Cu", "Ni"),)), budget=10, backend=backend,
        )
        assert len(ledger.materials["M"]) == 1
        assert ledger.outcome("M") == "failure"

    def test_coga2o4_replay(self, orr_task, coga_setup):
        """Four-trial trajectory: near-miss baseline, worse combined mod,
        closer strain-only mod, tensile pass."""
        config, backend = coga_setup
        ledger = run_campaign(
            [Candidate(**config["candidates"][0])],
            orr_task,
            PolicyConfig.from_dict(config["policy"]),
            config["budget"],
            backend,
        )
        trials = ledger.materials["CoGa2O4"]
        assert len(trials) == 4
        passed, gap, band = trials[3].best(orr_task)
        assert passed
        assert trials[3].facets["(0,0,1)"]["*OH"] == 1.0584
        report = compute_metrics(ledger)
        assert report.n_success == 1
        cell = report.modification_effort["success"]
        assert cell["successful_mods"]["mean"] == 2.0
        assert cell["unsuccessful_mods"]["mean"] == 1.0

    def test_budget_caps_trials(self, orr_task):
        table = {"M": {"baseline": {"(0,0,1)": {"*OH": 1.15}}, "mods": [
            {"strain": s, "doping": None, "facets": {"(0,0,1)": {"*OH": 1.15 + 0.01 * i}}}
            for i, s in enumerate((0.02, -0.02, 0.01, -0.01), start=1)
        ]}}
        ledger = run_campaign(
            [Candidate(name="M")], orr_task, PolicyConfig(), budget=3,
            backend=scripted(table),
        )
        assert len(ledger.materials["M"]) == 3

    def test_policy_exhaustion_stops(self, orr_task):
        table = {"M": {"baseline": {"(0,0,1)": {"*OH": 1.15}}, "mods": [
            {"strain": 0.02, "doping": None, "facets": {"(0,0,1)": {"*OH": 1.18}}},
        ]}}
        policy = PolicyConfig(kind="fixed", plans=(
            {"strain": {"value": 0.02, "percentage": 2.0, "type": "compressive"}},
        ))
        ledger = run_campaign(
            [Candidate(name="M")], orr_task, policy, budget=10, backend=scripted(table),
        )
        assert len(ledger.materials["M"]) == 2
        assert ledger.outcome("M") == "failure"

    def test_backend_failure_marks_material_and_continues(self, orr_task):
        table = {"B": {"baseline": {"(0,0,1)": {"*OH": 1.0}}}}
        ledger = run_campaign(
            [Candidate(name="A"), Candidate(name="B")], orr_task, PolicyConfig(),
            budget=5, backend=scripted(table),
        )
        assert ledger.materials["A"][0].error is not None
        assert ledger.outcome("A") == "failure"
        assert ledger.outcome("B") == "success"

    def test_modification_loop_stays_open_after_away_excursion(self, orr_task):
        # an all-Away modification must not close the gate opened at baseline
        table = {"M": {"baseline": {"(0,0,1)": {"*OH": 1.15}}, "mods": [
            {"strain": 0.02, "doping": None, "facets": {"(0,0,1)": {"*OH": -3.0}}},
            {"strain": -0.02, "doping": None, "facets": {"(0,0,1)": {"*OH": 1.0}}},
        ]}}
        ledger = run_campaign(
            [Candidate(name="M")], orr_task, PolicyConfig(), budget=10,
            backend=scripted(table),
        )
        assert ledger.outcome("M") == "success"
        assert len(ledger.materials["M"]) == 3


class TestPolicies:
    def _hist(self, entries):
        """entries: list of (plan, gap, prev_gap)."""
        return [{"modification": plan, "gap": gap, "prev_gap": prev, "passed": False,
                 "band": "Close", "error": None}
                for plan, gap, prev in entries]

    def test_first_step_is_plus_two_percent(self):
        policy = AdaptivePolicy()
        plan = policy.next_modification(self._hist([(None, 0.05, math.inf)]))
        assert plan == ModPlan(strain=0.02)

    def test_reverses_sign_after_moving_away(self):
        # oracle: hand-trace on the recorded four-trial energy sequence --
        # baseline gap 0.0102, +0.02 strain gap 0.1014 (moved away), so the
        # next strain proposal flips sign
        policy = AdaptivePolicy()
        history = self._hist([(None, 0.0102, math.inf)])
        first = policy.next_modification(history)
        assert first == ModPlan(strain=0.02)
        history = self._hist([
            (None, 0.0102, math.inf),
            (ModPlan(strain=0.02), 0.1014, 0.0102),
        ])
        assert policy.next_modification(history) == ModPlan(strain=-0.02)

    def test_keeps_sign_when_improving(self):
        policy = AdaptivePolicy()
        history = self._hist([(None, 0.10, math.inf)])
        policy.next_modification(history)
        history = self._hist([
            (None, 0.10, math.inf),
            (ModPlan(strain=0.02), 0.05, 0.10),
        ])
        assert policy.next_modification(history) == ModPlan(strain=0.01)

    def test_dopants_combined_with_best_improving_strain(self):
        policy = AdaptivePolicy(dopants=(("Ga", "Al"),), strains=(0.02, -0.02))
        history = self._hist([
            (None, 0.10, math.inf),
            (ModPlan(strain=0.02), 0.05, 0.10),
            (ModPlan(strain=-0.02), 0.20, 0.05),
        ])
        policy._used = {ModPlan(strain=0.02).key(), ModPlan(strain=-0.02).key()}
        plan = policy.next_modification(history)
        assert plan == ModPlan(strain=0.02, doping=("Ga", "Al"))

    def test_exhaustion_returns_none(self):
        policy = AdaptivePolicy(dopants=(), strains=(0.02,))
        history = self._hist([(None, 0.10, math.inf)])
        assert policy.next_modification(history) == ModPlan(strain=0.02)
        history = self._hist([
            (None, 0.10, math.inf),
            (ModPlan(strain=0.02), 0.2, 0.10),
        ])
        assert policy.next_modification(history) is None

    def test_fixed_policy_never_repeats(self):
        plans = [{"strain": {"value": 0.02, "percentage": 2.0, "type": "compressive"}}] * 2
        policy = FixedPolicy(plans)
        assert policy.next_modification([]) == ModPlan(strain=0.02)
        assert policy.next_modification([]) is None


class TestLiveBackend:
    def test_full_loop_with_cif_candidate(self):
        """Closed loop wired to the real adsorption pipeline via a CIF
        source (the CIF-path candidate flavor)."""
        from catscreen.adsorb import LiveEngine
        from catscreen.campaign import LiveBackend
        from catscreen.energetics import MorseSurrogate, RelaxSettings

        task = BUILTIN_TASKS["ORR"]
        engine = LiveEngine(
            MorseSurrogate(), RelaxSettings(fmax=0.2, max_steps=25),
            {"min_ab": 3.0, "min_thickness": 3.0, "vacuum": 12.0},
        )
        backend = LiveBackend(task, engine, hkls=["0,0,1"], n_placements=2, seed=3)
        candidate = Candidate(
            name="Cu", source={"cif_path": data_path("cif", "Cu.cif")},
        )
        ledger = run_campaign([candidate], task, PolicyConfig(strains=(0.02,)),
                              budget=2, backend=backend)
        trials = ledger.materials["Cu"]
        assert trials[0].error is None
        assert "(0,0,1)" in trials[0].facets

    def test_missing_cif_is_backend_failure(self):
        from catscreen.adsorb import LiveEngine
        from catscreen.campaign import LiveBackend
        from catscreen.energetics import MorseSurrogate

        task = BUILTIN_TASKS["ORR"]
        backend = LiveBackend(task, LiveEngine(MorseSurrogate()), hkls=["0,0,1"])
        with pytest.raises(EvaluationBackendFailure):
            backend.evaluate(Candidate(name="X", source={"cif_path": "/no/such.cif"}), None)


class TestLedgerIO:
    def test_roundtrip(self, orr_task, tmp_path):
        ledger = TrialLedger(task=orr_task)
        ledger.add(Trial(material="M", index=1, modification=None,
                         facets={"(0,0,1)": {"*OH": 1.0}}))
        path = tmp_path / "ledger.jsonl"
        ledger.write_jsonl(str(path))
        loaded = TrialLedger.read_jsonl(str(path))
        assert loaded.task == orr_task
        assert loaded.materials["M"][0].facets == {"(0,0,1)": {"*OH": 1.0}}

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"type": "header", "task": {"task": "ORR", "adsorbates": ["*OH"], '
                        '"windows": {"*OH": [0.9, 1.1]}, "bands": [["Optimal", 0.9, 1.1]]}}\n'
                        "not json at all\n")
        with pytest.raises(MalformedLedgerLine) as err:
            TrialLedger.read_jsonl(str(path))
        assert err.value.lineno == 2

    def test_empty_ledger(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(EmptyLedger):
            TrialLedger.read_jsonl(str(path))


class TestBundledLedgerMetrics:
    """Reproduction of the recorded campaign statistics from the bundled
    ledgers (tolerances: rates +-0.01, means +-0.05, effort cells +-0.02)."""

    def test_orr_table(self):
        report = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "orr.jsonl")))
        assert report.n_materials == 82
        assert abs(report.success_rate - 0.34) <= 0.01
        assert abs(report.t_mean - 1.86) <= 0.05
        effort = report.modification_effort
        assert effort["success"]["n_modified"] == 9
        assert abs(effort["success"]["successful_mods"]["mean"] - 1.67) <= 0.02
        assert abs(effort["success"]["successful_mods"]["std"] - 0.71) <= 0.02
        assert abs(effort["success"]["unsuccessful_mods"]["mean"] - 1.00) <= 0.02
        assert abs(effort["success"]["unsuccessful_mods"]["std"] - 0.87) <= 0.02
        assert abs(effort["failure"]["successful_mods"]["mean"] - 0.50) <= 0.02
        assert abs(effort["failure"]["successful_mods"]["std"] - 0.76) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["mean"] - 1.00) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["std"] - 0.53) <= 0.02

    def test_nrr_table(self):
        report = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "nrr.jsonl")))
        assert report.n_materials == 52
        assert abs(report.success_rate - 0.23) <= 0.01
        assert abs(report.t_mean - 2.08) <= 0.05
        assert abs(report.t_std - 1.38) <= 0.05
        effort = report.modification_effort
        assert abs(effort["success"]["successful_mods"]["mean"] - 1.17) <= 0.02
        assert abs(effort["success"]["unsuccessful_mods"]["std"] - 1.10) <= 0.02
        assert abs(effort["failure"]["successful_mods"]["mean"] - 1.22) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["mean"] - 1.78) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["std"] - 1.72) <= 0.02

    def test_co2rr_table(self):
        report = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "co2rr.jsonl")))
        assert report.n_materials == 13
        assert abs(report.success_rate - 0.31) <= 0.01
        assert report.t_mean == pytest.approx(1.25)
        assert report.t_std == pytest.approx(0.50)
        effort = report.modification_effort
        assert effort["success"]["n_modified"] == 1
        assert effort["success"]["successful_mods"] == {"mean": 1.0, "std": 0.0}
        assert effort["success"]["unsuccessful_mods"] == {"mean": 0.0, "std": 0.0}
        assert abs(effort["failure"]["successful_mods"]["mean"] - 2.00) <= 0.02
        assert abs(effort["failure"]["successful_mods"]["std"] - 1.50) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["mean"] - 2.33) <= 0.02
        assert abs(effort["failure"]["unsuccessful_mods"]["std"] - 1.58) <= 0.02

    def test_modification_frequencies_match_prose(self):
        orr = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "orr.jsonl")))
        assert orr.modification_frequency["success"] == pytest.approx(9 / 28)
        assert orr.modification_frequency["failure"] == pytest.approx(8 / 54)
        nrr = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "nrr.jsonl")))
        assert nrr.modification_frequency["success"] == pytest.approx(0.5)
        co2 = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "co2rr.jsonl")))
        assert co2.modification_frequency["failure"] == pytest.approx(1.0)

    def test_conservation(self):
        for name in ("orr", "nrr", "co2rr"):
            report = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", f"{name}.jsonl")))
            d = report.to_dict()
            assert d["n_success"] + d["n_failure"] == d["n_materials"]
            dist = report.trial_counts
            total = sum(dist["success"].values()) + sum(dist["failure"].values())
            assert total == d["n_materials"]

    def test_order_independence(self, tmp_path):
        ledger = TrialLedger.read_jsonl(data_path("ledgers", "nrr.jsonl"))
        base = compute_metrics(ledger).to_dict()
        names = list(ledger.materials)
        rng = random.Random(99)
        rng.shuffle(names)
        shuOffled = TrialLedger(task=ledger.task,
                                materials={n: ledger.materials[n] for n in names})
        assert compute_metrics(shuOffled).to_dict() == base

    def test_t_first_success_is_last_trial_for_successes(self):
        # the loop stops on success, so successful materials end on a pass
        ledger = TrialLedger.read_jsonl(data_path("ledgers", "orr.jsonl"))
        task = ledger.task
        for name, trials in ledger.materials.items():
            passes = [t.index for t in trials if t.best(task)[0]]
            if passes:
                assert passes[0] == len(trials)

    def test_csv_export_columns(self):
        report = compute_metrics(TrialLedger.read_jsonl(data_path("ledgers", "co2rr.jsonl")))
        csv = report.to_csv()
        header, row, _empty = csv.split("\n")
        assert header.split(",") == list(report.CSV_COLUMNS)
        assert row.split(",")[0] == "1"  # schema version
