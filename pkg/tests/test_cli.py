import json
import os
import subprocess
import sys

import pytest

from catscreen.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from catscreen.data import path as data_path


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestServe:
    def test_clean_eof_exits_zero(self):
        proc = subprocess.run(
            [sys.executable, "-m", "catscreen.cli", "serve", "energy"],
            input=b"", capture_output=True, timeout=60,
        )
        assert proc.returncode == 0

    def test_bogus_kind_usage_error(self):
        proc = subprocess.run(
            [sys.executable, "-m", "catscreen.cli", "serve", "bogus"],
            input=b"", capture_output=True, timeout=60,
        )
        assert proc.returncode == 64

    def test_serve_retrieval_with_fixtures(self, tmp_path):
        request = json.dumps({
            "jsonrpc": "2.0", "id": 1, "method": "tools/call",
            "params": {"name": "optimade_structure_search",
                       "arguments": {"elements": ["Co", "Al", "O"], "nelements": 3}},
        })
        proc = subprocess.run(
            [sys.executable, "-m", "catscreen.cli", "serve", "retrieval",
             "--fixtures", data_path("golden", "optimade_responses.json"),
             "--output", str(tmp_path), "--cache", str(tmp_path / "cache")],
            input=(request + "\n").encode(), capture_output=True, timeout=120,
        )
        assert proc.returncode == 0
        response = json.loads(proc.stdout.decode().splitlines()[0])
        payload = json.loads(response["result"]["content"][0]["text"])
        assert payload["message"] == "Found 49 structures matching criteria"
        # replay equality with the library-level client output
        assert (tmp_path / "results_short.json").exists()


class TestEvaluate:
    def test_cif_surrogate_energy_identity(self, tmp_path, capsys):
        out_file = tmp_path / "result.json"
        code, _, _ = run_cli([
            "evaluate", "--cif", data_path("cif", "Cu.cif"),
            "--adsorbate", "*H", "--hkl", "0,0,1",
            "--placements", "2", "--fmax", "0.2", "--max-steps", "30",
            "--out", str(out_file),
        ], capsys)
        assert code == EXIT_OK
        result = json.loads(out_file.read_text())
        block = result["results_by_hkl"]["(0,0,1)"]
        minimum = block["minimum_energy_results"]
        recomputed = minimum["adslab_energy"] - minimum["slab_energy"] - minimum["gas_reactant_energy"]
        assert abs(recomputed - minimum["adsorption_energy"]) <= 1e-9

    def test_golden_replay_matches_call2(self, capsys):
        code, out, _ = run_cli([
            "evaluate", "--provider", "mp", "--identifier", "mp-36447",
            "--adsorbate", "*OH", "--hkl", "[0,0,1]", "[1,0,0]",
            "--engine", "replay:" + data_path("golden", "facet_blocks.json"),
        ], capsys)
        assert code == EXIT_OK
        with open(data_path("golden", "calls.json")) as fh:
            golden = {c["call"]: c for c in json.load(fh)["calls"]}
        assert json.loads(out) == golden[2]["output"]

    def test_strain_out_of_range_exits_65(self, capsys):
        code, _, err = run_cli([
            "evaluate", "--cif", data_path("cif", "Cu.cif"),
            "--adsorbate", "*OH", "--hkl", "0,0,1", "--strain", "0.6",
            "--placements", "1", "--fmax", "0.5", "--max-steps", "5",
        ], capsys)
        assert code == EXIT_DATA
        assert "strain" in err

    def test_seed_reproducibility(self, tmp_path, capsys):
        outs = []
        for name in ("a.json", "b.json"):
            out_file = tmp_path / name
            code, _, _ = run_cli([
                "--seed", "7",
                "evaluate", "--cif", data_path("cif", "Cu.cif"),
                "--adsorbate", "*H", "--hkl", "0,0,1",
                "--placements", "3", "--fmax", "0.2", "--max-steps", "30",
                "--out", str(out_file),
            ], capsys)
            assert code == EXIT_OK
            outs.append(out_file.read_bytes())
        assert outs[0] == outs[1]

    def test_cli_and_mcp_share_one_implementation(self, tmp_path, capsys):
        """Identical inputs produce byte-identical payloads on both paths."""
        code, out, _ = run_cli([
            "evaluate", "--provider", "mp", "--identifier", "mp-36447",
            "--adsorbate", "*OH", "--hkl", "[1,1,0]",
            "--engine", "replay:" + data_path("golden", "facet_blocks.json"),
        ], capsys)
        assert code == EXIT_OK
        cli_payload = json.loads(out)

        import io
        from catscreen.mcp_server import McpServer, ServerContext

        stdin = io.StringIO(json.dumps({
            "jsonrpc": "2.0", "id": 1, "method": "tools/call",
            "params": {"name": "adsorbml_evaluate",
                       "arguments": {"provider": "mp", "identifier": "mp-36447",
                                     "adsorbate": "*OH", "hkl1": "[1,1,0]"}},
        }) + "\n")
        stdout = io.StringIO()
        context = ServerContext(
            output_dir=str(tmp_path),
            engine_config={"kind": "replay",
                           "path": data_path("golden", "facet_blocks.json")},
        )
        McpServer("energy_evaluation", context).serve(stdin, stdout)
        response = json.loads(stdout.getvalue().splitlines()[-1])
        mcp_payload = json.loads(response["result"]["content"][0]["text"])
        assert json.dumps(cli_payload, sort_keys=True) == json.dumps(mcp_payload, sort_keys=True)


class TestSlabCommand:
    def test_slab_with_modifications(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli([
            "slab", "--cif", data_path("cif", "Cu.cif"), "--hkl", "0,0,1",
            "--strain", "0.02", "--doping", "Cu->Ni",
        ], capsys)
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["modifications_applied"]["strain"]["type"] == "compressive"
        assert os.path.exists(payload["slab_file"])


class TestSearchCommand:
    def test_fixture_search(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run_cli([
            "search", "--elements", "Co", "Al", "O", "--nelements", "3",
            "--fixtures", data_path("golden", "optimade_responses.json"),
            "--output", str(tmp_path),
        ], capsys)
        assert code == EXIT_OK
        summary = json.loads(out)
        assert summary["provider_counts"] == {"mp": 28, "oqmd": 21}

    def test_requires_fixtures_or_live(self, capsys):
        code, _, err = run_cli([
            "search", "--elements", "Cu", "--nelements", "1",
        ], capsys)
        assert code == EXIT_DATA


class TestCampaignCommands:
    def test_metrics_nrr_table(self, tmp_path, capsys):
        json_out = tmp_path / "metrics.json"
        csv_out = tmp_path / "metrics.csv"
        code, out, _ = run_cli([
            "campaign", "metrics", "--ledger", data_path("ledgers", "nrr.jsonl"),
            "--json", str(json_out), "--csv", str(csv_out),
        ], capsys)
        assert code == EXIT_OK
        report = json.loads(out)
        assert abs(report["success_rate"] - 0.2308) <= 0.005
        assert abs(report["trials_to_success"]["mean"] - 2.083) <= 0.05
        assert abs(report["trials_to_success"]["std"] - 1.38) <= 0.05
        assert json.loads(json_out.read_text()) == report
        assert csv_out.read_text().startswith("schema_version,task,")

    def test_metrics_co2rr_failure_effort(self, capsys):
        code, out, _ = run_cli([
            "campaign", "metrics", "--ledger", data_path("ledgers", "co2rr.jsonl"),
        ], capsys)
        assert code == EXIT_OK
        report = json.loads(out)
        effort = report["modification_effort"]["failure"]
        assert abs(effort["successful_mods"]["mean"] - 2.00) <= 0.02
        assert abs(effort["unsuccessful_mods"]["mean"] - 2.33) <= 0.02

    def test_empty_ledger_is_data_error(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        code, _, err = run_cli(["campaign", "metrics", "--ledger", str(empty)], capsys)
        assert code == EXIT_DATA

    def test_campaign_run_candidates_from_file(self, tmp_path, capsys):
        (tmp_path / "candidates.json").write_text(json.dumps({"ORR": ["MatA", "MatB"]}))
        (tmp_path / "energies.json").write_text(json.dumps({"materials": {
            "MatA": {"baseline": {"(0,0,1)": {"*OH": 1.0}}},
            "MatB": {"baseline": {"(0,0,1)": {"*OH": -4.0}}},
        }}))
        (tmp_path / "campaign.json").write_text(json.dumps({
            "task": "ORR",
            "budget": 3,
            "candidates": {"from_file": "candidates.json"},
            "backend": {"kind": "scripted", "path": "energies.json"},
        }))
        ledger_path = tmp_path / "ledger.jsonl"
        code, out, _ = run_cli([
            "campaign", "run", "--config", str(tmp_path / "campaign.json"),
            "--out", str(ledger_path),
        ], capsys)
        assert code == EXIT_OK
        summary = json.loads(out)["summary"]
        assert summary["n_materials"] == 2
        assert summary["n_success"] == 1

    def test_campaign_run_coga_replay(self, tmp_path, capsys):
        with open(data_path("campaign", "coga2o4_replay.json")) as fh:
            config = json.load(fh)
        config["backend"]["path"] = data_path("campaign", "coga2o4_energies.json")
        config_path = tmp_path / "campaign.json"
        config_path.write_text(json.dumps(config))
        ledger_path = tmp_path / "ledger.jsonl"
        code, out, _ = run_cli([
            "campaign", "run", "--config", str(config_path), "--out", str(ledger_path),
        ], capsys)
        assert code == EXIT_OK
        summary = json.loads(out)["summary"]
        assert summary["n_success"] == 1
        lines = [json.loads(l) for l in ledger_path.read_text().splitlines()]
        trials = [l for l in lines if l["type"] == "trial"]
        assert len(trials) == 4
        assert trials[3]["facets"]["(0,0,1)"]["*OH"] == 1.0584


class TestUsageErrors:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag(self, capsys):
        assert main(["evaluate", "--nonsense"]) == EXIT_USAGE
