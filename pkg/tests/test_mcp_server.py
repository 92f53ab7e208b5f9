import io
import json
import os
import shutil

import pytest

from catscreen.data import path as data_path
from catscreen.mcp_server import (
    McpServer,
    ServerContext,
    SERVER_KINDS,
    TOOL_SCHEMAS,
    validate_schema,
)
from catscreen.errors import ArgumentValidation


def run_server(kind, context, messages):
    """Feed newline-delimited messages to a server; return parsed output."""
    stdin = io.StringIO("\n".join(
        m if isinstance(m, str) else json.dumps(m) for m in messages
    ) + "\n")
    stdout = io.StringIO()
    McpServer(kind, context).serve(stdin, stdout)
    return [json.loads(line) for line in stdout.getvalue().splitlines() if line.strip()]


def rpc(msg_id, method, **params):
    message = {"jsonrpc": "2.0", "id": msg_id, "method": method}
    if params:
        message["params"] = params
    return message


def call(msg_id, tool, arguments):
    return rpc(msg_id, "tools/call", name=tool, arguments=arguments)


def payload_of(response):
    assert "result" in response, response
    assert response["result"]["isError"] is False, response
    return json.loads(response["result"]["content"][0]["text"])


@pytest.fixture
def retrieval_context(tmp_path):
    return ServerContext(
        output_dir=str(tmp_path / "out"),
        cache_dir=str(tmp_path / "cache"),
        fixture_path=data_path("golden", "optimade_responses.json"),
    )


@pytest.fixture
def energy_replay_context(tmp_path):
    return ServerContext(
        output_dir=str(tmp_path / "out"),
        cache_dir=str(tmp_path / "cache"),
        engine_config={"kind": "replay", "path": data_path("golden", "facet_blocks.json")},
    )


@pytest.fixture
def golden_calls():
    with open(data_path("golden", "calls.json")) as fh:
        return {c["call"]: c for c in json.load(fh)["calls"]}


class TestProtocolBasics:
    def test_initialize(self, retrieval_context):
        out = run_server("structure_retrieval", retrieval_context, [rpc(1, "initialize")])
        assert out[0]["id"] == 1
        result = out[0]["result"]
        assert result["protocolVersion"]
        assert result["serverInfo"]["name"] == "catscreen-structure_retrieval"

    @pytest.mark.parametrize("kind,tool", [
        ("structure_retrieval", "optimade_structure_search"),
        ("cif_resource", "list_cif_files"),
        ("structure_modification", "create_and_serialize_slab"),
        ("energy_evaluation", "adsorbml_evaluate"),
        ("candidate_info", "candidate_list"),
    ])
    def test_tools_list_per_server(self, kind, tool, tmp_path):
        context = ServerContext(output_dir=str(tmp_path))
        out = run_server(kind, context, [rpc(1, "tools/list")])
        tools = out[0]["result"]["tools"]
        assert [t["name"] for t in tools] == [tool]
        assert tools[0]["inputSchema"]["type"] == "object"

    def test_unknown_method(self, retrieval_context):
        out = run_server("structure_retrieval", retrieval_context,
                         [rpc(1, "bogus/method"), rpc(2, "tools/list")])
        assert out[0]["error"]["code"] == -32601
        assert "result" in out[1]  # server kept serving

    def test_unknown_tool_is_protocol_error(self, retrieval_context):
        out = run_server("structure_retrieval", retrieval_context,
                         [call(1, "not_a_tool", {}), rpc(2, "tools/list")])
        assert out[0]["error"]["code"] == -32602
        assert "result" in out[1]

    def test_schema_invalid_arguments(self, energy_replay_context):
        out = run_server("energy_evaluation", energy_replay_context, [
            call(1, "adsorbml_evaluate", {"adsorbate": "*OH"}),  # missing hkl1
        ])
        assert out[0]["error"]["code"] == -32602
        assert "hkl1" in out[0]["error"]["message"]

    def test_sixth_hkl_rejected(self, energy_replay_context):
        args = {"provider": "mp", "identifier": "mp-36447", "adsorbate": "*OH"}
        args.update({f"hkl{i}": "[0,0,1]" for i in range(1, 7)})
        out = run_server("energy_evaluation", energy_replay_context,
                         [call(1, "adsorbml_evaluate", args)])
        assert out[0]["error"]["code"] == -32602
        assert "hkl6" in out[0]["error"]["message"]

    def test_notification_messages_ignored(self, retrieval_context):
        out = run_server("structure_retrieval", retrieval_context, [
            {"jsonrpc": "2.0", "method": "notifications/initialized"},
            rpc(1, "tools/list"),
        ])
        assert len(out) == 1 and out[0]["id"] == 1

    def test_survives_1000_malformed_requests(self, retrieval_context):
        garbage = []
        for i in range(1000):
            k = i % 5
            if k == 0:
                garbage.append("{truncated")
            elif k == 1:
                garbage.append('"just a string"')
            elif k == 2:
                garbage.append('{"jsonrpc": 2, "id": %d}' % i)
            elif k == 3:
                garbage.append('{"jsonrpc": "2.0", "id": %d}' % i)
            else:
                garbage.append("[1, 2, 3]")
        out = run_server("structure_retrieval", retrieval_context,
                         garbage + [rpc(7777, "tools/list")])
        final = out[-1]
        assert final.get("id") == 7777 and "result" in final

    def test_fifo_ordering(self, energy_replay_context):
        messages = [
            call(10, "adsorbml_evaluate",
                 {"provider": "mp", "identifier": "mp-36447",
                  "adsorbate": "*OH", "hkl1": "[0,0,1]"}),
            call(11, "adsorbml_evaluate",
                 {"provider": "mp", "identifier": "mp-36447",
                  "adsorbate": "*OH", "hkl1": "[1,1,0]"}),
        ]
        out = run_server("energy_evaluation", energy_replay_context, messages)
        responses = [m for m in out if "id" in m and m.get("id") is not None]
        assert [r["id"] for r in responses] == [10, 11]


class TestGoldenTranscripts:
    def test_call1_structure_search(self, retrieval_context, golden_calls):
        golden = golden_calls[1]
        out = run_server("structure_retrieval", retrieval_context,
                         [call(1, golden["tool"], golden["arguments"])])
        payload = payload_of(out[0])
        assert set(payload) == {"message", "results_summary", "files_saved"}
        assert payload["message"] == golden["output"]["message"]
        assert payload["files_saved"] == golden["output"]["files_saved"]
        assert len(payload["results_summary"]) == golden["output"]["total_count"] == 49
        for entry in golden["output"]["results_summary"]:
            expected = {k: v for k, v in entry.items() if k != "position"}
            assert payload["results_summary"][entry["position"]] == expected

    @pytest.mark.parametrize("number", [2, 3, 4, 5, 6, 7, 8, 9])
    def test_energy_calls_structural_parity(self, number, energy_replay_context, golden_calls):
        golden = golden_calls[number]
        out = run_server("energy_evaluation", energy_replay_context,
                         [call(number, golden["tool"], golden["arguments"])])
        responses = [m for m in out if m.get("id") == number]
        payload = payload_of(responses[0])
        assert payload == golden["output"]

    def test_call6_strain_block_exact(self, energy_replay_context, golden_calls):
        golden = golden_calls[6]
        out = run_server("energy_evaluation", energy_replay_context,
                         [call(6, golden["tool"], golden["arguments"])])
        payload = payload_of([m for m in out if m.get("id") == 6][0])
        for facet_block in payload["results_by_hkl"].values():
            assert facet_block["modifications_applied"]["strain"] == \
                {"value": 0.02, "percentage": 2.0, "type": "compressive"}

    def test_alias_and_canonical_names_agree(self, energy_replay_context, golden_calls):
        args = golden_calls[3]["arguments"]
        out = run_server("energy_evaluation", energy_replay_context, [
            call(1, "adsorbml_analysis", args),
            call(2, "adsorbml_evaluate", args),
        ])
        responses = {m["id"]: m for m in out if m.get("id") is not None}
        assert payload_of(responses[1]) == payload_of(responses[2])

    def test_retrieval_then_energy_share_cache(self, tmp_path, golden_calls):
        cache = str(tmp_path / "cache")
        retrieval = ServerContext(output_dir=str(tmp_path), cache_dir=cache,
                                  fixture_path=data_path("golden", "optimade_responses.json"))
        run_server("structure_retrieval", retrieval,
                   [call(1, "optimade_structure_search", golden_calls[1]["arguments"])])
        assert os.path.exists(os.path.join(cache, "mp", "mp-36447.json"))
        # a live-engine energy server can now resolve the cached structure
        energy = ServerContext(
            output_dir=str(tmp_path), cache_dir=cache,
            engine_config={"kind": "live",
                           "settings": {"fmax": 0.2, "max_steps": 20},
                           "slab_options": {"min_ab": 3.0, "min_thickness": 3.0, "vacuum": 10.0}},
        )
        out = run_server("energy_evaluation", energy, [
            call(1, "adsorbml_evaluate",
                 {"provider": "mp", "identifier": "mp-36447", "adsorbate": "*H",
                  "hkl1": "[0,0,1]", "placements": 2, "seed": 1}),
        ])
        payload = payload_of([m for m in out if m.get("id") == 1][0])
        block = payload["results_by_hkl"]["(0,0,1)"]
        assert block.get("error") is None
        assert block["formula"] == "Al2CoO4"


class TestNotifications:
    def test_energy_calls_emit_status_logs(self, energy_replay_context, golden_calls):
        golden = golden_calls[2]
        out = run_server("energy_evaluation", energy_replay_context,
                         [call(2, golden["tool"], golden["arguments"])])
        notes = [m for m in out if m.get("method") == "notifications/message"]
        assert len(notes) >= 2  # started/finished per facet
        events = {n["params"]["data"]["event"] for n in notes}
        assert {"facet_started", "facet_finished"} <= events
        # notifications precede the final response
        assert "result" in out[-1]


class TestCifResource:
    def test_list_cif_files(self, tmp_path):
        cif_dir = tmp_path / "cifs"
        cif_dir.mkdir()
        for name in ("Cu.cif", "Pb3Y.cif"):
            shutil.copy(data_path("cif", name), cif_dir / name)
        (cif_dir / "broken.cif").write_text("data_x\nnot really a cif\n")
        context = ServerContext(cif_dir=str(cif_dir), output_dir=str(tmp_path))
        out = run_server("cif_resource", context, [call(1, "list_cif_files", {})])
        payload = payload_of(out[0])
        by_name = {f["name"]: f for f in payload["files"]}
        assert by_name["Cu.cif"]["parse_status"] == "ok"
        assert by_name["Cu.cif"]["formula"] == "Cu"
        assert by_name["Pb3Y.cif"]["spacegroup"] == "Pm-3m"
        assert by_name["broken.cif"]["parse_status"] == "error"


class TestStructureModification:
    def test_create_and_serialize_slab_with_strain(self, tmp_path):
        context = ServerContext(
            output_dir=str(tmp_path / "out"),
            cif_dir=data_path("cif"),
        )
        out = run_server("structure_modification", context, [
            call(1, "create_and_serialize_slab",
                 {"cif_path": "Cu.cif", "hkl": "[0,0,1]", "strain": "0.02"}),
        ])
        payload = payload_of(out[0])
        assert payload["modifications_applied"]["strain"] == \
            {"value": 0.02, "percentage": 2.0, "type": "compressive"}
        assert os.path.exists(payload["slab_file"])
        from catscreen.crystal import parse_cif
        with open(payload["slab_file"]) as fh:
            slab_structure = parse_cif(fh.read())
        assert len(slab_structure) == payload["n_atoms"]
        assert all(n >= 8.0 - 1e-9 for n in payload["in_plane_norms"])

    def test_doping_applied(self, tmp_path):
        context = ServerContext(output_dir=str(tmp_path / "out"), cif_dir=data_path("cif"))
        out = run_server("structure_modification", context, [
            call(1, "create_and_serialize_slab",
                 {"cif_path": "Cu.cif", "hkl": "[0,0,1]", "doping": "Cu->Ni"}),
        ])
        payload = payload_of(out[0])
        record = payload["modifications_applied"]["doping"]
        assert record["from"] == "Cu" and record["to"] == "Ni"

    def test_provider_xor_cif_path(self, tmp_path):
        context = ServerContext(output_dir=str(tmp_path), cif_dir=data_path("cif"))
        out = run_server("structure_modification", context, [
            call(1, "create_and_serialize_slab",
                 {"cif_path": "Cu.cif", "provider": "mp", "identifier": "mp-1",
                  "hkl": "[0,0,1]"}),
        ])
        assert out[0]["error"]["code"] == -32602

    def test_tool_failure_returns_error_content_not_death(self, tmp_path):
        context = ServerContext(output_dir=str(tmp_path), cif_dir=data_path("cif"))
        out = run_server("structure_modification", context, [
            call(1, "create_and_serialize_slab",
                 {"cif_path": "Cu.cif", "hkl": "[0,0,1]", "doping": "Pt->Fe"}),
            rpc(2, "tools/list"),
        ])
        assert out[0]["result"]["isError"] is True
        body = json.loads(out[0]["result"]["content"][0]["text"])
        assert "ElementNotInTopLayer" in body["error"]
        assert "result" in out[1]


class TestCandidateInfo:
    def test_candidate_list(self, tmp_path):
        context = ServerContext(
            output_dir=str(tmp_path),
            candidates_file=data_path("candidates", "candidates.json"),
        )
        out = run_server("candidate_info", context, [call(1, "candidate_list", {"task": "ORR"})])
        payload = payload_of(out[0])
        assert payload["task"] == "ORR"
        assert "CoGa2O4" in payload["materials"]

    def test_unknown_task(self, tmp_path):
        context = ServerContext(
            output_dir=str(tmp_path),
            candidates_file=data_path("candidates", "candidates.json"),
        )
        out = run_server("candidate_info", context, [call(1, "candidate_list", {"task": "OER"})])
        assert out[0]["error"]["code"] == -32602


class TestSchemas:
    def test_documented_examples_validate(self, golden_calls):
        for number, golden in golden_calls.items():
            tool = golden["tool"]
            canonical = "adsorbml_evaluate" if tool == "adsorbml_analysis" else tool
            validate_schema(TOOL_SCHEMAS[canonical], golden["arguments"])

    def test_wrong_type_rejected(self):
        with pytest.raises(ArgumentValidation):
            validate_schema(TOOL_SCHEMAS["optimade_structure_search"],
                            {"elements": "CoAlO", "nelements": 3})

    def test_all_server_kinds_constructible(self, tmp_path):
        for kind in SERVER_KINDS:
            McpServer(kind, ServerContext(output_dir=str(tmp_path)))
