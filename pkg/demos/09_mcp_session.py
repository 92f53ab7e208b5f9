"""Drive two MCP tool servers exactly as an agent would.

Servers speak newline-delimited JSON-RPC over stdio. This demo runs them
as child processes: the structure-retrieval server populates the results
cache from the recorded fixture, then the energy server replays the
recorded facet evaluations for mp-36447.
"""

import json
import subprocess
import sys
import tempfile

from catscreen.data import path as data_path


def rpc_session(argv, messages):
    text = "\n".join(json.dumps(m) for m in messages) + "\n"
    proc = subprocess.run(
        [sys.executable, "-m", "catscreen.cli", *argv],
        input=text.encode(), capture_output=True, timeout=120,
    )
    return [json.loads(line) for line in proc.stdout.decode().splitlines()]


with tempfile.TemporaryDirectory() as workdir:
    cache = f"{workdir}/cache"

    print("== structure_retrieval server ==")
    out = rpc_session(
        ["serve", "retrieval",
         "--fixtures", data_path("golden", "optimade_responses.json"),
         "--output", workdir, "--cache", cache],
        [
            {"jsonrpc": "2.0", "id": 1, "method": "initialize", "params": {}},
            {"jsonrpc": "2.0", "id": 2, "method": "tools/list"},
            {"jsonrpc": "2.0", "id": 3, "method": "tools/call",
             "params": {"name": "optimade_structure_search",
                        "arguments": {"elements": ["Co", "Al", "O"], "nelements": 3}}},
        ],
    )
    print("serverInfo:", out[0]["result"]["serverInfo"])
    print("tools:", [t["name"] for t in out[1]["result"]["tools"]])
    payload = json.loads(out[2]["result"]["content"][0]["text"])
    print(payload["message"], "->", payload["files_saved"])

    print("\n== energy_evaluation server (recorded engine) ==")
    out = rpc_session(
        ["serve", "energy", "--output", workdir, "--cache", cache,
         "--engine", "replay:" + data_path("golden", "facet_blocks.json")],
        [
            {"jsonrpc": "2.0", "id": 1, "method": "tools/call",
             "params": {"name": "adsorbml_evaluate",
                        "arguments": {"provider": "mp", "identifier": "mp-36447",
                                      "adsorbate": "*OH",
                                      "hkl1": "[0,0,1]", "hkl2": "[1,0,0]"}}},
        ],
    )
    notifications = [m for m in out if m.get("method") == "notifications/message"]
    print(f"{len(notifications)} status notifications streamed during the call")
    response = [m for m in out if m.get("id") == 1][0]
    payload = json.loads(response["result"]["content"][0]["text"])
    for facet, block in payload["results_by_hkl"].items():
        minimum = block["minimum_energy_results"]
        print(f"  {facet}: dE = {minimum['adsorption_energy']:+.6f} eV "
              f"({block['analysis_summary']['valid_configurations']} valid configs)")
