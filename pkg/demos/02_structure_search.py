"""Federated structure retrieval with the recorded Co-Al-O fixture.

The search hits every configured provider, skips anything malformed, and
writes two files: results.json (full structures) and results_short.json
(the compact summary meant for quick perusal). Live HTTP works the same
way with UrllibTransport; recorded transports keep this demo hermetic.
"""

import json
import tempfile

from catscreen.data import path as data_path
from catscreen.optimade import FixtureTransport, QuerySpec, build_filter, search

spec = QuerySpec(elements=("Co", "Al", "O"), nelements=3)
print("filter:", build_filter(spec.elements, spec.nelements))

transport = FixtureTransport.from_file(data_path("golden", "optimade_responses.json"))
with tempfile.TemporaryDirectory() as out:
    result = search(spec, transport, output_dir=out, cache_dir=f"{out}/cache")
    print(result.message)
    print("per-provider counts:", result.provider_counts)
    print("files saved:", result.files_saved)

    print("\nfirst five summaries:")
    for summary in result.summaries[:5]:
        print(f"  {summary.provider:5s} {str(summary.identifier):12s} "
              f"{summary.formula:12s} {summary.spacegroup}")

    with open(f"{out}/results_short.json") as fh:
        short = json.load(fh)
    print(f"\nresults_short.json holds {len(short)} entries, e.g. {short[2]}")
