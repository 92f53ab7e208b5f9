"""End-to-end adsorption evaluation on two facets of Cu.

For each facet: build the slab, relax it clean, generate deterministic
adsorbate placements (on-top sites first, then seeded uniform positions),
relax each, filter anomalies, and decompose the minimum into
slab / gas-reference / adslab energies. The adsorption energy is

    dE = E_adslab - E_slab - E_gas
"""

import json

from catscreen.adsorb import LiveEngine, run_adsorption_analysis
from catscreen.crystal import parse_cif
from catscreen.data import path as data_path
from catscreen.energetics import MorseSurrogate, RelaxSettings

with open(data_path("cif", "Cu.cif")) as fh:
    bulk = parse_cif(fh.read())

engine = LiveEngine(
    calculator=MorseSurrogate(),
    settings=RelaxSettings(fmax=0.1, max_steps=80),
    slab_options={"min_ab": 6.0, "min_thickness": 5.0, "vacuum": 14.0},
)
source = {
    "provider": None, "identifier": None, "cif_path": "Cu.cif",
    "structure": bulk.to_dict(), "formula": bulk.reduced_formula(),
    "spacegroup": bulk.metadata.spacegroup,
}

result = run_adsorption_analysis(
    source, "*H", ["[0,0,1]", "[1,1,0]"], engine,
    n_placements=4, seed=7,
)

for facet, block in result["results_by_hkl"].items():
    summary = block["analysis_summary"]
    print(f"facet {facet}: {summary['valid_configurations']} valid / "
          f"{summary['anomalies_detected']} anomalous of "
          f"{summary['total_configurations']} configurations")
    minimum = block["minimum_energy_results"]
    if minimum:
        print(f"  config {minimum['config_index']}: "
              f"dE = {minimum['adsorption_energy']:+.4f} eV "
              f"(adslab {minimum['adslab_energy']:.4f} "
              f"- slab {minimum['slab_energy']:.4f} "
              f"- gas {minimum['gas_reactant_energy']:.4f})")

print("\nfull result document:")
print(json.dumps(result, indent=1)[:1200], "...")
