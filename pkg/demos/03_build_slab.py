"""Cut oriented slabs for several Miller indices from one bulk cell.

The lateral size threshold adapts to the cut: 8.0 A for low-index facets
(all indices at most 3 in magnitude), 6.0 A otherwise. Tiling, vacuum
padding, and frozen/free tagging happen in one deterministic pass.
"""

import numpy as np

from catscreen.crystal import parse_cif
from catscreen.data import path as data_path
from catscreen.slab import SlabSpec, adaptive_min_ab, build_slab, top_layer_sites

with open(data_path("cif", "Cu.cif")) as fh:
    bulk = parse_cif(fh.read())
print(f"bulk: {bulk.reduced_formula()}, {len(bulk)} sites, "
      f"a = {bulk.lattice.lengths()[0]} A")

for hkl in [(0, 0, 1), (1, 1, 1), (2, 1, 0), (4, 1, 1)]:
    spec = SlabSpec(hkl=hkl)
    slab = build_slab(bulk, spec)
    rows = slab.structure.lattice.rows
    z = slab.z_coords()
    print(f"\n({hkl[0]},{hkl[1]},{hkl[2]}): min_ab={adaptive_min_ab(hkl)} A")
    print(f"  atoms: {len(slab)}  in-plane norms: "
          f"{np.linalg.norm(rows[0]):.2f} x {np.linalg.norm(rows[1]):.2f} A")
    print(f"  slab span: {z.max() - z.min():.2f} A, "
          f"vacuum gap: {rows[2, 2] - (z.max() - z.min()):.2f} A")
    print(f"  frozen/free: {len(slab.frozen_indices())}/{len(slab.free_indices())}")
    print(f"  top-layer sites (tol {spec.layer_tol} A): {top_layer_sites(slab)[:6]} ...")
