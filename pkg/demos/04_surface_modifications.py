"""The two surface modification operators and their traceability records.

In-plane strain scales the a and b rows by (1 - strain): positive values
compress, negative stretch, and the vacuum direction never changes.
Substitution replaces exactly one atom in the topmost layer. Both leave a
record that downstream result files embed verbatim.
"""

import json

import numpy as np

from catscreen.crystal import parse_cif
from catscreen.data import path as data_path
from catscreen.slab import SlabSpec, build_slab
from catscreen.surfmod import apply_strain, substitute_top_atom

with open(data_path("cif", "Pb3Y.cif")) as fh:
    bulk = parse_cif(fh.read())
slab = build_slab(bulk, SlabSpec(hkl=(0, 0, 1)))

a0 = np.linalg.norm(slab.structure.lattice.rows[0])
print(f"pristine slab: a = {a0:.4f} A")

compressed = apply_strain(slab, 0.02)
print(f"after +2% compressive strain: a = "
      f"{np.linalg.norm(compressed.structure.lattice.rows[0]):.4f} A")
print("record:", json.dumps(compressed.modifications.to_dict()))

stretched = apply_strain(slab, -0.02)
print(f"after 2% tensile strain: a = "
      f"{np.linalg.norm(stretched.structure.lattice.rows[0]):.4f} A")
print("record:", json.dumps(stretched.modifications.to_dict()))

doped = substitute_top_atom(compressed, "Pb", "Bi")
site = doped.modifications.doping.site_index
print(f"\nPb->Bi substitution hit site {site} "
      f"(z = {doped.z_coords()[site]:.2f} A, the topmost Pb)")
print("combined record:", json.dumps(doped.modifications.to_dict()))

counts_before = slab.structure.composition()
counts_after = doped.structure.composition()
print(f"\ncomposition: {counts_before} -> {counts_after}")
