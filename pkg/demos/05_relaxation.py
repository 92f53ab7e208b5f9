"""The analytic surrogate and the LBFGS relaxer.

The surrogate is a Morse-form pair potential with exact analytic forces;
its default parameters come from covalent radii and are deliberately not
chemistry. A dimer started off its minimum relaxes back to the known bond
length; frozen atoms never move.
"""

import numpy as np

from catscreen.crystal import Structure
from catscreen.energetics import MorseSurrogate, RelaxSettings, SurrogateParams, evaluate, relax

calc = MorseSurrogate(SurrogateParams(pairs={("Cu", "Cu"): (1.0, 1.0, 2.5)}))

print("pair scan (Cu-Cu well: depth 1 eV at 2.5 A):")
for r in (2.0, 2.5, 3.0, 4.0, 5.9):
    dimer = Structure(np.eye(3) * 30, ["Cu", "Cu"],
                      [[0.4, 0.5, 0.5], [0.4 + r / 30, 0.5, 0.5]])
    ef = evaluate(dimer, calc)
    print(f"  r = {r:.1f} A  E = {ef.energy:+.6f} eV  |F| = {np.abs(ef.forces).max():.4f} eV/A")

start = 3.4
dimer = Structure(np.eye(3) * 30, ["Cu", "Cu"],
                  [[0.4, 0.5, 0.5], [0.4 + start / 30, 0.5, 0.5]])
relaxed, converged, steps, energy = relax(dimer, calc, RelaxSettings(fmax=0.05))
cart = relaxed.cart_coords()
bond = float(np.linalg.norm(cart[1] - cart[0]))
print(f"\nrelax from {start} A: converged={converged} in {steps} steps, "
      f"bond = {bond:.6f} A, E = {energy:.6f} eV")

pinned, converged, steps, _ = relax(dimer, calc, frozen={0, 1})
print(f"with both atoms frozen: converged={converged} after {steps} steps, "
      f"positions untouched: {np.array_equal(pinned.cart_coords(), dimer.cart_coords())}")

print("\nforce-consistency spot check (central differences, h = 1e-4):")
ef = evaluate(dimer, calc)
h = 1e-4
pos = dimer.cart_coords()
plus, minus = pos.copy(), pos.copy()
plus[1, 0] += h
minus[1, 0] -= h
fd = -(calc.evaluate(dimer.lattice.rows, list(dimer.species), plus).energy
       - calc.evaluate(dimer.lattice.rows, list(dimer.species), minus).energy) / (2 * h)
print(f"  analytic {ef.forces[1, 0]:+.8f}  finite-difference {fd:+.8f}")
