"""Surface modification operators: in-plane strain and top-layer substitution.

Both operators are pure: they return a new Slab carrying an updated
ModificationRecord and never touch site ordering. Strain scales only the
a and b rows by (1 - strain), positive values compressive; substitution
replaces exactly one atom in the topmost layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elements
from .crystal import Lattice, Structure
from .errors import ElementNotInTopLayer, InvalidElement, StrainOutOfRange
from .slab import Slab, top_layer_sites

MAX_STRAIN = 0.5


@dataclass(frozen=True)
class StrainRecord:
    value: float

    @property
    def percentage(self):
        return 100.0 * abs(self.value)

    @property
    def type(self):
        return "compressive" if self.value > 0 else "tensile"

    def to_dict(self):
        return {"value": self.value, "percentage": self.percentage, "type": self.type}


@dataclass(frozen=True)
class DopingRecord:
    from_element: str | None
    to_element: str
    site_index: int

    def to_dict(self):
        return {"from": self.from_element, "to": self.to_element, "site_index": self.site_index}


@dataclass(frozen=True)
class ModificationRecord:
    strain: StrainRecord | None = None
    doping: DopingRecord | None = None

    def to_dict(self):
        """JSON form used in results files; absent parts are omitted."""
        out = {}
        if self.strain is not None:
            out["strain"] = self.strain.to_dict()
        if self.doping is not None:
            out["doping"] = self.doping.to_dict()
        return out or None

    @classmethod
    def from_dict(cls, d):
        if not d:
            return None
        strain = d.get("strain")
        doping = d.get("doping")
        return cls(
            strain=StrainRecord(value=strain["value"]) if strain else None,
            doping=DopingRecord(
                from_element=doping.get("from"),
                to_element=doping["to"],
                site_index=doping.get("site_index", -1),
            ) if doping else None,
        )


def apply_strain(slab, strain):
    """Scale the in-plane lattice vectors by (1 - strain); c is untouched."""
    if not np.isfinite(strain) or abs(strain) >= MAX_STRAIN:
        raise StrainOutOfRange(f"strain magnitude must be below {MAX_STRAIN}, got {strain}")
    rows = slab.structure.lattice.rows.copy()
    factor = 1.0 - strain
    rows[0] *= factor
    rows[1] *= factor
    structure = Structure(
        Lattice(rows),
        slab.structure.species,
        slab.structure.frac_coords,
        slab.structure.metadata,
    )
    prev = slab.modifications
    record = ModificationRecord(
        strain=StrainRecord(value=float(strain)),
        doping=prev.doping if prev else None,
    )
    return slab.with_structure(structure, modifications=record)


def substitute_top_atom(slab, from_element, to_element):
    """Replace one atom in the topmost layer (highest z wins, ties by index)."""
    if not elements.is_valid_symbol(to_element):
        raise InvalidElement(f"unknown element {to_element!r}")
    if from_element is not None and not elements.is_valid_symbol(from_element):
        raise InvalidElement(f"unknown element {from_element!r}")

    candidates = top_layer_sites(slab)
    if from_element is not None:
        candidates = [i for i in candidates if slab.structure.species[i] == from_element]
        if not candidates:
            raise ElementNotInTopLayer(
                f"no {from_element} site within {slab.spec.layer_tol} A of the top layer"
            )
    # top_layer_sites already orders by z descending then index ascending
    site = candidates[0]

    species = list(slab.structure.species)
    species[site] = to_element
    structure = Structure(
        slab.structure.lattice,
        species,
        slab.structure.frac_coords,
        slab.structure.metadata,
    )
    prev = slab.modifications
    record = ModificationRecord(
        strain=prev.strain if prev else None,
        doping=DopingRecord(from_element=from_element, to_element=to_element, site_index=site),
    )
    return slab.with_structure(structure, modifications=record)


def parse_doping_spec(spec):
    """Parse 'From->To' (or '->To') into a (from, to) pair."""
    if "->" not in spec:
        raise InvalidElement(f"doping spec must look like 'From->To', got {spec!r}")
    left, right = (part.strip() for part in spec.split("->", 1))
    from_element = left or None
    if not right:
        raise InvalidElement(f"doping spec {spec!r} lacks a target element")
    return from_element, right
