"""Oriented surface slabs: Miller-index cuts, adaptive tiling, vacuum, tags.

The cut algorithm completes the (h, k, l) plane to an integer basis with
determinant +1 via extended gcd, so the rebased cell contains exactly the
bulk atoms. The slab frame puts the surface normal along +z with a in the
x-direction, then replaces c by a pure-z vector of height span + vacuum;
the vacuum gap fully decouples periodic images along c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crystal import Lattice, Structure, wrap_frac
from .errors import DegenerateCut, TilingFailed

MAX_TILING = 32

LOW_INDEX_MIN_AB = 8.0
HIGH_INDEX_MIN_AB = 6.0

FROZEN = "frozen"
FREE_SURFACE = "free-surface"


@dataclass(frozen=True)
class MillerIndex:
    h: int
    k: int
    l: int

    def __post_init__(self):
        trip = (self.h, self.k, self.l)
        if trip == (0, 0, 0):
            raise ValueError("Miller index (0,0,0) is undefined")
        if any(not isinstance(x, int) for x in trip):
            raise ValueError(f"Miller indices must be integers, got {trip}")
        g = math.gcd(math.gcd(abs(self.h), abs(self.k)), abs(self.l))
        if g > 1:
            object.__setattr__(self, "h", self.h // g)
            object.__setattr__(self, "k", self.k // g)
            object.__setattr__(self, "l", self.l // g)
        if max(abs(self.h), abs(self.k), abs(self.l)) > 9:
            raise ValueError(f"Miller index {trip} exceeds the supported |index| <= 9 range")

    @classmethod
    def parse(cls, value):
        """Accept (h,k,l) tuples, lists, or strings like '[1,0,0]' / '1,0,0'."""
        if isinstance(value, MillerIndex):
            return value
        if isinstance(value, str):
            cleaned = value.strip().strip("[]()")
            parts = [p for p in cleaned.replace(",", " ").split() if p]
            value = [int(p) for p in parts]
        trip = tuple(int(x) for x in value)
        if len(trip) != 3:
            raise ValueError(f"Miller index needs 3 integers, got {value!r}")
        return cls(*trip)

    def as_tuple(self):
        return (self.h, self.k, self.l)

    def key(self):
        return f"({self.h},{self.k},{self.l})"


def adaptive_min_ab(hkl):
    """Minimum in-plane cell edge: 8.0 A for low-index cuts, 6.0 A otherwise."""
    hkl = MillerIndex.parse(hkl)
    return LOW_INDEX_MIN_AB if max(abs(hkl.h), abs(hkl.k), abs(hkl.l)) <= 3 else HIGH_INDEX_MIN_AB


@dataclass(frozen=True)
class SlabSpec:
    hkl: MillerIndex
    min_ab: float | None = None
    min_thickness: float = 8.0
    vacuum: float = 15.0
    frozen_fraction: float = 0.5
    layer_tol: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "hkl", MillerIndex.parse(self.hkl))
        if self.min_ab is None:
            object.__setattr__(self, "min_ab", adaptive_min_ab(self.hkl))
        if self.min_ab <= 0:
            raise ValueError("min_ab must be positive")
        if self.vacuum < 0:
            raise ValueError("vacuum must be non-negative")
        if not 0.0 <= self.frozen_fraction <= 1.0:
            raise ValueError("frozen_fraction must lie in [0, 1]")

    def to_dict(self):
        return {
            "hkl": list(self.hkl.as_tuple()),
            "min_ab": self.min_ab,
            "min_thickness": self.min_thickness,
            "vacuum": self.vacuum,
            "frozen_fraction": self.frozen_fraction,
            "layer_tol": self.layer_tol,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            hkl=MillerIndex.parse(d["hkl"]),
            min_ab=d.get("min_ab"),
            min_thickness=d.get("min_thickness", 8.0),
            vacuum=d.get("vacuum", 15.0),
            frozen_fraction=d.get("frozen_fraction", 0.5),
            layer_tol=d.get("layer_tol", 0.5),
        )


@dataclass(frozen=True)
class Slab:
    structure: Structure
    spec: SlabSpec
    tags: tuple
    modifications: object = None  # ModificationRecord, set by surfmod

    def __len__(self):
        return len(self.structure)

    def z_coords(self):
        return self.structure.cart_coords()[:, 2]

    def free_indices(self):
        return [i for i, t in enumerate(self.tags) if t == FREE_SURFACE]

    def frozen_indices(self):
        return [i for i, t in enumerate(self.tags) if t == FROZEN]

    def with_structure(self, structure, modifications=None):
        mods = modifications if modifications is not None else self.modifications
        return Slab(structure=structure, spec=self.spec, tags=self.tags, modifications=mods)

    def to_dict(self):
        return {
            "structure": self.structure.to_dict(),
            "spec": self.spec.to_dict(),
            "tags": list(self.tags),
            "modifications": self.modifications.to_dict() if self.modifications else None,
        }

    @classmethod
    def from_dict(cls, d):
        from .surfmod import ModificationRecord

        mods = d.get("modifications")
        return cls(
            structure=Structure.from_dict(d["structure"]),
            spec=SlabSpec.from_dict(d["spec"]),
            tags=tuple(d["tags"]),
            modifications=ModificationRecord.from_dict(mods) if mods else None,
        )


def _ext_gcd(a, b):
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    if b == 0:
        return abs(a), (1 if a >= 0 else -1), 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _plane_basis(hkl):
    """Integer rows (v1, v2, v3), det +1, with v1,v2 in the hkl plane and
    v3 crossing exactly one plane spacing."""
    h, k, l = hkl.as_tuple()
    if k == 0 and l == 0:
        # h is +-1 after gcd reduction
        return np.array([[0, 1, 0], [0, 0, 1], [h, 0, 0]], dtype=int)
    g1, p, q = _ext_gcd(k, l)
    _, r, s = _ext_gcd(h, g1)
    v1 = np.array([0, l // g1, -k // g1], dtype=int)
    v2 = np.array([-g1, p * h, q * h], dtype=int)
    v3 = np.array([r, s * p, s * q], dtype=int)
    m = np.array([v1, v2, v3], dtype=int)
    det = int(round(np.linalg.det(m)))
    if det == -1:
        m[0] = -m[0]
        det = 1
    if det != 1:
        raise DegenerateCut(f"failed to complete a unimodular basis for {hkl.as_tuple()}")
    return m


def _reduce_in_plane(m, bulk_rows):
    """Lagrange-reduce the two in-plane integer vectors in the bulk metric."""
    v1, v2 = m[0].astype(int), m[1].astype(int)

    def norm(v):
        return float(np.linalg.norm(v @ bulk_rows))

    for _ in range(64):
        if norm(v1) > norm(v2):
            v1, v2 = v2, v1
        n1 = norm(v1)
        if n1 == 0:
            raise DegenerateCut("degenerate in-plane vector")
        t = round(float(np.dot(v2 @ bulk_rows, v1 @ bulk_rows)) / (n1 * n1))
        if t == 0:
            break
        v2 = v2 - t * v1
    out = np.array([v1, v2, m[2]], dtype=int)
    if int(round(np.linalg.det(out))) < 0:
        out[1] = -out[1]
    return out


def _rotate_standard(rows):
    """Rotate cell rows so a is along +x and b lies in the xy-plane (c_z > 0)."""
    a, b, c = rows
    ex = a / np.linalg.norm(a)
    ez = np.cross(a, b)
    ez = ez / np.linalg.norm(ez)
    ey = np.cross(ez, ex)
    rot = np.array([ex, ey, ez]).T
    out = rows @ rot
    # scrub numeric dust in the structurally-zero entries
    out[0, 1] = out[0, 2] = out[1, 2] = 0.0
    if out[2, 2] < 0:
        raise DegenerateCut("left-handed cell after rotation")
    return out


def build_slab(bulk, spec):
    """Cut, tile, vacuum-pad, and tag a slab for the requested Miller index."""
    hkl = spec.hkl
    m = _plane_basis(hkl)
    m = _reduce_in_plane(m, bulk.lattice.rows)

    rebased_rows = m.astype(float) @ bulk.lattice.rows
    inv_m = np.linalg.inv(m.astype(float))
    rebased_frac = wrap_frac(bulk.frac_coords @ inv_m)
    rebased = Structure(Lattice(rebased_rows), bulk.species, rebased_frac, bulk.metadata)

    a_len = float(np.linalg.norm(rebased_rows[0]))
    b_len = float(np.linalg.norm(rebased_rows[1]))
    area = float(np.linalg.norm(np.cross(rebased_rows[0], rebased_rows[1])))
    if area < 1e-9:
        raise DegenerateCut("in-plane vectors are collinear")
    layer_height = abs(float(np.linalg.det(rebased_rows))) / area

    eps = 1e-9
    n_a = max(1, math.ceil((spec.min_ab - eps) / a_len))
    n_b = max(1, math.ceil((spec.min_ab - eps) / b_len))
    n_c = max(1, math.ceil((spec.min_thickness - eps) / layer_height))
    if n_a > MAX_TILING or n_b > MAX_TILING or n_c > MAX_TILING:
        raise TilingFailed(
            f"slab tiling for {hkl.as_tuple()} needs multipliers ({n_a}, {n_b}, {n_c}) "
            f"beyond the cap {MAX_TILING}",
            debug={
                "hkl": list(hkl.as_tuple()),
                "attempted_multipliers": [n_a, n_b, n_c],
                "achieved_norms": [a_len * min(n_a, MAX_TILING), b_len * min(n_b, MAX_TILING)],
                "cell_norms": [a_len, b_len],
                "layer_height": layer_height,
                "min_ab": spec.min_ab,
                "min_thickness": spec.min_thickness,
            },
        )

    tiled = rebased
    if (n_a, n_b, n_c) != (1, 1, 1):
        from .crystal import make_supercell

        tiled = make_supercell(rebased, (n_a, n_b, n_c))

    rot_rows = _rotate_standard(tiled.lattice.rows.copy())
    cart = tiled.frac_coords @ rot_rows
    z = cart[:, 2]
    z_min, z_max = float(z.min()), float(z.max())
    span = z_max - z_min
    cart[:, 2] -= z_min

    c_height = span + spec.vacuum
    if c_height <= 0:
        raise DegenerateCut("zero-height slab cell")
    slab_rows = np.array([rot_rows[0], rot_rows[1], [0.0, 0.0, c_height]])
    lattice = Lattice(slab_rows)
    frac = cart @ lattice.inverse()
    structure = Structure(lattice, tiled.species, frac, bulk.metadata)

    new_z = structure.cart_coords()[:, 2]
    z_lo, z_hi = float(new_z.min()), float(new_z.max())
    cutoff = z_lo + spec.frozen_fraction * (z_hi - z_lo)
    tags = tuple(FROZEN if zz < cutoff - 1e-9 else FREE_SURFACE for zz in new_z)

    return Slab(structure=structure, spec=spec, tags=tags, modifications=None)


def top_layer_sites(slab, layer_tol=None):
    """Indices of sites within layer_tol of the highest z, top-first."""
    tol = slab.spec.layer_tol if layer_tol is None else layer_tol
    z = slab.z_coords()
    z_max = float(z.max())
    picks = [i for i in range(len(slab)) if z[i] >= z_max - tol]
    picks.sort(key=lambda i: (-z[i], i))
    return picks
