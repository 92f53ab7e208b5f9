"""Core geometry types: lattice, periodic structure, CIF parse/serialize.

Conventions, fixed once for bit-stable outputs:
  * lattice rows are the a, b, c vectors in angstroms (row-major);
  * cells built from (a, b, c, alpha, beta, gamma) put a along x and
    b in the xy-plane;
  * fractional coordinates are wrapped into [0, 1) at construction.

All types are immutable values after construction and safe to share
between workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import elements
from .errors import (
    IndexOutOfRange,
    MissingAtomLoop,
    MissingCellParameter,
    SingularLattice,
    UnknownElementSymbol,
    ZeroMultiplier,
)

_MIN_VECTOR_NORM = 0.1


class Lattice:
    """3x3 row matrix of lattice vectors, right-handed and non-degenerate."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = np.array(rows, dtype=float)
        if rows.shape != (3, 3):
            raise ValueError(f"lattice must be 3x3, got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("lattice contains non-finite entries")
        norms = np.linalg.norm(rows, axis=1)
        if np.any(norms <= _MIN_VECTOR_NORM):
            raise ValueError(f"lattice vector norms must exceed {_MIN_VECTOR_NORM} A, got {norms}")
        det = float(np.linalg.det(rows))
        if det <= 0.0:
            raise ValueError(f"lattice must be right-handed with positive volume, det={det:.3g}")
        rows.setflags(write=False)
        self.rows = rows

    @classmethod
    def from_parameters(cls, a, b, c, alpha, beta, gamma):
        """Build the cell matrix from lengths (A) and angles (degrees).

        Standard crystallographic frame: a along x, b in the xy-plane.
        """
        al, be, ga = (math.radians(x) for x in (alpha, beta, gamma))
        cos_al, cos_be, cos_ga = math.cos(al), math.cos(be), math.cos(ga)
        sin_ga = math.sin(ga)
        if abs(sin_ga) < 1e-12:
            raise ValueError("gamma angle degenerate")
        cx = c * cos_be
        cy = c * (cos_al - cos_be * cos_ga) / sin_ga
        cz_sq = c * c - cx * cx - cy * cy
        if cz_sq <= 0.0:
            raise ValueError("cell angles do not define a 3D cell")
        rows = [
            [a, 0.0, 0.0],
            [b * cos_ga, b * sin_ga, 0.0],
            [cx, cy, math.sqrt(cz_sq)],
        ]
        return cls(rows)

    @property
    def volume(self):
        return float(np.linalg.det(self.rows))

    def lengths(self):
        return tuple(float(x) for x in np.linalg.norm(self.rows, axis=1))

    def angles(self):
        a, b, c = self.rows
        def ang(u, v):
            cosv = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
            return math.degrees(math.acos(max(-1.0, min(1.0, cosv))))
        return (ang(b, c), ang(a, c), ang(a, b))

    def inverse(self):
        try:
            return np.linalg.inv(self.rows)
        except np.linalg.LinAlgError as exc:
            raise SingularLattice(str(exc)) from exc

    def __eq__(self, other):
        return isinstance(other, Lattice) and np.array_equal(self.rows, other.rows)

    def __repr__(self):
        la, lb, lc = self.lengths()
        return f"Lattice(a={la:.4f}, b={lb:.4f}, c={lc:.4f})"


def wrap_frac(coords):
    """Wrap fractional coordinates into [0, 1)."""
    wrapped = np.asarray(coords, dtype=float) % 1.0
    # numpy maps -1e-17 % 1.0 to 1.0 - eps ... and occasionally to 1.0 itself
    wrapped[wrapped >= 1.0] -= 1.0
    return wrapped


@dataclass(frozen=True)
class Metadata:
    provider: str | None = None
    identifier: object = None  # providers use both strings and ints
    formula: str | None = None
    spacegroup: str | None = None
    source_path: str | None = None

    def to_dict(self):
        return {
            "provider": self.provider,
            "identifier": self.identifier,
            "formula": self.formula,
            "spacegroup": self.spacegroup,
            "source_path": self.source_path,
        }

    @classmethod
    def from_dict(cls, d):
        d = d or {}
        return cls(
            provider=d.get("provider"),
            identifier=d.get("identifier"),
            formula=d.get("formula"),
            spacegroup=d.get("spacegroup"),
            source_path=d.get("source_path"),
        )


class Structure:
    """Periodic structure: lattice + species + wrapped fractional coords."""

    __slots__ = ("lattice", "species", "frac_coords", "metadata")

    def __init__(self, lattice, species, frac_coords, metadata=None):
        if not isinstance(lattice, Lattice):
            lattice = Lattice(lattice)
        species = tuple(species)
        if len(species) < 1:
            raise ValueError("structure needs at least one site")
        for sym in species:
            if not elements.is_valid_symbol(sym):
                raise UnknownElementSymbol(sym)
        coords = np.array(frac_coords, dtype=float)
        if coords.shape != (len(species), 3):
            raise ValueError(f"frac_coords shape {coords.shape} does not match {len(species)} sites")
        coords = wrap_frac(coords)
        coords.setflags(write=False)
        self.lattice = lattice
        self.species = species
        self.frac_coords = coords
        self.metadata = metadata if isinstance(metadata, Metadata) else Metadata.from_dict(metadata)

    def __len__(self):
        return len(self.species)

    def cart_coords(self):
        return self.frac_coords @ self.lattice.rows

    def composition(self):
        counts = {}
        for sym in self.species:
            counts[sym] = counts.get(sym, 0) + 1
        return counts

    def reduced_formula(self):
        return reduced_formula(self.composition())

    def with_metadata(self, **kwargs):
        base = self.metadata.to_dict()
        base.update(kwargs)
        return Structure(self.lattice, self.species, self.frac_coords, Metadata.from_dict(base))

    def to_dict(self):
        return {
            "lattice": self.lattice.rows.tolist(),
            "species": list(self.species),
            "frac_coords": self.frac_coords.tolist(),
            "metadata": self.metadata.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            Lattice(d["lattice"]),
            d["species"],
            d["frac_coords"],
            Metadata.from_dict(d.get("metadata")),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"Structure({self.reduced_formula()}, {len(self)} sites)"


@dataclass(frozen=True)
class StructureSummary:
    """Compact per-structure record mirroring one master entry."""

    provider: str
    identifier: object
    formula: str
    spacegroup: str | None = None

    def to_dict(self):
        return {
            "provider": self.provider,
            "identifier": self.identifier,
            "formula": self.formula,
            "spacegroup": self.spacegroup,
        }

    @classmethod
    def from_structure(cls, structure):
        md = structure.metadata
        return cls(
            provider=md.provider or "",
            identifier=md.identifier,
            formula=md.formula or structure.reduced_formula(),
            spacegroup=md.spacegroup,
        )


def reduced_formula(counts):
    """Alphabetical reduced formula, e.g. {Al:2, Co:1, O:4} -> 'Al2CoO4'."""
    if not counts:
        return ""
    g = 0
    for n in counts.values():
        g = math.gcd(g, n)
    parts = []
    for sym in sorted(counts):
        n = counts[sym] // g
        parts.append(sym if n == 1 else f"{sym}{n}")
    return "".join(parts)


def frac_to_cart(structure, index):
    """Cartesian position (A) of one site."""
    if not 0 <= index < len(structure):
        raise IndexOutOfRange(f"site index {index} out of range for {len(structure)} sites")
    return np.asarray(structure.frac_coords[index] @ structure.lattice.rows)


def cart_to_frac(structure, cart):
    """Fractional coordinates of a Cartesian point, unwrapped."""
    return np.asarray(cart, dtype=float) @ structure.lattice.inverse()


def make_supercell(structure, multipliers):
    """Tile a structure (nx, ny, nz) times along its lattice vectors.

    Site ordering is deterministic: images of site 0 first (x-fastest),
    then site 1, etc.
    """
    nx, ny, nz = (int(m) for m in multipliers)
    if nx < 1 or ny < 1 or nz < 1:
        raise ZeroMultiplier(f"multipliers must be >= 1, got {(nx, ny, nz)}")
    if (nx, ny, nz) == (1, 1, 1):
        return Structure(structure.lattice, structure.species, structure.frac_coords, structure.metadata)
    mult = np.array([nx, ny, nz], dtype=float)
    rows = structure.lattice.rows * mult[:, None]
    species = []
    coords = []
    for sym, frac in zip(structure.species, structure.frac_coords):
        for iz in range(nz):
            for iy in range(ny):
                for ix in range(nx):
                    species.append(sym)
                    coords.append((frac + np.array([ix, iy, iz])) / mult)
    return Structure(Lattice(rows), species, coords, structure.metadata)


def min_interatomic_distance(structure):
    """Smallest pair distance under the minimum-image convention."""
    n = len(structure)
    if n < 2:
        return math.inf
    rows = structure.lattice.rows
    frac = structure.frac_coords
    offsets = np.array([[i, j, k] for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)], dtype=float)
    best = math.inf
    for i in range(n - 1):
        d_frac = frac[i + 1:] - frac[i]
        d_frac -= np.round(d_frac)
        # search neighbor offsets: exact for reasonably compact cells
        for off in offsets:
            cart = (d_frac + off) @ rows
            dist = np.linalg.norm(cart, axis=1)
            m = float(dist.min())
            if m < best:
                best = m
    return best


# ---------------------------------------------------------------------------
# CIF subset: cell parameters, optional H-M symbol, atom-site loop.
# ---------------------------------------------------------------------------

_CELL_TAGS = (
    "_cell_length_a", "_cell_length_b", "_cell_length_c",
    "_cell_angle_alpha", "_cell_angle_beta", "_cell_angle_gamma",
)
_HM_TAGS = ("_symmetry_space_group_name_H-M", "_space_group_name_H-M_alt")


def _strip_uncertainty(token):
    # values like 3.600(2) carry a parenthesized standard uncertainty
    p = token.find("(")
    return token[:p] if p >= 0 else token


def _unquote(token):
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    return token


def _split_cif_line(line):
    """Split a CIF data line, honoring single/double quotes."""
    out = []
    cur = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
            else:
                cur.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch.isspace():
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def _symbol_from_token(token):
    # atom-site labels like 'Cu1' or 'O2a' carry trailing digits/letters
    sym = ""
    for ch in token:
        if ch.isalpha():
            sym += ch
            if len(sym) == 2:
                break
        else:
            break
    for cand in (sym[:2].capitalize(), sym[:1].capitalize()):
        if cand and elements.is_valid_symbol(cand):
            return cand
    return None


def parse_cif(text):
    """Parse one CIF data block into a Structure.

    Supports the project subset: cell lengths/angles, the optional H-M
    space-group tag, and an atom-site loop carrying an element symbol (or
    label) plus fractional x, y, z.
    """
    scalars = {}
    spacegroup = None
    loops = []

    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        line = raw.strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        lower = line.lower()
        if lower.startswith("data_"):
            continue
        if lower == "loop_":
            headers = []
            while i < len(lines) and lines[i].strip().startswith("_"):
                headers.append(lines[i].strip().split()[0])
                i += 1
            body = []
            while i < len(lines):
                row = lines[i].strip()
                if not row or row.startswith(("_", "#")) or row.lower().startswith(("loop_", "data_")):
                    break
                body.append((i + 1, _split_cif_line(row)))
                i += 1
            loops.append((headers, body))
            continue
        if line.startswith("_"):
            parts = _split_cif_line(line)
            tag = parts[0]
            value = parts[1] if len(parts) > 1 else ""
            if tag in _CELL_TAGS:
                try:
                    scalars[tag] = float(_strip_uncertainty(value))
                except ValueError as exc:
                    raise MissingCellParameter(tag) from exc
            elif tag in _HM_TAGS:
                spacegroup = _unquote(value) or None

    for tag in _CELL_TAGS:
        if tag not in scalars:
            raise MissingCellParameter(tag)

    lattice = Lattice.from_parameters(
        scalars["_cell_length_a"], scalars["_cell_length_b"], scalars["_cell_length_c"],
        scalars["_cell_angle_alpha"], scalars["_cell_angle_beta"], scalars["_cell_angle_gamma"],
    )

    atom_loop = None
    for headers, body in loops:
        lower_headers = [h.lower() for h in headers]
        if any(h.startswith("_atom_site_fract") for h in lower_headers):
            atom_loop = (headers, lower_headers, body)
            break
    if atom_loop is None:
        raise MissingAtomLoop("CIF has no atom-site loop with fractional coordinates")

    headers, lower_headers, body = atom_loop

    def col(*names):
        for name in names:
            if name in lower_headers:
                return lower_headers.index(name)
        return None

    sym_col = col("_atom_site_type_symbol")
    label_col = col("_atom_site_label")
    x_col = col("_atom_site_fract_x")
    y_col = col("_atom_site_fract_y")
    z_col = col("_atom_site_fract_z")
    if x_col is None or y_col is None or z_col is None:
        raise MissingAtomLoop("atom-site loop lacks fractional x/y/z columns")

    species = []
    coords = []
    for lineno, row in body:
        if len(row) < len(headers):
            raise MissingAtomLoop(f"atom-site row at line {lineno} has {len(row)} fields, expected {len(headers)}")
        token = row[sym_col] if sym_col is not None else row[label_col]
        sym = _symbol_from_token(token)
        if sym is None:
            raise UnknownElementSymbol(token, where=f"line {lineno}")
        species.append(sym)
        coords.append([float(_strip_uncertainty(row[c])) for c in (x_col, y_col, z_col)])

    metadata = Metadata(spacegroup=spacegroup)
    return Structure(lattice, species, coords, metadata)


def serialize_cif(structure, data_name="structure"):
    """Emit exactly the CIF subset this project reads back."""
    a, b, c = structure.lattice.lengths()
    alpha, beta, gamma = structure.lattice.angles()
    out = [f"data_{data_name}"]
    out.append(f"_cell_length_a    {a:.10f}")
    out.append(f"_cell_length_b    {b:.10f}")
    out.append(f"_cell_length_c    {c:.10f}")
    out.append(f"_cell_angle_alpha {alpha:.10f}")
    out.append(f"_cell_angle_beta  {beta:.10f}")
    out.append(f"_cell_angle_gamma {gamma:.10f}")
    if structure.metadata.spacegroup:
        out.append(f"_symmetry_space_group_name_H-M '{structure.metadata.spacegroup}'")
    out.append("loop_")
    out.append("_atom_site_type_symbol")
    out.append("_atom_site_fract_x")
    out.append("_atom_site_fract_y")
    out.append("_atom_site_fract_z")
    for sym, frac in zip(structure.species, structure.frac_coords):
        out.append(f"{sym} {frac[0]:.10f} {frac[1]:.10f} {frac[2]:.10f}")
    return "\n".join(out) + "\n"
