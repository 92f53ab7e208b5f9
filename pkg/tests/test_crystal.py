import math

import numpy as np
import pytest

from catscreen.crystal import (
    Lattice,
    Structure,
    frac_to_cart,
    cart_to_frac,
    make_supercell,
    min_interatomic_distance,
    parse_cif,
    reduced_formula,
    serialize_cif,
)
from catscreen.errors import (
    IndexOutOfRange,
    MissingAtomLoop,
    MissingCellParameter,
    UnknownElementSymbol,
    ZeroMultiplier,
)

CUBIC_CU_CIF = """data_cu
_cell_length_a 3.6
_cell_length_b 3.6
_cell_length_c 3.6
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
Cu 0.0 0.0 0.0
"""


def triclinic_matrix(a, b, c, alpha, beta, gamma):
    """Independent trigonometric construction of the cell matrix."""
    al, be, ga = map(math.radians, (alpha, beta, gamma))
    ax = a
    bx, by = b * math.cos(ga), b * math.sin(ga)
    cx = c * math.cos(be)
    cy = c * (math.cos(al) - math.cos(be) * math.cos(ga)) / math.sin(ga)
    cz = math.sqrt(c * c - cx * cx - cy * cy)
    return np.array([[ax, 0, 0], [bx, by, 0], [cx, cy, cz]])


class TestLattice:
    def test_rejects_left_handed(self):
        with pytest.raises(ValueError):
            Lattice([[1, 0, 0], [0, 0, 1], [0, 1, 0]])

    def test_rejects_tiny_vectors(self):
        with pytest.raises(ValueError):
            Lattice(np.eye(3) * 0.05)

    def test_parameter_roundtrip(self):
        lat = Lattice.from_parameters(3, 4, 5, 80, 85, 95)
        assert np.allclose(lat.lengths(), (3, 4, 5), atol=1e-12)
        assert np.allclose(lat.angles(), (80, 85, 95), atol=1e-10)


class TestParseCif:
    def test_cubic_cu(self):
        s = parse_cif(CUBIC_CU_CIF)
        assert len(s) == 1
        assert s.species == ("Cu",)
        assert np.allclose(s.lattice.rows, np.diag([3.6, 3.6, 3.6]))

    def test_spacegroup_tag_passthrough(self):
        text = CUBIC_CU_CIF.replace(
            "loop_", "_symmetry_space_group_name_H-M 'Fm-3m'\nloop_"
        )
        s = parse_cif(text)
        assert s.metadata.spacegroup == "Fm-3m"

    def test_spacegroup_absent_is_none(self):
        assert parse_cif(CUBIC_CU_CIF).metadata.spacegroup is None

    def test_triclinic_matches_oracle(self):
        params = (3, 4, 5, 80, 85, 95)
        text = f"""data_x
_cell_length_a {params[0]}
_cell_length_b {params[1]}
_cell_length_c {params[2]}
_cell_angle_alpha {params[3]}
_cell_angle_beta {params[4]}
_cell_angle_gamma {params[5]}
loop_
_atom_site_type_symbol
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
Si 0.1 0.2 0.3
"""
        s = parse_cif(text)
        assert np.allclose(s.lattice.rows, triclinic_matrix(*params), atol=1e-10)

    def test_missing_cell_parameter(self):
        broken = CUBIC_CU_CIF.replace("_cell_length_b 3.6\n", "")
        with pytest.raises(MissingCellParameter) as err:
            parse_cif(broken)
        assert "_cell_length_b" in str(err.value)

    def test_missing_atom_loop(self):
        header_only = CUBIC_CU_CIF.split("loop_")[0]
        with pytest.raises(MissingAtomLoop):
            parse_cif(header_only)

    def test_unknown_element(self):
        broken = CUBIC_CU_CIF.replace("Cu 0.0", "Qq 0.0")
        with pytest.raises(UnknownElementSymbol) as err:
            parse_cif(broken)
        assert "Qq" in str(err.value)

    def test_label_column_and_uncertainties(self):
        text = """data_x
_cell_length_a 3.600(2)
_cell_length_b 3.6
_cell_length_c 3.6
_cell_angle_alpha 90
_cell_angle_beta 90
_cell_angle_gamma 90
loop_
_atom_site_label
_atom_site_fract_x
_atom_site_fract_y
_atom_site_fract_z
Cu1 0.00(1) 0.0 0.0
O2 0.5 0.5 0.5
"""
        s = parse_cif(text)
        assert s.species == ("Cu", "O")


class TestSerializeRoundtrip:
    def test_roundtrip_up_to_tolerance(self):
        rng = np.random.default_rng(3)
        lat = Lattice.from_parameters(4.1, 5.2, 6.3, 75, 88, 103)
        s = Structure(lat, ["Fe", "O", "O"], rng.random((3, 3)),
                      {"spacegroup": "Pnma"})
        s2 = parse_cif(serialize_cif(s))
        assert s2.species == s.species
        assert np.allclose(s2.frac_coords, s.frac_coords, atol=1e-6)
        assert np.allclose(s2.lattice.rows, s.lattice.rows, atol=1e-6)
        assert s2.metadata.spacegroup == "Pnma"


class TestFracCart:
    def test_origin(self, cu_bulk):
        assert np.allclose(frac_to_cart(cu_bulk, 0), [0, 0, 0])

    def test_diagonal_cell(self):
        s = Structure(np.eye(3) * 4, ["Cu"], [[0.5, 0.5, 0.5]])
        assert np.allclose(frac_to_cart(s, 0), [2, 2, 2])

    def test_matches_hand_multiply(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            rows = np.diag([3, 4, 5]) + rng.uniform(-0.5, 0.5, (3, 3))
            if np.linalg.det(rows) <= 0.5:
                continue
            frac = rng.random(3)
            s = Structure(rows, ["Cu"], [frac])
            expected = np.array([
                sum(s.frac_coords[0][k] * rows[k][j] for k in range(3))
                for j in range(3)
            ])
            assert np.allclose(frac_to_cart(s, 0), expected, atol=1e-12)

    def test_cart_frac_roundtrip(self):
        rng = np.random.default_rng(5)
        rows = np.diag([3.1, 4.7, 6.3]) + rng.uniform(-0.8, 0.8, (3, 3))
        if np.linalg.det(rows) < 0:
            rows[[0, 1]] = rows[[1, 0]]
        s = Structure(rows, ["Cu", "O"], rng.random((2, 3)))
        for i in range(2):
            back = cart_to_frac(s, frac_to_cart(s, i))
            assert np.allclose(back, s.frac_coords[i], atol=1e-10)

    def test_index_out_of_range(self, cu_bulk):
        with pytest.raises(IndexOutOfRange):
            frac_to_cart(cu_bulk, 3)


class TestSupercell:
    def test_identity(self, cu_bulk):
        s = make_supercell(cu_bulk, (1, 1, 1))
        assert len(s) == 1
        assert np.allclose(s.lattice.rows, cu_bulk.lattice.rows)

    def test_2x2x1(self, cu_bulk):
        s = make_supercell(cu_bulk, (2, 2, 1))
        assert len(s) == 4
        assert np.isclose(np.linalg.norm(s.lattice.rows[0]), 7.2)

    def test_image_enumeration_oracle(self):
        base = Structure(np.eye(3) * 3.0, ["Na", "Cl"], [[0, 0, 0], [0.5, 0.5, 0.5]])
        s = make_supercell(base, (3, 2, 2))
        assert len(s) == 2 * 3 * 2 * 2 == 24
        counts = s.composition()
        assert counts == {"Na": 12, "Cl": 12}
        # oracle: explicit image enumeration
        images = {
            (sym, round(fx, 9), round(fy, 9), round(fz, 9))
            for sym, frac in zip(base.species, base.frac_coords)
            for ix in range(3) for iy in range(2) for iz in range(2)
            for fx, fy, fz in [((frac[0] + ix) / 3, (frac[1] + iy) / 2, (frac[2] + iz) / 2)]
        }
        got = {
            (sym, round(f[0], 9), round(f[1], 9), round(f[2], 9))
            for sym, f in zip(s.species, s.frac_coords)
        }
        assert got == images

    def test_density_preserved(self, fcc_cu_bulk):
        s = make_supercell(fcc_cu_bulk, (2, 3, 1))
        d0 = len(fcc_cu_bulk) / fcc_cu_bulk.lattice.volume
        d1 = len(s) / s.lattice.volume
        assert abs(d1 / d0 - 1) < 1e-9

    def test_zero_multiplier(self, cu_bulk):
        with pytest.raises(ZeroMultiplier):
            make_supercell(cu_bulk, (0, 1, 1))


def test_reduced_formula():
    assert reduced_formula({"Al": 4, "Co": 2, "O": 8}) == "Al2CoO4"
    assert reduced_formula({"Cu": 4}) == "Cu"
    assert reduced_formula({"O": 2, "H": 2}) == "HO"


def test_min_interatomic_distance(fcc_cu_bulk):
    # fcc nearest neighbor: a / sqrt(2)
    assert np.isclose(min_interatomic_distance(fcc_cu_bulk), 3.615 / math.sqrt(2), atol=1e-9)


def test_wrapping_into_unit_interval():
    s = Structure(np.eye(3) * 4, ["Cu"], [[1.25, -0.25, 2.0]])
    assert np.allclose(s.frac_coords[0], [0.25, 0.75, 0.0])
    assert np.all(s.frac_coords >= 0) and np.all(s.frac_coords < 1)
