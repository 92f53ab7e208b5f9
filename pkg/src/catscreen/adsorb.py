"""Adsorption-energy pipeline: placements, relaxation, anomaly filtering,
energy decomposition, and parallel multi-facet evaluation.

The adsorption energy of configuration i is

    dE_i = E_adslab_i - E_slab - E_gas

and the facet's reported value is the minimum over valid (non-anomalous)
configurations. Facets run in isolated worker processes by default so a
crash in one never takes down its siblings.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
from dataclasses import dataclass

import numpy as np

from .crystal import Structure
from .energetics import MorseSurrogate, RelaxSettings, calculator_from_config, relax
from .errors import (
    EmptyList,
    NoSurfaceAtoms,
    NonFiniteInput,
    TooManyFacets,
    UnknownAdsorbate,
)
from .slab import FROZEN, MillerIndex, Slab, SlabSpec, build_slab, top_layer_sites
from .surfmod import apply_strain, substitute_top_atom

MAX_FACETS_PER_CALL = 5

PLACEMENT_HEIGHT = 2.0  # A between slab top and the adsorbate binding atom

DESORBED_DISTANCE = 3.5      # A: adsorbate farther than this from any slab atom
DISSOCIATION_FACTOR = 1.5    # intra-adsorbate bond stretch ratio
RECONSTRUCTION_DISPLACEMENT = 1.0  # A: free slab atom moved farther than this


@dataclass(frozen=True)
class Adsorbate:
    """Small adsorbed species; offsets are relative to the binding atom."""

    label: str
    species: tuple
    offsets: tuple  # per-atom (dx, dy, dz), binding atom first at (0,0,0)
    binding_atom: int = 0

    def __post_init__(self):
        if not self.label.startswith("*"):
            raise ValueError(f"adsorbate label must start with '*', got {self.label!r}")
        for i, a in enumerate(self.offsets):
            for j in range(i + 1, len(self.offsets)):
                d = math.dist(self.offsets[i], self.offsets[j])
                if not 0.5 <= d <= 2.0:
                    raise ValueError(f"adsorbate bond length {d:.3f} A outside 0.5-2.0 A")

    def n_atoms(self):
        return len(self.species)


ADSORBATES = {
    "*OH": Adsorbate("*OH", ("O", "H"), ((0.0, 0.0, 0.0), (0.0, 0.0, 0.97))),
    "*H": Adsorbate("*H", ("H",), ((0.0, 0.0, 0.0),)),
    "*CO": Adsorbate("*CO", ("C", "O"), ((0.0, 0.0, 0.0), (0.0, 0.0, 1.13))),
    "*N": Adsorbate("*N", ("N",), ((0.0, 0.0, 0.0),)),
    "*N2": Adsorbate("*N2", ("N", "N"), ((0.0, 0.0, 0.0), (0.0, 0.0, 1.10))),
}


def get_adsorbate(label):
    try:
        return ADSORBATES[label]
    except KeyError:
        raise UnknownAdsorbate(f"unknown adsorbate {label!r}; known: {sorted(ADSORBATES)}") from None


@dataclass(frozen=True)
class PlacementConfig:
    adslab: Slab
    config_index: int
    seed: int
    n_slab_atoms: int

    def adsorbate_indices(self):
        return list(range(self.n_slab_atoms, len(self.adslab)))

    def initial_positions(self):
        return self.adslab.structure.cart_coords()


def generate_placements(slab, adsorbate, n, seed):
    """Deterministic initial placements: on-top sites first, then seeded
    uniform lateral positions, all with the binding atom 2.0 A above the
    highest slab atom."""
    if isinstance(adsorbate, str):
        adsorbate = get_adsorbate(adsorbate)
    if n < 1:
        raise ValueError("need at least one placement")
    top = top_layer_sites(slab)
    if not top:
        raise NoSurfaceAtoms("slab has no identifiable surface atoms")

    cart = slab.structure.cart_coords()
    z_top = float(cart[:, 2].max())
    rows = slab.structure.lattice.rows
    rng = np.random.default_rng(seed)

    anchors = []
    for site in top[:n]:
        anchors.append((float(cart[site, 0]), float(cart[site, 1])))
    while len(anchors) < n:
        fx, fy = rng.random(2)
        xy = fx * rows[0][:2] + fy * rows[1][:2]
        anchors.append((float(xy[0]), float(xy[1])))

    placements = []
    n_slab = len(slab)
    offsets = np.array(adsorbate.offsets, dtype=float)
    for idx, (x, y) in enumerate(anchors):
        base = np.array([x, y, z_top + PLACEMENT_HEIGHT])
        ads_cart = base + offsets
        all_cart = np.vstack([cart, ads_cart])
        frac = all_cart @ slab.structure.lattice.inverse()
        species = list(slab.structure.species) + list(adsorbate.species)
        structure = Structure(slab.structure.lattice, species, frac, slab.structure.metadata)
        tags = slab.tags + tuple("adsorbate" for _ in adsorbate.species)
        adslab = Slab(structure=structure, spec=slab.spec, tags=tags, modifications=slab.modifications)
        placements.append(PlacementConfig(adslab=adslab, config_index=idx, seed=seed, n_slab_atoms=n_slab))
    return placements


def _mic_distance(cell, inv, a, b):
    """Minimum-image distance; wrapped coordinates must not fake motion."""
    frac = (np.asarray(b) - np.asarray(a)) @ inv
    frac -= np.round(frac)
    return float(np.linalg.norm(frac @ cell))


def detect_anomaly(initial, relaxed):
    """Classify a relaxed configuration; first matching category wins."""
    init_pos = initial.initial_positions()
    relaxed_structure = getattr(relaxed, "structure", relaxed)
    new_pos = relaxed_structure.cart_coords()
    n_slab = initial.n_slab_atoms
    ads = initial.adsorbate_indices()
    cell = relaxed_structure.lattice.rows
    inv = relaxed_structure.lattice.inverse()

    gap = min(
        _mic_distance(cell, inv, new_pos[a], new_pos[s])
        for a in ads
        for s in range(n_slab)
    )
    if gap > DESORBED_DISTANCE:
        return "desorbed"

    for i in range(len(ads)):
        for j in range(i + 1, len(ads)):
            before = _mic_distance(cell, inv, init_pos[ads[i]], init_pos[ads[j]])
            after = _mic_distance(cell, inv, new_pos[ads[i]], new_pos[ads[j]])
            if after > DISSOCIATION_FACTOR * before:
                return "dissociated"

    free_slab = [i for i in range(n_slab) if initial.adslab.tags[i] != FROZEN]
    for i in free_slab:
        if _mic_distance(cell, inv, new_pos[i], init_pos[i]) > RECONSTRUCTION_DISPLACEMENT:
            return "reconstructed"
    return "valid"


def adsorption_energy(adslab_energy, slab_energy, gas_energy):
    """dE = E_adslab - E_slab - E_gas."""
    for name, value in (("adslab", adslab_energy), ("slab", slab_energy), ("gas", gas_energy)):
        if not math.isfinite(value):
            raise NonFiniteInput(f"{name} energy is not finite: {value}")
    return adslab_energy - slab_energy - gas_energy


def select_minimum(outcomes):
    """Minimum-energy (config_index, dE); ties resolved to the lowest index."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyList("no valid configurations to select from")
    return min(outcomes, key=lambda item: (item[1], item[0]))


# ---------------------------------------------------------------------------
# Facet evaluation engines
# ---------------------------------------------------------------------------


class LiveEngine:
    """Runs the real pipeline: slab, modifications, relaxations, decomposition."""

    kind = "live"

    def __init__(self, calculator=None, settings=None, slab_options=None,
                 gas_references=None):
        self.calculator = calculator or MorseSurrogate()
        self.settings = settings or RelaxSettings()
        self.slab_options = dict(slab_options or {})
        # explicit per-adsorbate reference energies take precedence over
        # the isolated-molecule evaluation
        self.gas_references = dict(gas_references or {})
        self._gas_cache = {}

    def gas_reference(self, adsorbate):
        """Configured constant, else the isolated-molecule energy in a
        large box (cached per label)."""
        if adsorbate.label in self.gas_references:
            return float(self.gas_references[adsorbate.label])
        if adsorbate.label not in self._gas_cache:
            box = np.eye(3) * 30.0
            offsets = np.array(adsorbate.offsets, dtype=float) + 15.0
            ef = self.calculator.evaluate(box, list(adsorbate.species), offsets)
            self._gas_cache[adsorbate.label] = float(ef.energy)
        return self._gas_cache[adsorbate.label]

    def evaluate_facet(self, source, hkl, strain, doping, adsorbate_label, n_placements, seed):
        adsorbate = get_adsorbate(adsorbate_label)
        bulk = Structure.from_dict(source["structure"])
        spec_kwargs = {"hkl": MillerIndex.parse(hkl)}
        spec_kwargs.update(self.slab_options)
        spec = SlabSpec(**spec_kwargs)
        slab = build_slab(bulk, spec)
        if strain is not None:
            slab = apply_strain(slab, strain)
        if doping is not None:
            slab = substitute_top_atom(slab, doping[0], doping[1])

        frozen = slab.frozen_indices()
        relaxed_slab, _, _, slab_energy = relax(slab, self.calculator, self.settings, frozen=frozen)

        gas_energy = self.gas_reference(adsorbate)
        placements = generate_placements(relaxed_slab, adsorbate, n_placements, seed)

        valid = []
        anomalies = 0
        for placement in placements:
            relaxed, _, _, adslab_energy = relax(
                placement.adslab, self.calculator, self.settings, frozen=frozen
            )
            category = detect_anomaly(placement, relaxed)
            if category == "valid":
                valid.append((placement.config_index, adslab_energy))
            else:
                anomalies += 1

        block = {
            "provider": source.get("provider"),
            "identifier": source.get("identifier"),
            "formula": source.get("formula") or bulk.metadata.formula or bulk.reduced_formula(),
            "spacegroup": source.get("spacegroup") or bulk.metadata.spacegroup,
            "spacegroup_number": None,
            "adsorbate": adsorbate_label,
            "hkl": list(MillerIndex.parse(hkl).as_tuple()),
            "cif_path": source.get("cif_path"),
            "modifications_applied": slab.modifications.to_dict() if slab.modifications else None,
            "analysis_summary": {
                "total_configurations": len(placements),
                "valid_configurations": len(valid),
                "anomalies_detected": anomalies,
            },
            "minimum_energy_results": None,
        }
        if valid:
            decomposed = [
                (idx, adsorption_energy(adslab_e, slab_energy, gas_energy))
                for idx, adslab_e in valid
            ]
            best_idx, best_de = select_minimum(decomposed)
            best_adslab = dict(valid)[best_idx]
            block["minimum_energy_results"] = {
                "config_index": best_idx,
                "adsorption_energy": best_de,
                "slab_energy": slab_energy,
                "gas_reactant_energy": gas_energy,
                "adslab_energy": best_adslab,
            }
        return block

    def to_config(self):
        return {
            "kind": "live",
            "calculator": self.calculator.to_config(),
            "settings": self.settings.to_dict(),
            "slab_options": self.slab_options,
            "gas_references": self.gas_references,
        }


class ReplayEngine:
    """Replays recorded facet blocks keyed by (identifier, hkl, strain, doping).

    Recorded blocks pass through untouched so golden transcripts reproduce
    byte-for-byte, including any oddities in the source records.
    """

    kind = "replay"

    def __init__(self, blocks):
        self.blocks = dict(blocks)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        blocks = {}
        for entry in payload["facets"]:
            blocks[cls.make_key(
                entry.get("identifier"),
                entry["hkl"],
                entry.get("strain"),
                entry.get("doping"),
            )] = entry["block"]
        return cls(blocks)

    @staticmethod
    def make_key(identifier, hkl, strain, doping):
        hkl = MillerIndex.parse(hkl)
        doping = tuple(doping) if doping else None
        strain = None if strain is None else round(float(strain), 10)
        return (str(identifier), hkl.as_tuple(), strain, doping)

    def evaluate_facet(self, source, hkl, strain, doping, adsorbate_label, n_placements, seed):
        key = self.make_key(source.get("identifier"), hkl, strain, doping)
        if key not in self.blocks:
            raise KeyError(f"no recorded facet for {key}")
        return json.loads(json.dumps(self.blocks[key]))  # defensive copy

    def to_config(self):
        return {"kind": "replay", "blocks_inline": True}


def engine_from_config(config):
    kind = config.get("kind", "live")
    if kind == "live":
        return LiveEngine(
            calculator=calculator_from_config(config.get("calculator", {"kind": "surrogate"})),
            settings=RelaxSettings.from_dict(config.get("settings")),
            slab_options=config.get("slab_options"),
            gas_references=config.get("gas_references"),
        )
    if kind == "replay":
        if "path" in config:
            return ReplayEngine.from_file(config["path"])
        raise ValueError("replay engine config needs a 'path'")
    raise ValueError(f"unknown engine kind {kind!r}")


# ---------------------------------------------------------------------------
# Multi-facet orchestration
# ---------------------------------------------------------------------------


def _facet_error_block(source, hkl, adsorbate_label, message):
    return {
        "provider": source.get("provider"),
        "identifier": source.get("identifier"),
        "adsorbate": adsorbate_label,
        "hkl": list(MillerIndex.parse(hkl).as_tuple()),
        "error": message,
        "analysis_summary": {
            "total_configurations": 0,
            "valid_configurations": 0,
            "anomalies_detected": 0,
        },
        "minimum_energy_results": None,
    }


def _run_facet_inline(engine, source, hkl, strain, doping, adsorbate_label, n_placements, seed):
    try:
        return engine.evaluate_facet(source, hkl, strain, doping, adsorbate_label, n_placements, seed)
    except Exception as exc:  # contained per facet by contract
        return _facet_error_block(source, hkl, adsorbate_label, f"{type(exc).__name__}: {exc}")


def _run_facets_processes(engine_config, source, hkls, strain, doping, adsorbate_label,
                          n_placements, seed, jobs, on_spawn, timeout, progress):
    tasks = {}
    results = {}
    pending = list(hkls)
    running = []

    def launch(hkl):
        request = {
            "source": source,
            "hkl": list(MillerIndex.parse(hkl).as_tuple()),
            "strain": strain,
            "doping": list(doping) if doping else None,
            "adsorbate": adsorbate_label,
            "n_placements": n_placements,
            "seed": seed,
            "engine": engine_config,
        }
        proc = subprocess.Popen(
            [sys.executable, "-m", "catscreen.facet_worker"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        if on_spawn is not None:
            on_spawn(MillerIndex.parse(hkl).as_tuple(), proc)
        try:
            proc.stdin.write((json.dumps(request) + "\n").encode())
            proc.stdin.close()
        except (BrokenPipeError, OSError, ValueError):
            pass  # dead worker surfaces as an error block at collection
        proc.stdin = None  # communicate() must not re-flush the closed pipe
        return proc

    while pending or running:
        while pending and len(running) < jobs:
            hkl = pending.pop(0)
            if progress:
                progress({"event": "facet_started", "hkl": list(MillerIndex.parse(hkl).as_tuple())})
            running.append((hkl, launch(hkl)))
        hkl, proc = running.pop(0)
        try:
            out, _ = proc.communicate(timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            out = b""
        key = MillerIndex.parse(hkl).key()
        if proc.returncode != 0 or not out.strip():
            results[key] = _facet_error_block(
                source, hkl, adsorbate_label,
                f"facet worker failed (exit code {proc.returncode})",
            )
        else:
            try:
                results[key] = json.loads(out.decode())
            except json.JSONDecodeError:
                results[key] = _facet_error_block(
                    source, hkl, adsorbate_label, "facet worker returned unparseable output"
                )
        if progress:
            progress({"event": "facet_finished", "hkl": list(MillerIndex.parse(hkl).as_tuple()),
                      "error": results[key].get("error")})
    return results


def evaluate_facets(source, adsorbate_label, hkls, engine, strain=None, doping=None,
                    n_placements=5, seed=0, isolation="inline", jobs=None,
                    on_spawn=None, worker_timeout=600.0, progress=None):
    """Evaluate up to five facets; failures are contained per facet.

    source: dict with provider/identifier/cif_path plus a serialized
    "structure" for live engines. Returns the per-facet result map keyed
    by "(h,k,l)" strings, ordered as requested.
    """
    hkls = [MillerIndex.parse(h) for h in hkls]
    if not 1 <= len(hkls) <= MAX_FACETS_PER_CALL:
        raise TooManyFacets(
            f"between 1 and {MAX_FACETS_PER_CALL} Miller indices per call, got {len(hkls)}"
        )
    get_adsorbate(adsorbate_label)

    if isolation == "process" and engine.kind != "replay":
        jobs = jobs or len(hkls)
        results = _run_facets_processes(
            engine.to_config(), source, hkls, strain, doping, adsorbate_label,
            n_placements, seed, jobs, on_spawn, worker_timeout, progress,
        )
        return {hkl.key(): results[hkl.key()] for hkl in hkls}

    results = {}
    for hkl in hkls:
        if progress:
            progress({"event": "facet_started", "hkl": list(hkl.as_tuple())})
        results[hkl.key()] = _run_facet_inline(
            engine, source, hkl, strain, doping, adsorbate_label, n_placements, seed
        )
        if progress:
            progress({"event": "facet_finished", "hkl": list(hkl.as_tuple()),
                      "error": results[hkl.key()].get("error")})
    return results


def run_adsorption_analysis(source, adsorbate_label, hkls, engine, strain=None,
                            doping=None, doping_spec=None, n_placements=5, seed=0,
                            isolation="inline", jobs=None, on_spawn=None, progress=None):
    """Assemble the full result document for one material evaluation."""
    results = evaluate_facets(
        source, adsorbate_label, hkls, engine, strain=strain, doping=doping,
        n_placements=n_placements, seed=seed, isolation=isolation, jobs=jobs,
        on_spawn=on_spawn, progress=progress,
    )
    return {
        "provider": source.get("provider"),
        "identifier": source.get("identifier"),
        "adsorbate": adsorbate_label,
        "cif_path": source.get("cif_path"),
        "doping": doping_spec,
        "strain": strain,
        "results_by_hkl": results,
    }


def validate_facet_block(block):
    """Check the live-result invariants on one facet block."""
    summary = block["analysis_summary"]
    total = summary["total_configurations"]
    valid = summary["valid_configurations"]
    anomalies = summary["anomalies_detected"]
    if valid + anomalies != total:
        raise ValueError(f"valid({valid}) + anomalies({anomalies}) != total({total})")
    minimum = block.get("minimum_energy_results")
    if (minimum is None) != (valid == 0 or block.get("error") is not None):
        raise ValueError("minimum_energy_results must be null exactly when nothing is valid")
    if minimum is not None:
        recomputed = minimum["adslab_energy"] - minimum["slab_energy"] - minimum["gas_reactant_energy"]
        if abs(recomputed - minimum["adsorption_energy"]) > 1e-9:
            raise ValueError("adsorption energy does not match its decomposition")
    return True
