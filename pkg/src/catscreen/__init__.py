"""catscreen: closed-loop catalyst-screening toolchain.

Library surface, one module per pipeline stage:

    crystal     geometry types, CIF parse/serialize, supercells
    optimade    federated structure retrieval with dual output files
    slab        oriented slab construction, adaptive tiling, tagging
    surfmod     in-plane strain and top-layer substitution
    energetics  calculator contract, Morse surrogate, LBFGS, bridge client
    adsorb      placements, relaxation, anomalies, multi-facet evaluation
    descriptors reaction criteria and proximity bands (ORR/CO2RR/NRR)
    campaign    closed-loop driver, trial ledgers, metrics engine
    mcp_server  the five MCP tool servers over stdio
    cli         command-line entry point
"""

__version__ = "0.1.0"

from .crystal import Lattice, Metadata, Structure, StructureSummary, parse_cif, serialize_cif
from .descriptors import BUILTIN_TASKS, TaskSpec, Verdict
from .slab import MillerIndex, Slab, SlabSpec, adaptive_min_ab, build_slab
from .surfmod import ModificationRecord, apply_strain, substitute_top_atom

__all__ = [
    "Lattice",
    "Metadata",
    "Structure",
    "StructureSummary",
    "parse_cif",
    "serialize_cif",
    "MillerIndex",
    "Slab",
    "SlabSpec",
    "adaptive_min_ab",
    "build_slab",
    "ModificationRecord",
    "apply_strain",
    "substitute_top_atom",
    "TaskSpec",
    "Verdict",
    "BUILTIN_TASKS",
    "__version__",
]
