"""OPTIMADE federation client with injectable transport.

Queries one or more providers with the standard v1 filter grammar and
emits the dual output files: `results.json` (master records with full
structures) and `results_short.json` (compact summaries for perusal).
All tests run against recorded fixtures; live HTTP is opt-in.
"""

from __future__ import annotations

import json
import os
import urllib.parse
import urllib.request
from dataclasses import dataclass, field

import numpy as np

from . import elements
from .crystal import Lattice, Metadata, Structure, StructureSummary, wrap_frac
from .errors import (
    EmptyElementList,
    MalformedEntry,
    MissingField,
    NoResults,
    ProviderUnreachable,
    SingularLattice,
    UnknownElementSymbol,
)

# the two providers exercised in this project; others are accepted as URLs
DEFAULT_PROVIDERS = {
    "mp": "https://optimade.materialsproject.org",
    "oqmd": "https://oqmd.org/optimade",
}

DEFAULT_PAGE_LIMIT = 50
MASTER_FILE = "results.json"
SUMMARY_FILE = "results_short.json"

_SPACEGROUP_KEYS = (
    "spacegroup",
    "space_group_symbol_hermann_mauguin",
    "_mp_spacegroup",
    "_oqmd_spacegroup",
)


@dataclass(frozen=True)
class QuerySpec:
    elements: tuple
    nelements: int
    providers: tuple = tuple(DEFAULT_PROVIDERS.values())
    page_limit: int = DEFAULT_PAGE_LIMIT
    max_entries: int = 1000

    def __post_init__(self):
        if not self.elements:
            raise EmptyElementList("query needs at least one element")
        deduped = tuple(dict.fromkeys(self.elements))
        object.__setattr__(self, "elements", deduped)
        for sym in deduped:
            if not elements.is_valid_symbol(sym):
                raise UnknownElementSymbol(sym)
        if self.nelements < 1:
            raise ValueError("nelements must be positive")
        if self.page_limit < 1:
            raise ValueError("page_limit must be positive")


@dataclass
class SearchResult:
    master: list
    summaries: list
    files_saved: list
    message: str
    provider_counts: dict = field(default_factory=dict)
    skipped_entries: int = 0
    provider_errors: dict = field(default_factory=dict)


def build_filter(element_symbols, nelements):
    """OPTIMADE v1 filter, elements sorted for deterministic cache keys."""
    symbols = list(dict.fromkeys(element_symbols))
    if not symbols:
        raise EmptyElementList("filter needs at least one element")
    for sym in symbols:
        if not elements.is_valid_symbol(sym):
            raise UnknownElementSymbol(sym)
    quoted = ",".join(f'"{s}"' for s in sorted(symbols))
    return f"elements HAS ALL {quoted} AND nelements={int(nelements)}"


def structures_url(base, filter_string, page_limit):
    query = urllib.parse.urlencode({"filter": filter_string, "page_limit": page_limit})
    return f"{base.rstrip('/')}/v1/structures?{query}"


class UrllibTransport:
    """Live HTTP GET transport (opt-in; fixtures are the default in tests)."""

    def __init__(self, timeout=30.0):
        self.timeout = timeout

    def get(self, url):
        try:
            with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise ProviderUnreachable(url, str(exc)) from exc


class FixtureTransport:
    """Replays recorded responses keyed by exact URL."""

    def __init__(self, responses):
        self.responses = dict(responses)
        self.requests = []

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh)["responses"])

    def get(self, url):
        self.requests.append(url)
        if url not in self.responses:
            raise ProviderUnreachable(url, "no recorded response for this URL")
        return json.loads(json.dumps(self.responses[url]))


def parse_structure_entry(attributes, provider=None, identifier=None):
    """Convert one OPTIMADE attributes object to a Structure."""
    for name in ("lattice_vectors", "species_at_sites", "cartesian_site_positions"):
        if name not in attributes or attributes[name] is None:
            raise MissingField(name)
    rows = np.array(attributes["lattice_vectors"], dtype=float)
    if rows.shape != (3, 3) or abs(np.linalg.det(rows)) < 1e-9:
        raise SingularLattice(f"lattice {rows.tolist()} is singular or misshapen")
    if np.linalg.det(rows) < 0:
        raise SingularLattice("left-handed lattice_vectors")
    species = list(attributes["species_at_sites"])
    cart = np.array(attributes["cartesian_site_positions"], dtype=float)
    if cart.shape != (len(species), 3):
        raise MalformedEntry(
            f"{len(species)} species but positions shaped {cart.shape}"
        )
    frac = wrap_frac(cart @ np.linalg.inv(rows))
    spacegroup = None
    for key in _SPACEGROUP_KEYS:
        if attributes.get(key):
            spacegroup = attributes[key]
            break
    metadata = Metadata(
        provider=provider,
        identifier=identifier,
        formula=attributes.get("chemical_formula_reduced"),
        spacegroup=spacegroup,
    )
    return Structure(Lattice(rows), species, frac, metadata)


def _provider_name(base_url):
    for name, url in DEFAULT_PROVIDERS.items():
        if base_url.rstrip("/") == url:
            return name
    host = urllib.parse.urlparse(base_url).netloc
    return host.split(".")[0] or base_url


def search(spec, transport, output_dir=".", cache_dir=None):
    """Query all providers, parse entries, and write the dual output files.

    A provider failure is recorded and skipped; a malformed entry is
    skipped and counted. Raises NoResults when nothing parses anywhere.
    """
    filter_string = build_filter(spec.elements, spec.nelements)
    master = []
    provider_counts = {}
    provider_errors = {}
    skipped = 0

    for base in spec.providers:
        if len(master) >= spec.max_entries:
            break
        provider = _provider_name(base)
        url = structures_url(base, filter_string, spec.page_limit)
        count = 0
        try:
            while url:
                payload = transport.get(url)
                for entry in payload.get("data", []):
                    identifier = entry.get("id")
                    try:
                        structure = parse_structure_entry(
                            entry.get("attributes") or {},
                            provider=provider,
                            identifier=identifier,
                        )
                    except (MissingField, MalformedEntry, SingularLattice,
                            UnknownElementSymbol, ValueError):
                        skipped += 1
                        continue
                    master.append(structure)
                    count += 1
                    if len(master) >= spec.max_entries:
                        break
                if len(master) >= spec.max_entries:
                    break
                links = payload.get("links") or {}
                url = links.get("next")
                if isinstance(url, dict):
                    url = url.get("href")
        except ProviderUnreachable as exc:
            provider_errors[provider] = str(exc)
            continue
        finally:
            provider_counts[provider] = count

    if not master:
        raise NoResults(
            f"no structures matched filter {filter_string!r} "
            f"(provider errors: {provider_errors or 'none'})"
        )

    summaries = [StructureSummary.from_structure(s) for s in master]
    files_saved = write_result_files(master, summaries, output_dir)
    if cache_dir:
        cache_structures(master, cache_dir)

    return SearchResult(
        master=master,
        summaries=summaries,
        files_saved=files_saved,
        message=f"Found {len(master)} structures matching criteria",
        provider_counts=provider_counts,
        skipped_entries=skipped,
        provider_errors=provider_errors,
    )


def master_record(structure):
    summary = StructureSummary.from_structure(structure)
    record = summary.to_dict()
    record["structure"] = structure.to_dict()
    return record


def summaries_payload(master_records):
    """Projection of master records used for results_short.json."""
    return [
        {k: rec[k] for k in ("provider", "identifier", "formula", "spacegroup")}
        for rec in master_records
    ]


def write_result_files(master, summaries, output_dir):
    os.makedirs(output_dir, exist_ok=True)
    records = [master_record(s) for s in master]
    with open(os.path.join(output_dir, MASTER_FILE), "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(output_dir, SUMMARY_FILE), "w", encoding="utf-8") as fh:
        json.dump(summaries_payload(records), fh, indent=2)
        fh.write("\n")
    return [MASTER_FILE, SUMMARY_FILE]


def cache_structures(master, cache_dir):
    """Persist structures as {cache}/{provider}/{identifier}.json."""
    for structure in master:
        provider = structure.metadata.provider or "unknown"
        identifier = str(structure.metadata.identifier)
        provider_dir = os.path.join(cache_dir, provider)
        os.makedirs(provider_dir, exist_ok=True)
        with open(os.path.join(provider_dir, f"{identifier}.json"), "w", encoding="utf-8") as fh:
            json.dump(structure.to_dict(), fh)


def load_cached_structure(cache_dir, provider, identifier):
    path = os.path.join(cache_dir, provider, f"{identifier}.json")
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return Structure.from_dict(json.load(fh))
