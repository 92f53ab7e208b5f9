"""Model Context Protocol servers over newline-delimited JSON-RPC on stdio.

One process serves one of the five server kinds:

    structure_retrieval    optimade_structure_search
    cif_resource           list_cif_files
    structure_modification create_and_serialize_slab
    energy_evaluation      adsorbml_evaluate (alias: adsorbml_analysis)
    candidate_info         candidate_list

Protocol surface: initialize, tools/list, tools/call, plus
notifications/message status logs during long evaluations. Malformed
input never kills the loop; tool failures come back as structured error
content, protocol misuse as JSON-RPC errors.
"""

from __future__ import annotations

import json
import os
import re
import sys
from dataclasses import dataclass, field

from . import optimade
from .adsorb import MAX_FACETS_PER_CALL, engine_from_config, run_adsorption_analysis
from .crystal import parse_cif, serialize_cif
from .errors import ArgumentValidation, CatscreenError
from .slab import MillerIndex, SlabSpec, build_slab
from .surfmod import apply_strain, parse_doping_spec, substitute_top_atom

PROTOCOL_VERSION = "2024-11-05"
SERVER_VERSION = "0.1.0"

SERVER_KINDS = (
    "structure_retrieval",
    "cif_resource",
    "structure_modification",
    "energy_evaluation",
    "candidate_info",
)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


# ---------------------------------------------------------------------------
# Minimal JSON-schema validation (subset: type/properties/required/enum/
# additionalProperties/items/pattern)
# ---------------------------------------------------------------------------

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "integer": int,
    "number": (int, float),
    "boolean": bool,
}


def validate_schema(schema, value, path="arguments"):
    typ = schema.get("type")
    if typ:
        expected = _TYPES[typ]
        if isinstance(value, bool) and typ in ("integer", "number"):
            raise ArgumentValidation(path, f"expected {typ}, got boolean")
        if not isinstance(value, expected):
            raise ArgumentValidation(path, f"expected {typ}, got {type(value).__name__}")
    if "enum" in schema and value not in schema["enum"]:
        raise ArgumentValidation(path, f"must be one of {schema['enum']}")
    if "pattern" in schema and isinstance(value, str):
        if not re.fullmatch(schema["pattern"], value):
            raise ArgumentValidation(path, f"does not match pattern {schema['pattern']}")
    if typ == "object":
        props = schema.get("properties", {})
        for req in schema.get("required", ()):
            if req not in value:
                raise ArgumentValidation(f"{path}.{req}", "required field missing")
        if schema.get("additionalProperties") is False:
            for key in value:
                if key not in props:
                    raise ArgumentValidation(f"{path}.{key}", "unknown field")
        for key, sub in props.items():
            if key in value:
                validate_schema(sub, value[key], f"{path}.{key}")
    if typ == "array" and "items" in schema:
        for i, item in enumerate(value):
            validate_schema(schema["items"], item, f"{path}[{i}]")
    return True


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    input_schema: dict
    server: str

    def to_dict(self):
        return {
            "name": self.name,
            "description": self.description,
            "inputSchema": self.input_schema,
        }


_HKL_PATTERN = r"\s*\[?\s*-?\d+\s*,\s*-?\d+\s*,\s*-?\d+\s*\]?\s*"
_HKL_PROPS = {f"hkl{i}": {"type": "string", "pattern": _HKL_PATTERN} for i in range(1, 6)}

TOOL_SCHEMAS = {
    "optimade_structure_search": {
        "type": "object",
        "properties": {
            "elements": {"type": "array", "items": {"type": "string"}},
            "nelements": {"type": "integer"},
            "providers": {"type": "array", "items": {"type": "string"}},
            "page_limit": {"type": "integer"},
        },
        "required": ["elements", "nelements"],
        "additionalProperties": False,
    },
    "list_cif_files": {
        "type": "object",
        "properties": {"directory": {"type": "string"}},
        "additionalProperties": False,
    },
    "create_and_serialize_slab": {
        "type": "object",
        "properties": {
            "provider": {"type": "string"},
            "identifier": {"type": "string"},
            "cif_path": {"type": "string"},
            "hkl": {"type": "string", "pattern": _HKL_PATTERN},
            "strain": {"type": "string"},
            "doping": {"type": "string"},
            "min_ab": {"type": "number"},
            "min_thickness": {"type": "number"},
            "vacuum": {"type": "number"},
            "out_name": {"type": "string"},
        },
        "required": ["hkl"],
        "additionalProperties": False,
    },
    "adsorbml_evaluate": {
        "type": "object",
        "properties": {
            "provider": {"type": "string"},
            "identifier": {"type": "string"},
            "cif_path": {"type": "string"},
            "adsorbate": {"type": "string"},
            "strain": {"type": "string"},
            "doping": {"type": "string"},
            "placements": {"type": "integer"},
            "seed": {"type": "integer"},
            **_HKL_PROPS,
        },
        "required": ["adsorbate", "hkl1"],
        "additionalProperties": False,
    },
    "candidate_list": {
        "type": "object",
        "properties": {"task": {"type": "string"}},
        "required": ["task"],
        "additionalProperties": False,
    },
}

TOOL_ALIASES = {"adsorbml_analysis": "adsorbml_evaluate"}

SERVER_TOOLS = {
    "structure_retrieval": ("optimade_structure_search",),
    "cif_resource": ("list_cif_files",),
    "structure_modification": ("create_and_serialize_slab",),
    "energy_evaluation": ("adsorbml_evaluate",),
    "candidate_info": ("candidate_list",),
}

TOOL_DESCRIPTIONS = {
    "optimade_structure_search": "Query OPTIMADE providers for inorganic structures; writes results.json and results_short.json.",
    "list_cif_files": "List CIF files in the resource directory with their parse status.",
    "create_and_serialize_slab": "Build an oriented slab for a Miller index, optionally strained/doped, and serialize it to CIF.",
    "adsorbml_evaluate": "Relax adsorbate placements on up to five facets in parallel and report minimum adsorption energies.",
    "candidate_list": "Return the configured candidate material list for a screening task.",
}


@dataclass
class ServerContext:
    """Shared configuration for one server process."""

    output_dir: str = "."
    cache_dir: str = "cache"
    cif_dir: str = "."
    candidates_file: str | None = None
    fixture_path: str | None = None  # recorded OPTIMADE responses
    engine_config: dict = field(default_factory=lambda: {"kind": "live"})
    providers: tuple = tuple(optimade.DEFAULT_PROVIDERS.values())
    isolation: str = "process"
    default_placements: int = 5
    default_seed: int = 0
    jobs: int | None = None


def tool_descriptors(kind):
    return [
        ToolDescriptor(
            name=name,
            description=TOOL_DESCRIPTIONS[name],
            input_schema=TOOL_SCHEMAS[name],
            server=kind,
        )
        for name in SERVER_TOOLS[kind]
    ]


def _parse_hkls(arguments):
    hkls = []
    for i in range(1, MAX_FACETS_PER_CALL + 1):
        key = f"hkl{i}"
        if key in arguments:
            try:
                hkls.append(MillerIndex.parse(arguments[key]))
            except ValueError as exc:
                raise ArgumentValidation(key, str(exc)) from exc
    if not hkls:
        raise ArgumentValidation("hkl1", "at least one Miller index is required")
    return hkls


def _parse_strain(arguments):
    if "strain" not in arguments:
        return None
    raw = arguments["strain"]
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ArgumentValidation("strain", f"not a decimal string: {raw!r}") from exc


def _parse_doping(arguments):
    if "doping" not in arguments:
        return None, None
    spec = arguments["doping"]
    try:
        return parse_doping_spec(spec), spec
    except CatscreenError as exc:
        raise ArgumentValidation("doping", str(exc)) from exc


class ToolHost:
    """Executes the five tools against a ServerContext."""

    def __init__(self, context):
        self.context = context
        self._engine = None

    # --- source resolution -------------------------------------------------

    def _resolve_source(self, arguments, require_structure):
        provider = arguments.get("provider")
        identifier = arguments.get("identifier")
        cif_path = arguments.get("cif_path")
        has_ref = provider is not None or identifier is not None
        if has_ref == (cif_path is not None):
            raise ArgumentValidation(
                "provider/identifier/cif_path",
                "give either provider and identifier, or cif_path, not both",
            )
        source = {
            "provider": provider,
            "identifier": identifier,
            "cif_path": cif_path,
        }
        structure = None
        if cif_path is not None:
            path = cif_path
            if not os.path.isabs(path):
                path = os.path.join(self.context.cif_dir, path)
            if not os.path.exists(path):
                raise ArgumentValidation("cif_path", f"no such file: {cif_path}")
            with open(path, encoding="utf-8") as fh:
                structure = parse_cif(fh.read())
            structure = structure.with_metadata(source_path=cif_path)
        elif require_structure:
            if provider is None or identifier is None:
                raise ArgumentValidation("identifier", "both provider and identifier are required")
            structure = optimade.load_cached_structure(
                self.context.cache_dir, provider, identifier
            )
            if structure is None:
                raise ArgumentValidation(
                    "identifier",
                    f"structure {provider}/{identifier} not found in the results cache; "
                    "run optimade_structure_search first",
                )
        if structure is not None:
            source["structure"] = structure.to_dict()
            source["formula"] = structure.metadata.formula or structure.reduced_formula()
            source["spacegroup"] = structure.metadata.spacegroup
        return source

    def _engine_for_request(self):
        if self._engine is None:
            self._engine = engine_from_config(self.context.engine_config)
        return self._engine

    # --- tools ---------------------------------------------------------------

    def tool_optimade_structure_search(self, arguments, notify=None):
        spec = optimade.QuerySpec(
            elements=tuple(arguments["elements"]),
            nelements=arguments["nelements"],
            providers=tuple(arguments.get("providers", self.context.providers)),
            page_limit=arguments.get("page_limit", optimade.DEFAULT_PAGE_LIMIT),
        )
        if self.context.fixture_path:
            transport = optimade.FixtureTransport.from_file(self.context.fixture_path)
        else:
            transport = optimade.UrllibTransport()
        result = optimade.search(
            spec, transport,
            output_dir=self.context.output_dir,
            cache_dir=self.context.cache_dir,
        )
        return {
            "message": result.message,
            "results_summary": [s.to_dict() for s in result.summaries],
            "files_saved": result.files_saved,
        }

    def tool_list_cif_files(self, arguments, notify=None):
        directory = arguments.get("directory", self.context.cif_dir)
        if not os.path.isdir(directory):
            raise ArgumentValidation("directory", f"no such directory: {directory}")
        files = []
        for name in sorted(os.listdir(directory)):
            if not name.lower().endswith(".cif"):
                continue
            entry = {"name": name}
            try:
                with open(os.path.join(directory, name), encoding="utf-8") as fh:
                    structure = parse_cif(fh.read())
                entry["parse_status"] = "ok"
                entry["formula"] = structure.reduced_formula()
                entry["spacegroup"] = structure.metadata.spacegroup
                entry["n_sites"] = len(structure)
            except Exception as exc:
                entry["parse_status"] = "error"
                entry["error"] = f"{type(exc).__name__}: {exc}"
            files.append(entry)
        return {"directory": directory, "files": files}

    def tool_create_and_serialize_slab(self, arguments, notify=None):
        source = self._resolve_source(arguments, require_structure=True)
        from .crystal import Structure

        bulk = Structure.from_dict(source["structure"])
        try:
            hkl = MillerIndex.parse(arguments["hkl"])
        except ValueError as exc:
            raise ArgumentValidation("hkl", str(exc)) from exc
        spec_kwargs = {"hkl": hkl}
        for key in ("min_ab", "min_thickness", "vacuum"):
            if key in arguments:
                spec_kwargs[key] = arguments[key]
        slab = build_slab(bulk, SlabSpec(**spec_kwargs))
        strain = _parse_strain(arguments)
        doping, doping_spec = _parse_doping(arguments)
        if strain is not None:
            slab = apply_strain(slab, strain)
        if doping is not None:
            slab = substitute_top_atom(slab, doping[0], doping[1])

        stem = arguments.get("out_name") or (
            f"slab_{source.get('identifier') or os.path.splitext(os.path.basename(source.get('cif_path') or 'structure'))[0]}"
            f"_{hkl.h}{hkl.k}{hkl.l}"
        )
        os.makedirs(self.context.output_dir, exist_ok=True)
        slab_file = os.path.join(self.context.output_dir, f"{stem}.cif")
        with open(slab_file, "w", encoding="utf-8") as fh:
            fh.write(serialize_cif(slab.structure, data_name=stem))
        json_file = os.path.join(self.context.output_dir, f"{stem}.json")
        with open(json_file, "w", encoding="utf-8") as fh:
            json.dump(slab.to_dict(), fh)

        import numpy as np

        rows = slab.structure.lattice.rows
        return {
            "slab_file": slab_file,
            "slab_json": json_file,
            "hkl": list(hkl.as_tuple()),
            "n_atoms": len(slab),
            "in_plane_norms": [float(np.linalg.norm(rows[0])), float(np.linalg.norm(rows[1]))],
            "doping": doping_spec,
            "strain": strain,
            "modifications_applied": slab.modifications.to_dict() if slab.modifications else None,
        }

    def tool_adsorbml_evaluate(self, arguments, notify=None):
        hkls = _parse_hkls(arguments)
        strain = _parse_strain(arguments)
        doping, doping_spec = _parse_doping(arguments)
        engine = self._engine_for_request()
        source = self._resolve_source(arguments, require_structure=(engine.kind != "replay"))

        def progress(event):
            if notify is not None:
                notify("info", event)

        result = run_adsorption_analysis(
            source,
            arguments["adsorbate"],
            hkls,
            engine,
            strain=strain,
            doping=doping,
            doping_spec=doping_spec,
            n_placements=arguments.get("placements", self.context.default_placements),
            seed=arguments.get("seed", self.context.default_seed),
            isolation=self.context.isolation,
            jobs=self.context.jobs,
            progress=progress,
        )
        return result

    def tool_candidate_list(self, arguments, notify=None):
        if not self.context.candidates_file:
            raise ArgumentValidation("task", "no candidate list file configured for this server")
        with open(self.context.candidates_file, encoding="utf-8") as fh:
            table = json.load(fh)
        task = arguments["task"]
        if task not in table:
            raise ArgumentValidation("task", f"no candidates recorded for task {task!r}")
        return {"task": task, "materials": table[task]}

    def call(self, name, arguments, notify=None):
        handler = getattr(self, f"tool_{name}")
        return handler(arguments, notify=notify)


class McpServer:
    """Single-threaded dispatch loop for one server kind."""

    def __init__(self, kind, context):
        if kind not in SERVER_KINDS:
            raise ValueError(f"unknown server kind {kind!r}; expected one of {SERVER_KINDS}")
        self.kind = kind
        self.context = context
        self.host = ToolHost(context)
        self.descriptors = {d.name: d for d in tool_descriptors(kind)}

    # --- message handling ---------------------------------------------------

    def _error(self, msg_id, code, message, data=None):
        err = {"code": code, "message": message}
        if data is not None:
            err["data"] = data
        return {"jsonrpc": "2.0", "id": msg_id, "error": err}

    def _result(self, msg_id, result):
        return {"jsonrpc": "2.0", "id": msg_id, "result": result}

    def handle_message(self, message, emit):
        """Process one parsed message; returns a response dict or None."""
        if not isinstance(message, dict) or message.get("jsonrpc") != "2.0":
            return self._error(None, INVALID_REQUEST, "not a JSON-RPC 2.0 message")
        method = message.get("method")
        msg_id = message.get("id")
        if method is None:
            return self._error(msg_id, INVALID_REQUEST, "missing method")
        if msg_id is None:
            # notification from the client; nothing requires action
            return None

        if method == "initialize":
            return self._result(msg_id, {
                "protocolVersion": PROTOCOL_VERSION,
                "capabilities": {"tools": {}},
                "serverInfo": {"name": f"catscreen-{self.kind}", "version": SERVER_VERSION},
            })
        if method == "tools/list":
            return self._result(msg_id, {
                "tools": [d.to_dict() for d in self.descriptors.values()],
            })
        if method == "tools/call":
            params = message.get("params") or {}
            name = params.get("name")
            arguments = params.get("arguments") or {}
            canonical = TOOL_ALIASES.get(name, name)
            if canonical not in self.descriptors:
                return self._error(msg_id, INVALID_PARAMS, f"unknown tool {name!r}")
            try:
                validate_schema(self.descriptors[canonical].input_schema, arguments)
            except ArgumentValidation as exc:
                return self._error(msg_id, INVALID_PARAMS, str(exc))

            def notify(level, data):
                emit({
                    "jsonrpc": "2.0",
                    "method": "notifications/message",
                    "params": {"level": level, "logger": self.kind, "data": data},
                })

            try:
                payload = self.host.call(canonical, arguments, notify=notify)
            except ArgumentValidation as exc:
                return self._error(msg_id, INVALID_PARAMS, str(exc))
            except CatscreenError as exc:
                content = {"error": f"{type(exc).__name__}: {exc}", "tool": name}
                return self._result(msg_id, {
                    "content": [{"type": "text", "text": json.dumps(content)}],
                    "isError": True,
                })
            except Exception as exc:
                content = {"error": f"internal failure: {type(exc).__name__}: {exc}", "tool": name}
                return self._result(msg_id, {
                    "content": [{"type": "text", "text": json.dumps(content)}],
                    "isError": True,
                })
            return self._result(msg_id, {
                "content": [{"type": "text", "text": json.dumps(payload)}],
                "isError": False,
            })
        return self._error(msg_id, METHOD_NOT_FOUND, f"unknown method {method!r}")

    def serve(self, stdin=None, stdout=None):
        """Loop until EOF; malformed lines never kill the process."""
        stdin = stdin if stdin is not None else sys.stdin
        stdout = stdout if stdout is not None else sys.stdout

        def emit(obj):
            stdout.write(json.dumps(obj) + "\n")
            stdout.flush()

        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError:
                emit(self._error(None, PARSE_ERROR, "request line is not valid JSON"))
                continue
            try:
                response = self.handle_message(message, emit)
            except Exception as exc:  # absolute backstop: keep serving
                response = self._error(None, INTERNAL_ERROR, f"{type(exc).__name__}: {exc}")
            if response is not None:
                emit(response)
        return 0
