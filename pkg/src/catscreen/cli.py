"""Command-line entry point.

Subcommands mirror the MCP tool surface so scripted and agent-driven runs
share one implementation:

    catscreen serve <kind> [--fixtures ...] [--cache ...] [--engine ...]
    catscreen search --elements Co Al O --nelements 3 --fixtures file
    catscreen slab --cif file --hkl 0,0,1 [--strain 0.02] [--doping Ga->Al]
    catscreen evaluate --cif file --adsorbate *OH --hkl 0,0,1 [...]
    catscreen campaign run --config campaign.json --out ledger.jsonl
    catscreen campaign metrics --ledger ledger.jsonl [--csv out.csv]

Exit codes: 0 success, 64 usage, 65 data error, 2 transport/internal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import optimade
from .adsorb import engine_from_config, run_adsorption_analysis
from .campaign import (
    Candidate,
    PolicyConfig,
    ScriptedBackend,
    LiveBackend,
    TrialLedger,
    compute_metrics,
    run_campaign,
)
from .crystal import parse_cif, serialize_cif
from .descriptors import BUILTIN_TASKS, TaskSpec
from .errors import CatscreenError
from .mcp_server import McpServer, ServerContext, SERVER_KINDS
from .slab import MillerIndex, SlabSpec, build_slab
from .surfmod import apply_strain, parse_doping_spec, substitute_top_atom

EXIT_OK = 0
EXIT_TRANSPORT = 2
EXIT_USAGE = 64
EXIT_DATA = 65

CACHE_ENV = "CATSCREEN_CACHE"

SERVE_ALIASES = {
    "retrieval": "structure_retrieval",
    "cif": "cif_resource",
    "modify": "structure_modification",
    "energy": "energy_evaluation",
    "candidates": "candidate_info",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _default_cache():
    return os.environ.get(CACHE_ENV, "cache")


def _engine_config_from_arg(engine_arg, fmax=None, max_steps=None):
    if engine_arg.startswith("replay:"):
        return {"kind": "replay", "path": engine_arg.split(":", 1)[1]}
    if engine_arg.startswith("bridge:"):
        command = engine_arg.split(":", 1)[1].split()
        return {"kind": "live", "calculator": {"kind": "bridge", "command": command}}
    if engine_arg == "surrogate":
        config = {"kind": "live", "calculator": {"kind": "surrogate"}}
        settings = {}
        if fmax is not None:
            settings["fmax"] = fmax
        if max_steps is not None:
            settings["max_steps"] = max_steps
        if settings:
            config["settings"] = settings
        return config
    raise ValueError(f"unknown engine {engine_arg!r} (use surrogate, replay:PATH, or bridge:CMD)")


def build_parser():
    parser = _Parser(prog="catscreen", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for reproducible placements (default 0; overrides config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run an MCP tool server on stdio")
    p_serve.add_argument("kind", choices=sorted(SERVER_KINDS) + sorted(SERVE_ALIASES))
    p_serve.add_argument("--fixtures", help="recorded OPTIMADE responses (JSON)")
    p_serve.add_argument("--cache", default=None, help="results cache directory")
    p_serve.add_argument("--output", default=".", help="output directory")
    p_serve.add_argument("--cif-dir", default=".", help="CIF resource directory")
    p_serve.add_argument("--candidates-file", help="candidate list JSON for candidate_info")
    p_serve.add_argument("--engine", default="surrogate", help="surrogate | replay:PATH | bridge:CMD")
    p_serve.add_argument("--isolation", choices=("inline", "process"), default="process")
    p_serve.add_argument("--jobs", type=int, default=None, help="max concurrent facet workers")
    p_serve.add_argument("--placements", type=int, default=5)

    p_search = sub.add_parser("search", help="query OPTIMADE providers")
    p_search.add_argument("--elements", nargs="+", required=True)
    p_search.add_argument("--nelements", type=int, required=True)
    p_search.add_argument("--providers", nargs="+", default=None)
    p_search.add_argument("--page-limit", type=int, default=optimade.DEFAULT_PAGE_LIMIT)
    p_search.add_argument("--fixtures", help="recorded responses; omit for live HTTP")
    p_search.add_argument("--live", action="store_true", help="allow live HTTP queries")
    p_search.add_argument("--output", default=".")
    p_search.add_argument("--cache", default=None)

    p_slab = sub.add_parser("slab", help="build and serialize one slab")
    p_slab.add_argument("--cif", required=True)
    p_slab.add_argument("--hkl", required=True)
    p_slab.add_argument("--strain", type=float, default=None)
    p_slab.add_argument("--doping", default=None, help="From->To")
    p_slab.add_argument("--min-ab", type=float, default=None)
    p_slab.add_argument("--min-thickness", type=float, default=8.0)
    p_slab.add_argument("--vacuum", type=float, default=15.0)
    p_slab.add_argument("--out", default=None, help="output CIF path")

    p_eval = sub.add_parser("evaluate", help="adsorption analysis on up to five facets")
    p_eval.add_argument("--cif", default=None)
    p_eval.add_argument("--provider", default=None)
    p_eval.add_argument("--identifier", default=None)
    p_eval.add_argument("--adsorbate", required=True)
    p_eval.add_argument("--hkl", nargs="+", required=True)
    p_eval.add_argument("--strain", default=None, help="decimal strain, e.g. 0.02")
    p_eval.add_argument("--doping", default=None, help="From->To")
    p_eval.add_argument("--engine", default="surrogate")
    p_eval.add_argument("--placements", type=int, default=5)
    p_eval.add_argument("--fmax", type=float, default=None)
    p_eval.add_argument("--max-steps", type=int, default=None)
    p_eval.add_argument("--isolation", choices=("inline", "process"), default="inline")
    p_eval.add_argument("--jobs", type=int, default=None)
    p_eval.add_argument("--cache", default=None)
    p_eval.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p_campaign = sub.add_parser("campaign", help="closed-loop campaigns and metrics")
    camp_sub = p_campaign.add_subparsers(dest="campaign_command", required=True)

    p_run = camp_sub.add_parser("run", help="run a campaign from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True, help="ledger JSONL output path")

    p_metrics = camp_sub.add_parser("metrics", help="compute metrics from a ledger")
    p_metrics.add_argument("--ledger", required=True)
    p_metrics.add_argument("--json", dest="json_out", default=None)
    p_metrics.add_argument("--csv", dest="csv_out", default=None)

    return parser


def cmd_serve(args):
    kind = SERVE_ALIASES.get(args.kind, args.kind)
    context = ServerContext(
        output_dir=args.output,
        cache_dir=args.cache or _default_cache(),
        cif_dir=args.cif_dir,
        candidates_file=args.candidates_file,
        fixture_path=args.fixtures,
        engine_config=_engine_config_from_arg(args.engine),
        isolation=args.isolation,
        default_placements=args.placements,
        default_seed=args.seed if args.seed is not None else 0,
        jobs=args.jobs,
    )
    server = McpServer(kind, context)
    try:
        return server.serve()
    except (BrokenPipeError, OSError) as exc:
        sys.stderr.write(f"transport failure: {exc}\n")
        return EXIT_TRANSPORT


def cmd_search(args):
    spec = optimade.QuerySpec(
        elements=tuple(args.elements),
        nelements=args.nelements,
        providers=tuple(args.providers) if args.providers else tuple(optimade.DEFAULT_PROVIDERS.values()),
        page_limit=args.page_limit,
    )
    if args.fixtures:
        transport = optimade.FixtureTransport.from_file(args.fixtures)
    elif args.live:
        transport = optimade.UrllibTransport()
    else:
        raise CatscreenError("pass --fixtures FILE for recorded mode or --live for real HTTP")
    result = optimade.search(
        spec, transport, output_dir=args.output,
        cache_dir=args.cache or _default_cache(),
    )
    print(json.dumps({
        "message": result.message,
        "provider_counts": result.provider_counts,
        "skipped_entries": result.skipped_entries,
        "files_saved": result.files_saved,
    }, indent=2))
    return EXIT_OK


def cmd_slab(args):
    with open(args.cif, encoding="utf-8") as fh:
        bulk = parse_cif(fh.read())
    spec = SlabSpec(
        hkl=MillerIndex.parse(args.hkl),
        min_ab=args.min_ab,
        min_thickness=args.min_thickness,
        vacuum=args.vacuum,
    )
    slab = build_slab(bulk, spec)
    if args.strain is not None:
        slab = apply_strain(slab, args.strain)
    if args.doping is not None:
        frm, to = parse_doping_spec(args.doping)
        slab = substitute_top_atom(slab, frm, to)
    out = args.out or f"slab_{spec.hkl.h}{spec.hkl.k}{spec.hkl.l}.cif"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(serialize_cif(slab.structure))
    print(json.dumps({
        "slab_file": out,
        "n_atoms": len(slab),
        "hkl": list(spec.hkl.as_tuple()),
        "modifications_applied": slab.modifications.to_dict() if slab.modifications else None,
    }, indent=2))
    return EXIT_OK


def cmd_evaluate(args):
    engine = engine_from_config(_engine_config_from_arg(args.engine, args.fmax, args.max_steps))
    source = {"provider": args.provider, "identifier": args.identifier, "cif_path": args.cif}
    if args.cif:
        with open(args.cif, encoding="utf-8") as fh:
            structure = parse_cif(fh.read()).with_metadata(source_path=args.cif)
        source["structure"] = structure.to_dict()
        source["formula"] = structure.reduced_formula()
        source["spacegroup"] = structure.metadata.spacegroup
    elif engine.kind != "replay":
        if not (args.provider and args.identifier):
            raise CatscreenError("need --cif or both --provider and --identifier")
        structure = optimade.load_cached_structure(
            args.cache or _default_cache(), args.provider, args.identifier
        )
        if structure is None:
            raise CatscreenError(
                f"structure {args.provider}/{args.identifier} not in cache; run `catscreen search` first"
            )
        source["structure"] = structure.to_dict()
        source["formula"] = structure.metadata.formula or structure.reduced_formula()
        source["spacegroup"] = structure.metadata.spacegroup

    doping = parse_doping_spec(args.doping) if args.doping else None
    strain = float(args.strain) if args.strain is not None else None
    if strain is not None and abs(strain) >= 0.5:
        from .errors import StrainOutOfRange

        raise StrainOutOfRange(f"strain magnitude must be below 0.5, got {strain}")
    result = run_adsorption_analysis(
        source, args.adsorbate, [MillerIndex.parse(h) for h in args.hkl],
        engine, strain=strain, doping=doping, doping_spec=args.doping,
        n_placements=args.placements,
        seed=args.seed if args.seed is not None else 0,
        isolation=args.isolation, jobs=args.jobs,
    )
    text = json.dumps(result, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _task_from_config(config):
    task = config["task"]
    if isinstance(task, str):
        return BUILTIN_TASKS[task]
    return TaskSpec.from_dict(task)


def cmd_campaign_run(args):
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    task = _task_from_config(config)
    policy = PolicyConfig.from_dict(config.get("policy"))
    budget = config.get("budget", 10)

    raw_candidates = config["candidates"]
    if isinstance(raw_candidates, dict) and "from_file" in raw_candidates:
        # candidate-list file: {"task": [names, ...]} as served by the
        # candidate_info tool
        base = os.path.dirname(os.path.abspath(args.config))
        list_path = raw_candidates["from_file"]
        if not os.path.isabs(list_path):
            list_path = os.path.join(base, list_path)
        with open(list_path, encoding="utf-8") as fh:
            table = json.load(fh)
        raw_candidates = [{"name": name} for name in table[task.task]]
    candidates = [
        Candidate(name=c["name"], identifier=c.get("identifier"), source=c.get("source", {}))
        for c in raw_candidates
    ]

    backend_cfg = config.get("backend", {})
    backend_kind = backend_cfg.get("kind", "scripted")
    if backend_kind == "scripted":
        base = os.path.dirname(os.path.abspath(args.config))
        path = backend_cfg["path"]
        if not os.path.isabs(path):
            path = os.path.join(base, path)
        backend = ScriptedBackend.from_file(path)
    elif backend_kind == "live":
        engine = engine_from_config(backend_cfg.get("engine", {"kind": "live"}))
        backend = LiveBackend(
            task, engine,
            hkls=[MillerIndex.parse(h) for h in backend_cfg.get("hkls", ["0,0,1"])],
            n_placements=config.get("placements", 5),
            seed=args.seed if args.seed is not None else config.get("seed", 0),
        )
    else:
        raise CatscreenError(f"unknown backend kind {backend_kind!r}")

    ledger = run_campaign(candidates, task, policy, budget, backend)
    ledger.write_jsonl(args.out)
    report = compute_metrics(ledger)
    print(json.dumps({"ledger": args.out, "summary": report.to_dict()}, indent=2))
    return EXIT_OK


def cmd_campaign_metrics(args):
    ledger = TrialLedger.read_jsonl(args.ledger)
    report = compute_metrics(ledger)
    text = json.dumps(report.to_dict(), indent=2)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
    print(text)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE

    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "search":
            return cmd_search(args)
        if args.command == "slab":
            return cmd_slab(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "campaign":
            if args.campaign_command == "run":
                return cmd_campaign_run(args)
            return cmd_campaign_metrics(args)
        return EXIT_USAGE
    except CatscreenError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"error: malformed JSON input: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
