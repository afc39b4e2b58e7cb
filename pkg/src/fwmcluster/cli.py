"""Command-line front end.

Exit codes: 0 success, 2 bad configuration or unreadable input,
3 numerical invariant or verification failure, 4 synthesis finished but
some normalized nullifier is >= 1 (infeasible at this gain), or no
homodyne phase is defined at all.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .cluster import preset_graph, preset_names
from .eigenmodes import DEFAULT_VACUUM_TOLERANCE, bar_chart_rows, decompose, mode_report
from .errors import DegeneratePhaseError, FwmClusterError, ValidationError
from .optimizer import EsConfig, trace_rows
from .reports import base_report, check_solution_doc, failed_checks, nullifier_rows, render, solution_to_doc
from .serialization import (
    graph_to_doc,
    load_json,
    parse_graph,
    parse_topology,
    topology_to_doc,
    write_csv,
    write_json,
)
from .symplectic import CascadeTopology, FwmCell, Gain, build_cascade, covariance, preset_topology
from .synthesis import synthesize

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_INFEASIBLE = 0, 2, 3, 4


class ConfigError(Exception):
    """Bad user input; the message starts with the offending flag or field path."""


def _floats(text: str, flag: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{flag}: expected a number or comma-separated list, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{flag}: expected finite numbers, got {text!r}")
    return vals


def resolve_topology(args) -> CascadeTopology:
    gains = _floats(args.gain, "--gain") if args.gain is not None else None
    if gains is not None:
        for k, g in enumerate(gains):
            if g < 1:
                where = "--gain" if len(gains) == 1 else f"--gain[{k}]"
                raise ConfigError(f"{where}: gain must be >= 1, got {g!r}")
    if args.topology:
        try:
            topo = parse_topology(load_json(args.topology))
        except OSError as exc:
            raise ConfigError(f"--topology: {exc}") from None
        except ValidationError as exc:
            raise ConfigError(f"{args.topology}: {exc}") from None
        if gains is not None:
            if len(gains) == 1:
                gains = gains * len(topo.cells)
            if len(gains) != len(topo.cells):
                raise ConfigError(f"--gain: {len(gains)} gains for {len(topo.cells)} cells")
            topo = CascadeTopology(
                tuple(FwmCell(Gain(g), c.seed) for g, c in zip(gains, topo.cells)), topo.mode_labels
            )
        return topo
    try:
        return preset_topology(args.preset, gains if gains is not None else [1.2])
    except ValidationError as exc:
        raise ConfigError(f"--preset/--gain: {exc}") from None


def resolve_graph(spec: str):
    if spec in preset_names():
        return preset_graph(spec), spec
    if not os.path.exists(spec):
        raise ConfigError(f"--cluster: {spec!r} is neither a preset ({', '.join(preset_names())}) nor a file")
    try:
        return parse_graph(load_json(spec)), spec
    except ValidationError as exc:
        raise ConfigError(f"{spec}: {exc}") from None


def es_config(args) -> EsConfig:
    base = EsConfig()
    overrides = {
        "population": args.population,
        "parents": args.parents,
        "sigma_init": args.sigma,
        "sigma_decay": args.sigma_decay,
        "max_generations": args.generations,
        "restarts": args.restarts,
        "target": args.target,
        "seed": args.seed,
    }
    try:
        return base.replace(**{k: v for k, v in overrides.items() if v is not None})
    except ValidationError as exc:
        raise ConfigError(f"optimizer: {exc}") from None


def _formats(text: str) -> set[str]:
    fmts = {f.strip() for f in text.split(",") if f.strip()}
    bad = fmts - {"json", "csv"}
    if bad:
        raise ConfigError(f"--format: unknown format(s) {sorted(bad)}; use json,csv")
    return fmts


def _phase_range(text):
    if text is None:
        return None
    vals = _floats(text, "--phase-range")
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise ConfigError(f"--phase-range: expected 'min,max' with min < max, got {text!r}")
    return vals[0], vals[1]


def _invariant_failures(report: dict) -> list[str]:
    chk = report["checks"]
    cxx = np.asarray(report["covariance"]["cxx"])
    cpp = np.asarray(report["covariance"]["cpp"])
    scale = max(1.0, float(np.max(np.abs(cxx))) * float(np.max(np.abs(cpp))))
    out = []
    if chk["pairing_error"] > 1e-10 * scale:
        out.append(f"ux @ up.T != I (deviation {chk['pairing_error']:.3e})")
    if chk["purity_error"] > 1e-8 * scale:
        out.append(f"cxx @ cpp != I (deviation {chk['purity_error']:.3e})")
    if abs(chk["det_cxx"] - 1.0) > 1e-8 * scale:
        out.append(f"det(cxx) = {chk['det_cxx']!r}")
    return out


def _emit(args, report: dict, csv_tables: dict) -> None:
    print(render(report))
    if not args.out:
        return
    os.makedirs(args.out, exist_ok=True)
    fmts = _formats(args.format)
    if "json" in fmts:
        write_json(os.path.join(args.out, "report.json"), report)
        if "synthesis" in report:
            write_json(os.path.join(args.out, "solution.json"), report["synthesis"])
    if "csv" in fmts:
        for name, (header, rows) in csv_tables.items():
            write_csv(os.path.join(args.out, f"{name}.csv"), header, rows)


def run(args) -> int:
    topo = resolve_topology(args)
    _formats(args.format)
    config = {"topology": topology_to_doc(topo), "formats": sorted(_formats(args.format))}
    t = build_cascade(topo)
    cov = covariance(t)
    seed = args.seed if args.seed is not None else 0
    tables = {}
    labels = list(cov.labels)
    tables["covariance_cxx"] = (["mode", *labels], [[l, *row] for l, row in zip(labels, cov.cxx.tolist())])
    tables["covariance_cpp"] = (["mode", *labels], [[l, *row] for l, row in zip(labels, cov.cpp.tolist())])

    if args.command == "simulate":
        report = base_report("simulate", config, seed, t, cov)
    else:
        tol = args.vacuum_tolerance
        if not 0 < tol <= 0.1:
            raise ConfigError(f"--vacuum-tolerance: must lie in (0, 0.1], got {tol!r}")
        config["vacuum_tolerance"] = tol
        basis = decompose(cov)
        if args.command == "modes":
            report = base_report("modes", config, seed, t, cov)
            report["modes"] = mode_report(basis, tol)
            tables["modes"] = bar_chart_rows(basis, tol)
        else:
            v, cluster_name = resolve_graph(args.cluster)
            if v.n != topo.n_modes:
                raise ConfigError(f"--cluster: graph has {v.n} nodes but the cascade has {topo.n_modes} output modes")
            cfg = es_config(args)
            phase_range = _phase_range(args.phase_range)
            config.update(
                {
                    "cluster": cluster_name,
                    "graph": graph_to_doc(v),
                    "optimizer": asdict(cfg),
                    "refine": not args.no_refine,
                    "phase_range": list(phase_range) if phase_range else None,
                }
            )
            report = base_report("synthesize", config, cfg.seed, t, cov)
            report["modes"] = mode_report(basis, tol)
            sol = synthesize(topo, v, cfg, refine=not args.no_refine, phase_range=phase_range, vacuum_tolerance=tol)
            report["synthesis"] = solution_to_doc(sol, cfg.seed)
            tables["modes"] = bar_chart_rows(basis, tol)
            tables["nullifiers"] = nullifier_rows(report["synthesis"]["nullifiers"])
            tables["trace"] = trace_rows(sol.optimizer_trace)

    failures = _invariant_failures(report)
    _emit(args, report, tables)
    if failures:
        for f in failures:
            print(f"invariant violated: {f}", file=sys.stderr)
        return EXIT_INVARIANT
    if "synthesis" in report:
        errs = check_solution_doc(report["synthesis"])
        bad = failed_checks(errs)
        if bad:
            print(f"invariant violated: {', '.join(bad)}", file=sys.stderr)
            return EXIT_INVARIANT
        if not report["synthesis"]["feasible"]:
            return EXIT_INFEASIBLE
    return EXIT_OK


def verify(path: str) -> int:
    try:
        doc = load_json(path)
    except OSError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if isinstance(doc, dict) and doc.get("schema") == "fwmcluster/report" and "synthesis" in doc:
        doc = doc["synthesis"]
    try:
        errs = check_solution_doc(doc)
    except ValidationError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FwmClusterError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    bad = failed_checks(errs)
    for name, val in errs.items():
        print(f"{'FAIL' if name in bad else 'ok  '} {name:<24} {val:.3e}")
    return EXIT_INVARIANT if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwmcluster",
        description="Cascaded four-wave-mixing states, squeezed eigenmodes and cluster-state synthesis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verify", metavar="SOLUTION", help="re-check a solution (or report) file and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", help="chain2, tree3 or chainN")
        src.add_argument("--topology", metavar="FILE", help="topology JSON document")
        p.add_argument("--gain", help="scalar gain for every cell or a comma-separated per-cell list (default 1.2)")
        p.add_argument("--seed", type=int, help="optimizer seed (default 0)")
        p.add_argument("--out", metavar="DIR", help="write report files into DIR")
        p.add_argument("--format", default="json,csv", help="output formats, comma-separated: json,csv")

    p = sub.add_parser("simulate", help="output covariance of a cascade")
    common(p)
    for name, help_ in (("modes", "squeezed eigenmodes of a cascade"), ("synthesize", "synthesize a cluster state")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--vacuum-tolerance", type=float, default=DEFAULT_VACUUM_TOLERANCE)
        if name == "synthesize":
            p.add_argument("--cluster", required=True, help=f"graph preset ({', '.join(preset_names())}) or graph JSON file")
            p.add_argument("--restarts", type=int)
            p.add_argument("--population", type=int)
            p.add_argument("--parents", type=int)
            p.add_argument("--generations", type=int, help="max generations per restart")
            p.add_argument("--sigma", type=float, help="initial mutation scale (rad)")
            p.add_argument("--sigma-decay", type=float)
            p.add_argument("--target", type=float, help="early-stop residual")
            p.add_argument("--phase-range", help="min,max homodyne phase in radians")
            p.add_argument("--no-refine", action="store_true", help="skip the nullifier refinement stage")
    p = sub.add_parser("verify", help="re-check a solution file")
    p.add_argument("solution")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verify:
        return verify(args.verify)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if args.command == "verify":
        return verify(args.solution)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneratePhaseError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FwmClusterError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
