"""Report and solution documents, verification, and text tables rendered from them."""

from __future__ import annotations

import numpy as np

from . import __version__
from .cluster import AdjacencyMatrix, nullifier_variances
from .eigenmodes import bar_chart_rows, mode_report
from .errors import FwmClusterError
from .serialization import complex_matrix, graph_to_doc, matrix, read_complex, validate
from .synthesis import SynthesisSolution

TOL_PHASE = 1e-10
TOL_ORTHO = 1e-8
TOL_UNITARY = 1e-8
TOL_RECOMPUTE = 1e-9


def solution_to_doc(sol: SynthesisSolution, seed: int | None = None) -> dict:
    v = AdjacencyMatrix(sol.v)
    doc = {
        "schema": "fwmcluster/solution",
        "schema_version": 1,
        "tool_version": __version__,
    }
    if seed is not None:
        doc["seed"] = int(seed)
    doc.update(
        {
            "graph": graph_to_doc(v),
            "adjacency": matrix(sol.v),
            "squeeze_x": [float(x) for x in sol.squeeze_x],
            "r": complex_matrix(sol.r),
            "o_search": matrix(sol.o_search),
            "phases_rad": [float(t) for t in sol.phases],
            "p_homo": {"re": [float(np.cos(t)) for t in sol.phases], "im": [float(np.sin(t)) for t in sol.phases]},
            "o_post": matrix(sol.o_post),
            "achieved_w": complex_matrix(sol.achieved_w),
            "residual": float(sol.residual),
            "feasible": sol.feasible,
            "refined": sol.refined,
            "nullifiers": sol.nullifiers.as_dict(),
            "optimizer_trace": [[int(t.restart), int(t.generation), float(t.best), float(t.sigma)] for t in sol.optimizer_trace],
        }
    )
    return doc


def check_solution_doc(doc: dict) -> dict[str, float]:
    """Re-derive every invariant of a stored solution.

    Returns the measured deviation per check; raises ``FwmClusterError``
    subclasses only for documents that cannot be interpreted at all.
    """
    validate(doc, "solution")
    v = np.asarray(doc["adjacency"], dtype=float)
    n = v.shape[0]
    phases = np.asarray(doc["phases_rad"], dtype=float)
    p = np.asarray(doc["p_homo"]["re"], dtype=float) + 1j * np.asarray(doc["p_homo"]["im"], dtype=float)
    o_post = np.asarray(doc["o_post"], dtype=float)
    w = read_complex(doc["achieved_w"])
    r = read_complex(doc["r"])
    s = np.asarray(doc["squeeze_x"], dtype=float)
    shapes = {p.shape, phases.shape, s.shape}
    if shapes != {(n,)} or o_post.shape != (n, n) or w.shape != (n, n) or r.shape != (n, n):
        raise FwmClusterError("solution arrays have inconsistent dimensions")
    stored = doc["nullifiers"]

    errs = {
        "p_homo_modulus": float(np.max(np.abs(np.abs(p) - 1.0))),
        "p_homo_vs_phases": float(np.max(np.abs(p - np.exp(1j * phases)))),
        "o_post_orthogonality": float(np.max(np.abs(o_post.T @ o_post - np.eye(n)))),
        "achieved_w_unitarity": float(np.max(np.abs(w.conj().T @ w - np.eye(n)))),
        "achieved_w_consistency": float(np.max(np.abs((o_post * p[None, :]) @ r - w))),
    }
    try:
        recomputed = nullifier_variances(w, s, AdjacencyMatrix(v), unitarity_tol=np.inf)
    except FwmClusterError:
        errs["nullifier_recompute"] = np.inf
        return errs
    dev = 0.0
    for key in ("raw_variance", "sql", "normalized"):
        a = np.asarray(stored[key], dtype=float)
        b = getattr(recomputed, key)
        if a.shape != b.shape:
            dev = np.inf
            break
        dev = max(dev, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    errs["nullifier_recompute"] = dev
    return errs


VERIFY_TOLERANCES = {
    "p_homo_modulus": TOL_PHASE,
    "p_homo_vs_phases": TOL_RECOMPUTE,
    "o_post_orthogonality": TOL_ORTHO,
    "achieved_w_unitarity": TOL_UNITARY,
    "achieved_w_consistency": TOL_RECOMPUTE,
    "nullifier_recompute": TOL_RECOMPUTE,
}


def failed_checks(errs: dict[str, float]) -> list[str]:
    return [k for k, tol in VERIFY_TOLERANCES.items() if not errs.get(k, np.inf) <= tol]


def nullifier_rows(nullifiers: dict) -> tuple[list[str], list[list]]:
    header = ["nullifier", "raw_variance", "sql", "normalized", "below_sql"]
    rows = []
    for i, (raw, q, nv) in enumerate(zip(nullifiers["raw_variance"], nullifiers["sql"], nullifiers["normalized"])):
        rows.append([i + 1, raw, q, nv, int(nv < 1.0)])
    return header, rows


# ---------------------------------------------------------------- text output


def _fmt_matrix(title, labels, m) -> list[str]:
    lines = [title]
    lines.append("        " + "".join(f"{l:>12}" for l in labels))
    for l, row in zip(labels, m):
        lines.append(f"{l:>8}" + "".join(f"{x:12.6f}" for x in row))
    return lines


def render(report: dict) -> str:
    """Human-readable tables; uses nothing but the report document."""
    lines = [f"fwmcluster {report['tool_version']}  command={report['command']}  seed={report['seed']}"]
    cov = report["covariance"]
    lines += _fmt_matrix("C_XX", cov["labels"], cov["cxx"])
    lines += _fmt_matrix("C_PP", cov["labels"], cov["cpp"])
    if "modes" in report:
        m = report["modes"]
        labels = m.get("output_modes") or [f"m{i + 1}" for i in range(len(m["eta"]))]
        lines.append("eigenmodes (X variance, dB, tag, weights on " + ", ".join(labels) + ")")
        for j, (eta, db, tag) in enumerate(zip(m["eta"], m["squeezing_db"], m["tags"])):
            weights = " ".join(f"{x:8.4f}" for x in m["u0_columns"][j])
            lines.append(f"  {j + 1}: {eta:12.6f} {db:+8.3f} dB  {tag:<12} {weights}")
    if "synthesis" in report:
        syn = report["synthesis"]
        lines.append(f"residual {syn['residual']:.6e}   phases (rad) " + " ".join(f"{t:+.4f}" for t in syn["phases_rad"]))
        lines.append("nullifier   raw        SQL        normalized")
        header, rows = nullifier_rows(syn["nullifiers"])
        for k, raw, q, nv, below in rows:
            mark = "*" if below else " "
            lines.append(f"  {k:>3}   {raw:10.6f} {q:8.3f}   {nv:10.6f} {mark}")
        lines.append("(* = below the shot-noise limit)")
        lines.append("feasible" if syn["feasible"] else "infeasible at this gain")
    return "\n".join(lines)


def base_report(command, config, seed, transform, cov) -> dict:
    return {
        "schema": "fwmcluster/report",
        "schema_version": 1,
        "tool_version": __version__,
        "command": command,
        "seed": int(seed),
        "config": config,
        "transform": {"labels": list(transform.labels), "ux": matrix(transform.ux), "up": matrix(transform.up)},
        "covariance": {"labels": list(cov.labels), "cxx": matrix(cov.cxx), "cpp": matrix(cov.cpp)},
        "checks": {
            "pairing_error": transform.pairing_error(),
            "purity_error": cov.purity_error(),
            "det_cxx": float(np.linalg.det(cov.cxx)),
        },
    }


__all__ = [
    "bar_chart_rows",
    "base_report",
    "check_solution_doc",
    "failed_checks",
    "mode_report",
    "nullifier_rows",
    "render",
    "solution_to_doc",
]
