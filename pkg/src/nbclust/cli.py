"""Command-line interface: ``nbclust {generate,spectrum,cluster,bp,sweep}``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bp import BpOpts, bp_run
from .cluster import Labeling, overlap
from .eigen import ConvergenceError, SolverOpts, dense_spectrum, real_eigs_outside_bulk, topk_eigs
from .graph import (
    DegreeSeqParams,
    Graph,
    SbmParams,
    config_model_sample,
    load_edge_list,
    load_labels,
    sbm_sample,
    write_edge_list,
    write_labels,
)
from .io import spectrum_document, write_document
from .operators import CLASSICAL, build_b, build_b_prime, classical_operator
from .pipeline import ALGORITHMS, ClusterConfig, spectral_cluster
from .sweep import SWEEP_ALGORITHMS, SweepSpec, run_sweep, spec_dict

log = logging.getLogger("nbclust")

SPECTRUM_OPERATORS = ("b_prime", "b_edge") + CLASSICAL


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _degree_dist(text: str) -> list[tuple[int, float]]:
    """``"3:0.5,4:0.5"`` -> [(3, 0.5), (4, 0.5)]."""
    out = []
    for part in text.split(","):
        k, _, a = part.partition(":")
        try:
            out.append((int(k), float(a) if a else 1.0))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad degree entry {part!r}") from exc
    return out


def _sbm_params(args) -> SbmParams:
    if args.c_in is not None and args.c_out is not None:
        return SbmParams.planted(args.n, args.q, args.c_in, args.c_out)
    if args.c is not None and args.gap is not None:
        return SbmParams.from_gap(args.n, args.q, args.c, args.gap)
    if args.c is not None and args.ratio is not None:
        return SbmParams.from_ratio(args.n, args.q, args.c, args.ratio)
    raise UsageError("give --c-in and --c-out, or --c with --gap or --ratio")


def _add_sbm_flags(p, need_n=True):
    if need_n:
        p.add_argument("--n", type=int, required=True, help="number of vertices")
    p.add_argument("--q", type=int, default=2, help="number of groups (equal sizes)")
    p.add_argument("--c-in", type=float, help="within-group affinity")
    p.add_argument("--c-out", type=float, help="between-group affinity")
    p.add_argument("--c", type=float, help="mean degree (with --gap or --ratio)")
    p.add_argument("--gap", type=float, help="c_in - c_out")
    p.add_argument("--ratio", type=float, help="c_out / c_in")


def _load(path) -> Graph:
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    return load_edge_list(path)


def _truth(path, q, n) -> Labeling | None:
    if path is None:
        return None
    labels = load_labels(path)
    if labels.size != n:
        raise UsageError(f"truth file has {labels.size} labels for {n} vertices")
    return Labeling(labels, max(q, int(labels.max(initial=0)) + 1))


def cmd_generate(args) -> int:
    if args.model == "sbm":
        params = _sbm_params(args)
        lg = sbm_sample(params, args.seed)
        desc = {"model": "sbm", "n": params.n, "group_fracs": params.group_fracs, "affinity": params.affinity}
    else:
        if args.tc_in is None or args.tc_out is None or args.degrees is None:
            raise UsageError("config model needs --degrees, --tc-in and --tc-out")
        params = DegreeSeqParams(args.n, args.degrees, args.tc_in, args.tc_out)
        lg = config_model_sample(params, args.seed)
        desc = {"model": "config", "n": args.n, "degree_dist": [list(x) for x in args.degrees],
                "tilde_c_in": args.tc_in, "tilde_c_out": args.tc_out}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    edges, labels = out.with_suffix(".edges"), out.with_suffix(".labels")
    write_edge_list(lg.graph, edges)
    write_labels(lg.labels, labels)
    desc["seed"] = args.seed
    write_document(desc, out.with_suffix(".params.json"))
    g = lg.graph
    mean = 2 * g.m / g.n if g.n else 0.0
    print(f"n={g.n} m={g.m} mean_degree={mean:.6g}")
    print(f"wrote {edges} {labels}")
    return 0


def cmd_spectrum(args) -> int:
    g = _load(args.graph)
    kind = args.operator
    if kind == "b_prime":
        op = build_b_prime(g).T if args.left else build_b_prime(g)
    elif kind == "b_edge":
        op = build_b(g)
    else:
        op = classical_operator(g, kind)
    if args.mode == "dense":
        if op.dim > 5000:
            raise UsageError(f"dense mode needs dimension <= 5000, operator has {op.dim}")
        res = dense_spectrum(op)
    else:
        res = topk_eigs(op, SolverOpts(k=args.k, tol=args.tol, seed=args.seed))
        if not res.all_converged:
            log.warning("%d of %d pairs did not converge", int((~res.converged).sum()), len(res))
    meta = {
        "graph": str(args.graph),
        "n": g.n,
        "m": g.m,
        "operator": kind,
        "mode": args.mode,
        "seed": args.seed,
    }
    if args.mode == "topk":
        meta.update(k=args.k, tol=args.tol, converged=[bool(x) for x in res.converged], residuals=res.residuals)
    if kind in ("b_prime", "b_edge") and len(res):
        try:
            outside, count = real_eigs_outside_bulk(res, args.delta)
            lead = float(res.values[0].real)
            meta.update(bulk_radius_estimate=float(np.sqrt(lead)), bulk_margin=args.delta,
                        real_outside=outside, real_outside_count=count)
        except ValueError as exc:
            meta.update(bulk_radius_estimate=None, real_outside_count=0, note=str(exc))
        if kind == "b_prime":
            meta["plus_minus_one_multiplicity"] = g.m - g.n
    if kind == "adjacency" and g.n:
        c = 2 * g.m / g.n
        meta["semicircle"] = {"c": c, "radius": 2 * np.sqrt(c), "density": "sqrt(4c - x^2) / (2 pi c)"}
    write_document(spectrum_document(res.values, meta), args.out)
    msg = f"{len(res)} eigenvalues -> {args.out}"
    if "real_outside_count" in meta:
        msg += f"; real outside bulk: {meta['real_outside_count']}"
    print(msg)
    return 0


def cmd_cluster(args) -> int:
    g = _load(args.graph)
    cfg = ClusterConfig(source=args.source, restarts=args.restarts)
    res = spectral_cluster(g, args.q, args.operator, seed=args.seed, config=cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_labels(res.labeling.labels, out)
    meta = dict(res.meta, graph=str(args.graph))
    truth = _truth(args.truth, args.q, g.n)
    if truth is not None:
        meta["overlap"] = overlap(truth, res.labeling)
        print(f"overlap={meta['overlap']:.6f}")
    write_document(meta, out.with_suffix(out.suffix + ".meta.json"))
    if not meta["converged"]:
        log.warning("eigensolver did not converge for the selected vectors")
    print(f"labels -> {out}")
    return 0


def cmd_bp(args) -> int:
    g = _load(args.graph)
    args.n = g.n
    params = _sbm_params(args)
    res = bp_run(g, params, BpOpts(max_sweeps=args.max_sweeps, tol=args.tol, damping=args.damping, seed=args.seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_labels(res.labeling.labels, out)
    meta = {"graph": str(args.graph), "affinity": params.affinity, "group_fracs": params.group_fracs,
            "seed": args.seed, "converged": res.converged, "sweeps": res.sweeps, "max_change": res.max_change,
            "field": res.state.field}
    truth = _truth(args.truth, params.q, g.n)
    if truth is not None:
        meta["overlap"] = overlap(truth, res.labeling)
        print(f"overlap={meta['overlap']:.6f}")
    write_document(meta, out.with_suffix(out.suffix + ".meta.json"))
    print(f"converged={res.converged} sweeps={res.sweeps} labels -> {out}")
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        vary=args.vary,
        grid=tuple(args.grid),
        n=args.n,
        q=args.q,
        seeds=args.seeds,
        c=args.c,
        ratio=args.ratio,
        algorithms=tuple(args.algorithms),
        base_seed=args.seed,
        bp_max_sweeps=args.bp_max_sweeps,
    )
    out = run_sweep(spec, args.out, threads=args.threads)
    write_document(spec_dict(spec), out.with_name(out.stem + ".spec.json"))
    print(f"records -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="nbclust", description="Non-backtracking spectral clustering toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="sample a planted-partition graph")
    p.add_argument("--model", choices=("sbm", "config"), default="sbm")
    _add_sbm_flags(p)
    p.add_argument("--degrees", type=_degree_dist, help="config model degree law, e.g. 3:1 or 2:0.5,4:0.5")
    p.add_argument("--tc-in", type=float, help="config model within-group branching")
    p.add_argument("--tc-out", type=float, help="config model between-group branching")
    p.add_argument("--out", required=True, help="output stem; writes .edges, .labels and .params.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of an operator")
    p.add_argument("graph")
    p.add_argument("--operator", choices=SPECTRUM_OPERATORS, default="b_prime")
    p.add_argument("--mode", choices=("dense", "topk"), default="topk")
    p.add_argument("--k", type=int, default=8, help="pairs for topk mode")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--delta", type=float, default=0.02, help="bulk exclusion margin")
    p.add_argument("--left", action="store_true", help="use the transposed vertex-pair operator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("cluster", parents=[common], help="spectral clustering")
    p.add_argument("graph")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--operator", choices=ALGORITHMS, default="nb")
    p.add_argument("--source", choices=("vertex_space", "edge_space"), default="vertex_space")
    p.add_argument("--restarts", type=int, default=10, help="k-means restarts")
    p.add_argument("--truth", help="labels file for scoring")
    p.add_argument("--out", required=True, help="labels output path")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("bp", parents=[common], help="belief propagation with known parameters")
    p.add_argument("graph")
    _add_sbm_flags(p, need_n=False)
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--truth")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("sweep", parents=[common], help="overlap and eigenvalue sweep to CSV")
    p.add_argument("--vary", choices=("gap", "c"), default="gap")
    p.add_argument("--grid", type=_floats, required=True, help="comma-separated grid values")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--c", type=float, default=3.0, help="mean degree when varying the gap")
    p.add_argument("--ratio", type=float, default=0.1, help="c_out/c_in when varying c")
    p.add_argument("--algorithms", type=lambda s: s.split(","), default=list(SWEEP_ALGORITHMS))
    p.add_argument("--bp-max-sweeps", type=int, default=500)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"nbclust: error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"nbclust: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"nbclust: error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"nbclust: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
