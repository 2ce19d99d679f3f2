"""Command-line front end.

Subcommands: spectrum, green, converge, verify, chain-demo, chernoff.
Every run writes plain CSV data files plus a JSON summary into --out; CSV
bodies are byte-identical across runs with the same config and seed
(timestamps live only in the JSON metadata).  Exit status is 0 iff every
selected check passed its tolerance.
"""

from __future__ import annotations

import argparse
import math
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .base import (
    BaseSpecError,
    chain_bead_centers,
    default_chain_spec,
    build_chain,
    load_base,
)
from .convolution import (
    chernoff_bound,
    chernoff_threshold_details,
    exact_convolution,
    tail_mass,
)
from .cylinder import CylinderPoint, GreenEvaluator, fit_exponent
from .spectral import SpectralError, decompose, exponent_ladder
from .verify import (
    UnknownSuiteError,
    check_ratio_limit,
    check_small_time_ratio,
    run_suite,
)

_ALPHA_FIT_WINDOW = (2.0, 6.0)
_ALPHA_FIT_POINTS = 9


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_summary(path: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["metadata"] = dict(payload.get("metadata", {}))
    payload["metadata"]["tool"] = f"cylpot {__version__}"
    payload["metadata"]["generated_unix"] = int(time.time())
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return np.asarray(obj, dtype=float).tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def _load_evaluator(args):
    base = load_base(args.base)
    spec = decompose(base)
    return base, spec, GreenEvaluator(spec=spec, base=base)


def _base_metadata(base, spec) -> dict:
    ladder = exponent_ladder(spec)
    return {
        "kind": base.kind,
        "n": base.n,
        "d": base.d,
        "b": base.b,
        "reference_node": base.reference_node,
        "lambda1": ladder.lambda1,
        "alpha_min": ladder.alpha_min,
        "alpha_zero": ladder.alpha_zero,
        "alpha_max": ladder.alpha_max,
        "mass_total": float(np.sum(base.mass)),
    }


def cmd_spectrum(args) -> int:
    base, spec, _ = _load_evaluator(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        (k + 1, spec.eigenvalues[k], spec.mu[k]) for k in range(spec.n)
    ]
    write_csv(out / "spectrum.csv", ("k", "lambda", "mu"), rows)
    n_modes = spec.n if args.modes in (None, 0) else min(args.modes, spec.n)
    vec_rows = [
        (i, k + 1, spec.eigenvectors[i, k])
        for k in range(n_modes)
        for i in range(spec.n)
    ]
    write_csv(out / "eigenvectors.csv", ("node", "k", "value"), vec_rows)
    write_summary(
        out / "spectrum.json",
        {"command": "spectrum", "seed": args.seed, "base": _base_metadata(base, spec)},
    )
    return 0


def cmd_green(args) -> int:
    base, spec, ev = _load_evaluator(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pole = CylinderPoint(args.pole_u, args.pole_node)
    points = []
    with open(args.points, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("u", ""):
                continue
            points.append(CylinderPoint(float(row[0]), int(row[1])))
    rows = []
    for p in points:
        lg = ev.log_green(p, pole)
        rows.append((p.u, p.node, pole.u, pole.node, np.exp(lg), lg))
    write_csv(
        out / "green.csv",
        ("u", "node", "v", "nodePole", "value", "logValue"),
        rows,
    )
    write_summary(
        out / "green.json",
        {
            "command": "green",
            "seed": args.seed,
            "pole": {"u": pole.u, "node": pole.node},
            "points": len(points),
            "base": _base_metadata(base, spec),
        },
    )
    return 0


def cmd_converge(args) -> int:
    base, spec, ev = _load_evaluator(args)
    poles_v = np.arange(2.0, args.v_max + 1e-9, args.v_step)
    if poles_v.size == 0:
        print("error: pole grid is empty (v-max below the first pole)", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    u_grid = np.arange(-2.0, 2.0 + 1e-9, 0.5)
    stride = max(1, spec.n // 64)
    nodes = np.arange(0, spec.n, stride)
    sups = []
    for v in poles_v:
        pole = CylinderPoint(float(v), ev.reference.node)
        dev = ev.martin_deviation_from_f_plus(pole, u_grid, nodes)
        sups.append(float(np.max(np.abs(dev))))
    sups = np.asarray(sups)
    write_csv(out / "converge.csv", ("v", "sup_deviation"), list(zip(poles_v, sups)))
    sm = np.sqrt(np.asarray(spec.mu, dtype=float))
    expected = -(sm[1] - sm[0])
    # Fit where the next-order mode's predicted contamination is below 1%.
    v_fit_min = float(u_grid.max()) + math.log(100.0) / (sm[2] - sm[1])
    mask = poles_v >= v_fit_min
    if np.count_nonzero(mask) < 3:
        mask = np.ones_like(poles_v, dtype=bool)
    fit = fit_exponent(list(zip(poles_v[mask], sups[mask])))
    rel_dev = abs(fit.alpha_hat - expected) / abs(expected)
    decreasing = bool(np.all(np.diff(sups) < 0.0))
    passed = decreasing and rel_dev <= args.tol_rate
    write_summary(
        out / "converge.json",
        {
            "command": "converge",
            "seed": args.seed,
            "base": _base_metadata(base, spec),
            "fitted_rate": fit.alpha_hat,
            "expected_rate": expected,
            "rel_deviation": rel_dev,
            "fit_window": [v_fit_min, float(poles_v.max())],
            "strictly_decreasing": decreasing,
            "passed": passed,
        },
    )
    return 0 if passed else 1


def cmd_verify(args) -> int:
    base, spec, ev = _load_evaluator(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suites = [s.strip() for s in args.suite.split(",") if s.strip()]
    config = {
        "count": args.count,
        "tol_exact": args.tol_exact,
        "collect_samples": args.per_sample,
    }
    try:
        reports = run_suite(ev, suites or ("all",), config=config, seed=args.seed)
    except UnknownSuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "command": "verify",
        "seed": args.seed,
        "base": _base_metadata(base, spec),
        "suites": {name: rep.to_dict() for name, rep in reports.items()},
    }
    write_summary(out / "verify.json", payload)
    if args.per_sample:
        for name, rep in reports.items():
            if rep.samples:
                cols = rep.extras.get("sample_columns", ())
                write_csv(out / f"samples_{name}.csv", cols, rep.samples)
    rows = [
        (name, rep.status, rep.passed, rep.sample_count, rep.max_violation, rep.tolerance)
        for name, rep in reports.items()
    ]
    write_csv(
        out / "verify.csv",
        ("suite", "status", "passed", "samples", "max_violation", "tolerance"),
        rows,
    )
    for name, rep in reports.items():
        line = "PASS" if rep.passed else "FAIL"
        print(f"[{line}] {name}: max violation {rep.max_violation:.3e} vs {rep.tolerance:.3e}")
    return 0 if all(rep.passed for rep in reports.values()) else 1


def cmd_chain_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chain = default_chain_spec(
        bead_count=args.beads,
        bead_nodes=args.bead_nodes,
        neck_ratio=args.neck_ratio,
    )
    base = build_chain(chain, d=4)
    spec = decompose(base)
    ev = GreenEvaluator(spec=spec, base=base)
    centers = chain_bead_centers(base)

    small = check_small_time_ratio(
        spec, lam=args.lam, t0=args.t0, x=base.reference_node, y_sequence=centers
    )
    ratio = check_ratio_limit(
        spec, b=base.b, rho=1.0, rho_prime=0.0, x=base.reference_node,
        y_sequence=centers, base=base,
    )
    u_fit = np.linspace(*_ALPHA_FIT_WINDOW, _ALPHA_FIT_POINTS)
    alpha_hats = []
    for node in centers:
        kernel = ev.martin_kernel(CylinderPoint(0.0, int(node)))
        vals = [
            (u, np.exp(kernel.log_value(CylinderPoint(u, ev.reference.node))))
            for u in u_fit
        ]
        alpha_hats.append(fit_exponent(vals).alpha_hat)
    alpha_hats = np.asarray(alpha_hats)

    ratios = small.extras["ratios"]
    devs = ratio.extras["deviations"]
    rows = [
        (j + 1, int(centers[j]), ratios[j], devs[j], alpha_hats[j])
        for j in range(len(centers))
    ]
    write_csv(
        out / "chain_demo.csv",
        ("bead", "node", "small_time_ratio", "ratio_limit_deviation", "alpha_hat"),
        rows,
    )
    alpha_target = spec.alpha_zero
    checks = {
        "deep_small_time_ratio": float(ratios[-1]),
        "deep_small_time_ok": bool(ratios[-1] < 0.05),
        "deep_ratio_limit_deviation": float(devs[-1]),
        "deep_ratio_limit_ok": bool(devs[-1] <= 0.10),
        "deep_alpha_hat": float(alpha_hats[-1]),
        "alpha_target": float(alpha_target),
        "deep_alpha_ok": bool(abs(alpha_hats[-1] - alpha_target) <= 0.10),
    }
    write_summary(
        out / "chain_demo.json",
        {
            "command": "chain-demo",
            "seed": args.seed,
            "chain": {
                "beads": chain.bead_count,
                "bead_nodes": chain.bead_nodes,
                "neck_ratio": chain.neck_ratio,
                "anchor_nodes": chain.anchor_nodes,
                "radius_sq_sum": chain.radius_sq_sum,
                "divergence_proxy_met": chain.divergence_proxy_met,
            },
            "base": _base_metadata(base, spec),
            "checks": checks,
        },
    )
    ok = checks["deep_small_time_ok"] and checks["deep_ratio_limit_ok"] and checks["deep_alpha_ok"]
    for key in ("deep_small_time_ratio", "deep_ratio_limit_deviation", "deep_alpha_hat"):
        print(f"{key}: {checks[key]:.6g}")
    return 0 if ok else 1


def cmd_chernoff(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.atoms:
        delays = []
        with open(args.atoms, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    delays.append(float(line))
    else:
        delays = [1.0] * 20
    dist = exact_convolution(delays)
    exact = tail_mass(dist, args.tail_len)
    betas = np.arange(0.05, 5.0001, 0.05)
    bounds = [chernoff_bound(delays, args.tail_len, b) for b in betas]
    best = int(np.argmin(bounds))
    thr = chernoff_threshold_details(args.tail_len, args.eps)
    write_csv(
        out / "distribution.csv",
        ("support", "mass"),
        dist.as_rows(),
    )
    sound = bool(bounds[best] >= exact - 1e-12)
    write_summary(
        out / "chernoff.json",
        {
            "command": "chernoff",
            "seed": args.seed,
            "delays": len(delays),
            "delay_sum": float(np.sum(delays)),
            "tail_len": args.tail_len,
            "exact_tail": exact,
            "best_bound": bounds[best],
            "best_bound_beta": float(betas[best]),
            "bound_dominates_exact": sound,
            "threshold": {
                "eps": args.eps,
                "value": thr.threshold,
                "beta": thr.beta,
            },
        },
    )
    print(f"exact tail mass on [-{args.tail_len}, 0]: {exact!r}")
    print(f"best sampled bound: {bounds[best]!r} at beta={betas[best]:.2f}")
    print(f"threshold A(L={args.tail_len}, eps={args.eps}): {thr.threshold:.6g}")
    return 0 if sound else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cylpot",
        description="Green's function / Martin kernel laboratory on product cylinders",
    )
    parser.add_argument("--version", action="version", version=f"cylpot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=1234, help="sample seed, recorded in outputs")

    p = sub.add_parser("spectrum", help="eigendecomposition, exponent ladder, CSV export")
    common(p)
    p.add_argument("--base", required=True, help="base-spec JSON path")
    p.add_argument("--modes", type=int, default=12, help="eigenvector modes to export (0 = all)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("green", help="batch Green's function evaluation at a fixed pole")
    common(p)
    p.add_argument("--base", required=True)
    p.add_argument("--points", required=True, help="CSV of (u, node) evaluation points")
    p.add_argument("--pole-u", type=float, required=True)
    p.add_argument("--pole-node", type=int, required=True)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("converge", help="Martin kernel convergence toward the canonical solution")
    common(p)
    p.add_argument("--base", required=True)
    p.add_argument("--v-max", type=float, default=40.0)
    p.add_argument("--v-step", type=float, default=2.0)
    p.add_argument("--tol-rate", type=float, default=0.10)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("verify", help="inequality/limit verification suites")
    common(p)
    p.add_argument("--base", required=True)
    p.add_argument("--suite", default="all", help="comma-separated suite names")
    p.add_argument("--count", type=int, default=10_000, help="samples per sweep suite")
    p.add_argument("--tol-exact", type=float, default=1e-12,
                   help="tolerance of the exactness suites")
    p.add_argument("--per-sample", action="store_true",
                   help="also write per-sample CSV tables")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("chain-demo", help="bead-chain contrast experiments")
    common(p)
    p.add_argument("--beads", type=int, default=40)
    p.add_argument("--bead-nodes", type=int, default=8)
    p.add_argument("--neck-ratio", type=float, default=None)
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.set_defaults(func=cmd_chain_demo)

    p = sub.add_parser("chernoff", help="exact two-point convolutions and tail bounds")
    common(p)
    p.add_argument("--atoms", default=None, help="CSV of delays, one per line")
    p.add_argument("--L", dest="tail_len", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(func=cmd_chernoff)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "neck_ratio", "missing") is None:
        from .base import DEFAULT_NECK_RATIO

        args.neck_ratio = DEFAULT_NECK_RATIO
    try:
        return args.func(args)
    except (BaseSpecError, SpectralError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
