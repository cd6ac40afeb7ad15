"""Command-line front end for the verification experiments.

Subcommands: ``quasidet``, ``zc``, ``dress``, ``symmetric``.  Exit codes:
0 success, 1 usage error, 2 numerical failure (near-singular data),
3 truncated flow.  Reports are deterministic for fixed parameters and
seed apart from the duration field; the NCPAIN_THREADS environment
variable caps the worker pool used for parameter sweeps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dressing import (CONVENTIONS, DressingChain, SpectralPoint,
                       integrate_linear, masked_iterated, masked_n_fold)
from .grid import GridFunction
from .laxpair import (PiiState, SymState, build_A, build_B, first_integral,
                      integrate_symmetric, lax_residual_symmetric,
                      normalize_first_integral, pii_residual_exact,
                      pii_residual_grid, reduction_check,
                      zero_curvature_residual)
from .quasidet import (BlockMatrix, quasideterminant, quasideterminant_oracle)
from .reports import ExperimentReport, write_grid_csv
from .ring import MatrixElement, NearSingularError, random_invertible

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_TRUNCATED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def max_workers() -> int:
    env = os.environ.get("NCPAIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"NCPAIN_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


def _pool_map(fn, items):
    workers = max_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def parse_complex(text: str) -> complex:
    cleaned = text.strip().replace(" ", "").replace("i", "j").replace("I", "j")
    try:
        return complex(cleaned)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}")


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(part) for part in text.split(",") if part]


def parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must be start:stop:step, got {text!r}")
    try:
        z0, z1, h = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"range must be numeric, got {text!r}")
    if h <= 0 or z1 <= z0:
        raise UsageError("range needs stop > start and step > 0")
    n = round((z1 - z0) / h) + 1
    if n < 2 or abs((n - 1) * h - (z1 - z0)) > 1e-9 * max(1.0, z1 - z0):
        raise UsageError("range is not an integral number of steps")
    return z0, h, n


def _entry_from_json(node) -> MatrixElement:
    if isinstance(node, (int, float)):
        return MatrixElement.scalar(complex(node))
    if isinstance(node, str):
        return MatrixElement.scalar(parse_complex(node))
    if isinstance(node, list):
        rows = []
        for row in node:
            if not isinstance(row, list):
                raise UsageError("matrix entry rows must be lists")
            rows.append([parse_complex(x) if isinstance(x, str)
                         else complex(x) for x in row])
        return MatrixElement(np.array(rows, dtype=complex))
    raise UsageError(f"cannot read matrix entry {node!r}")


def _matrix_from_json(text: str) -> BlockMatrix:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid matrix JSON: {exc}")
    if not isinstance(data, list) or not data:
        raise UsageError("matrix JSON must be a non-empty list of rows")
    return BlockMatrix([[_entry_from_json(x) for x in row] for row in data])


def _matrix_value(el: MatrixElement):
    if el.d == 1:
        return complex(el.data[0, 0])
    return el.data.tolist()


# -- quasidet ---------------------------------------------------------------

def cmd_quasidet(args) -> int:
    t_start = time.perf_counter()
    sources = [s for s in ("inline", "file", "identity", "random")
               if getattr(args, s) is not None]
    if len(sources) != 1:
        raise UsageError("choose exactly one of --inline/--file/"
                         "--identity/--random")
    if args.inline is not None:
        matrix = _matrix_from_json(args.inline)
        source = {"kind": "inline", "text": args.inline}
    elif args.file is not None:
        with open(args.file, encoding="utf-8") as fh:
            matrix = _matrix_from_json(fh.read())
        source = {"kind": "file", "path": args.file}
    elif args.identity is not None:
        if args.identity < 1:
            raise UsageError("--identity needs n >= 1")
        eye = MatrixElement.scalar(1.0)
        zero = MatrixElement.scalar(0.0)
        matrix = BlockMatrix([[eye if i == j else zero
                               for j in range(args.identity)]
                              for i in range(args.identity)])
        source = {"kind": "identity", "n": args.identity}
    else:
        n, d = args.random
        if n < 1 or d < 1:
            raise UsageError("--random needs n >= 1 and d >= 1")
        rng = np.random.default_rng(args.seed)
        matrix = BlockMatrix([[random_invertible(rng, d)
                               for _ in range(n)] for _ in range(n)])
        source = {"kind": "random", "n": n, "d": d, "seed": args.seed}
    if not matrix.is_square:
        raise UsageError("quasideterminants need a square matrix")
    i, j = args.pos
    if not (1 <= i <= matrix.n and 1 <= j <= matrix.n):
        raise UsageError(f"position ({i},{j}) outside {matrix.n}x{matrix.n}")

    value = quasideterminant(matrix, i - 1, j - 1)
    oracle = quasideterminant_oracle(matrix, i - 1, j - 1)
    diff = (value - oracle).norm()
    rel = diff / max(1.0, value.norm())
    print(f"quasideterminant ({i},{j}): {_matrix_value(value)}")
    print(f"oracle value:            {_matrix_value(oracle)}")
    print(f"discrepancy:             {rel:.6e}")

    report = ExperimentReport(
        experiment="quasidet",
        parameters={"source": source, "pos": [i, j], "seed": args.seed},
        results={
            "value": _matrix_value(value),
            "oracle": _matrix_value(oracle),
            "discrepancy_abs": diff,
            "discrepancy_rel": rel,
        },
        duration_s=time.perf_counter() - t_start,
    )
    report.write(args.out, "quasidet_report.json")
    return EXIT_OK


# -- zc ----------------------------------------------------------------------

def _zc_case_stats(state: PiiState) -> dict:
    res = zero_curvature_residual(state)
    a = build_A(state)
    b = build_B(state.v, state.lam)
    scale = max(1.0, a.norm() * b.norm())
    pii = pii_residual_exact(state.v, state.v_zz, state.z, state.C)
    one_minus = res.entry(0, 1) + 1j * pii
    one_plus = res.entry(1, 0) - 1j * pii
    return {
        "e11": res.entry(0, 0).norm() / scale,
        "e22": res.entry(1, 1).norm() / scale,
        "e12_identity": one_minus.norm() / scale,
        "e21_identity": one_plus.norm() / scale,
        "full": res.norm() / scale,
        "pii_norm": pii.norm(),
    }


def cmd_zero_curvature(args) -> int:
    t_start = time.perf_counter()
    lambdas = parse_complex_list(args.lam)
    if not lambdas:
        raise UsageError("--lambda needs at least one value")
    if any(lam == 0 for lam in lambdas):
        raise UsageError("lambda = 0 is not allowed")
    if args.seed_kind in ("random", "random-placeholders"):
        kind = "random"
    elif args.seed_kind == "rational":
        kind = "rational"
    else:
        raise UsageError(f"unknown seed kind {args.seed_kind!r}")

    cases = []
    if kind == "rational":
        sign = args.rational_sign
        c_val = parse_complex(args.C) if args.C is not None else 4.0 * sign
        d = args.d
        eye = MatrixElement.eye(d)
        for z in np.linspace(1.0, 2.0, 9):
            v = (sign / z) * eye
            v_z = (-sign / z ** 2) * eye
            v_zz = (2 * sign / z ** 3) * eye
            cases.append((v, v_z, v_zz, complex(z), c_val))
    else:
        rng = np.random.default_rng(args.seed)
        for _ in range(args.trials):
            d = args.d
            v = MatrixElement(rng.standard_normal((d, d))
                              + 1j * rng.standard_normal((d, d)))
            v_z = MatrixElement(rng.standard_normal((d, d))
                                + 1j * rng.standard_normal((d, d)))
            v_zz = MatrixElement(rng.standard_normal((d, d))
                                 + 1j * rng.standard_normal((d, d)))
            z = complex(rng.standard_normal(), rng.standard_normal())
            c_val = (parse_complex(args.C) if args.C is not None
                     else complex(rng.standard_normal(),
                                  rng.standard_normal()))
            cases.append((v, v_z, v_zz, z, c_val))

    def sweep(lam):
        worst = {"e11": 0.0, "e22": 0.0, "e12_identity": 0.0,
                 "e21_identity": 0.0, "full": 0.0}
        for v, v_z, v_zz, z, c_val in cases:
            stats = _zc_case_stats(PiiState(v, v_z, v_zz, z, lam, c_val))
            for key in worst:
                worst[key] = max(worst[key], stats[key])
        return worst

    per_lambda = _pool_map(sweep, lambdas)
    overall = {key: max(p[key] for p in per_lambda)
               for key in per_lambda[0]}
    for lam, stats in zip(lambdas, per_lambda):
        print(f"lambda = {lam}: max diagonal residual "
              f"{max(stats['e11'], stats['e22']):.3e}, "
              f"identity residual {stats['e12_identity']:.3e}")
    print(f"overall max entry(1,2) identity residual: "
          f"{overall['e12_identity']:.3e}")

    report = ExperimentReport(
        experiment="zero_curvature",
        parameters={
            "seed_kind": kind, "d": args.d,
            "lambdas": lambdas, "C": args.C,
            "rational_sign": args.rational_sign,
            "trials": args.trials, "seed": args.seed,
        },
        results={
            "per_lambda": [{"lambda": lam, **stats}
                           for lam, stats in zip(lambdas, per_lambda)],
            "overall": overall,
        },
        duration_s=time.perf_counter() - t_start,
    )
    report.write(args.out, "zc_report.json")
    return EXIT_OK


# -- dress --------------------------------------------------------------------

def _seed_evaluator(kind: str, d: int):
    eye = MatrixElement.eye(d)
    if kind == "rational":
        return lambda z: (1.0 / z) * eye
    if kind == "rational-neg":
        return lambda z: (-1.0 / z) * eye
    if kind == "zero":
        zero = MatrixElement.zeros(d)
        return lambda z: zero
    raise UsageError(f"unknown seed kind {kind!r}")


def _residual_stats(grid: GridFunction, mask: np.ndarray, c_val: complex
                    ) -> dict:
    residual = pii_residual_grid(grid, c_val)
    stencil_ok = mask[:-2] & mask[1:-1] & mask[2:]
    valid = int(stencil_ok.sum())
    stats = {
        "masked_fraction": float(1.0 - mask.mean()),
        "stencil_points": valid,
    }
    if valid:
        stats["residual_sup"] = residual.sup_norm(stencil_ok)
        stats["residual_mean"] = residual.mean_norm(stencil_ok)
    else:
        stats["residual_sup"] = None
        stats["residual_mean"] = None
    return stats


def cmd_dressing(args) -> int:
    t_start = time.perf_counter()
    if not (0 <= args.N <= 4):
        raise UsageError("--N must be between 0 and 4")
    gammas = parse_complex_list(args.gamma) if args.gamma else []
    if len(set(gammas)) != len(gammas):
        raise UsageError("--gamma values must be pairwise distinct")
    if len(gammas) < args.N:
        raise UsageError(f"--N {args.N} needs at least {args.N} gamma values")
    z0, h, n = parse_range(args.z)
    c_val = parse_complex(args.C)
    seed_fn = _seed_evaluator(args.seed, args.d)
    if args.convention not in CONVENTIONS:
        raise UsageError(f"--dt-convention must be one of {CONVENTIONS}")

    seed_grid = GridFunction.sample(seed_fn, z0, h, n)
    one = seed_grid[0].one_like()

    def eigenpair(gamma):
        chi, phi = integrate_linear(seed_fn, gamma, (one, one), z0, h, n,
                                    convention=args.convention)
        return SpectralPoint(gamma, chi, phi)

    points = _pool_map(eigenpair, gammas)
    chain = DressingChain(tuple(points), seed_grid, c_val)

    grids, masks = masked_n_fold(chain, args.N)
    stage_stats = []
    for k, (grid, mask) in enumerate(zip(grids, masks)):
        stats = _residual_stats(grid, mask, c_val)
        stage_stats.append({"stage": k, **stats})
        csv_path = os.path.join(args.out, f"dress_v{k}.csv")
        write_grid_csv(csv_path, grid)

    if args.N >= 1:
        direct, direct_mask = masked_iterated(chain, args.N)
        common = masks[args.N] & direct_mask
        if common.any():
            diffs = [(a - b).norm()
                     for a, b, ok in zip(grids[args.N].values, direct.values,
                                         common) if ok]
            ref = max(grids[args.N].sup_norm(common), 1.0)
            discrepancy = max(diffs) / ref
        else:
            discrepancy = None
    else:
        discrepancy = None

    for entry in stage_stats:
        sup = entry["residual_sup"]
        sup_text = f"{sup:.3e}" if sup is not None else "n/a"
        print(f"stage {entry['stage']}: residual sup {sup_text}, "
              f"masked fraction {entry['masked_fraction']:.3f}")
    if discrepancy is not None:
        print(f"quasideterminant vs direct discrepancy: {discrepancy:.3e}")

    report = ExperimentReport(
        experiment="dressing",
        parameters={
            "N": args.N, "gammas": gammas, "seed_kind": args.seed,
            "C": c_val, "z0": z0, "h": h, "points": n, "d": args.d,
            "dt_convention": args.convention,
        },
        results={
            "stages": stage_stats,
            "quasidet_vs_direct": discrepancy,
        },
        conventions={"dt_convention": args.convention},
        duration_s=time.perf_counter() - t_start,
    )
    report.write(args.out, "dress_report.json")
    return EXIT_OK


# -- symmetric ----------------------------------------------------------------

def cmd_symmetric(args) -> int:
    t_start = time.perf_counter()
    t0, h, n = parse_range(args.t)
    if args.random_matrix is not None:
        d = args.random_matrix
        if d < 1:
            raise UsageError("--random-matrix needs d >= 1")
        rng = np.random.default_rng(args.seed)
        v0 = random_invertible(rng, d, scale=0.5)
        v1 = random_invertible(rng, d, scale=0.5)
        v2 = random_invertible(rng, d, scale=0.5)
        data_desc = {"kind": "random", "d": d, "seed": args.seed}
    else:
        v0 = MatrixElement.scalar(parse_complex(args.v0))
        v1 = MatrixElement.scalar(parse_complex(args.v1))
        v2 = MatrixElement.scalar(parse_complex(args.v2))
        data_desc = {"kind": "scalar", "v0": parse_complex(args.v0),
                     "v1": parse_complex(args.v1),
                     "v2": parse_complex(args.v2)}
    alpha0 = parse_complex(args.alpha0)
    alpha1 = parse_complex(args.alpha1)
    state = SymState(v0, v1, v2, alpha0, alpha1, t0)
    if args.normalize:
        if abs(alpha0 + alpha1 - 2.0) > 1e-12:
            raise UsageError("--normalize requires alpha0 + alpha1 = 2")
        state = normalize_first_integral(state)

    flow = integrate_symmetric(state, t0 + (n - 1) * h, h,
                               min_condition=args.min_cond)
    states = flow.states

    sample_count = min(11, len(states))
    sample_idx = sorted({round(i * (len(states) - 1) / (sample_count - 1))
                         for i in range(sample_count)}) \
        if len(states) > 1 else [0]
    lax_samples = []
    for idx in sample_idx:
        s = states[idx]
        try:
            res = lax_residual_symmetric(s)
            scale = max(1.0, s.v0.norm() + s.v1.norm() + s.v2.norm())
            lax_samples.append({"t": s.t, "residual": res.norm() / scale})
        except NearSingularError as exc:
            lax_samples.append({"t": s.t, "residual": None,
                                "error": str(exc)})

    f0 = first_integral(states[0])
    drift = max((first_integral(s) - f0).norm() for s in states)

    reduction = None
    if args.normalize and not flow.truncated and len(states) >= 5:
        residual = reduction_check(states)
        reduction = {"sup": residual.sup_norm(),
                     "mean": residual.mean_norm()}

    lax_worst = max((s["residual"] for s in lax_samples
                     if s["residual"] is not None), default=None)
    if lax_worst is not None:
        print(f"max sampled Lax residual: {lax_worst:.3e}")
    print(f"first-integral drift: {drift:.3e}")
    if reduction is not None:
        print(f"reduction residual sup: {reduction['sup']:.3e}")
    if flow.truncated:
        print(f"flow truncated: {flow.reason}", file=sys.stderr)

    report = ExperimentReport(
        experiment="symmetric",
        parameters={
            "data": data_desc, "alpha0": alpha0, "alpha1": alpha1,
            "t0": t0, "h": h, "steps": n - 1,
            "normalize": bool(args.normalize), "min_cond": args.min_cond,
            "seed": args.seed,
        },
        results={
            "truncated": flow.truncated,
            "truncation_reason": flow.reason,
            "states_covered": len(states),
            "lax_samples": lax_samples,
            "first_integral_drift": drift,
            "reduction": reduction,
        },
        duration_s=time.perf_counter() - t_start,
    )
    report.write(args.out, "symmetric_report.json")
    return EXIT_TRUNCATED if flow.truncated else EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncpain",
                     description="Noncommutative Painleve II experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_q = sub.add_parser("quasidet", help="quasideterminant vs oracle")
    p_q.add_argument("--inline", help="matrix as JSON rows")
    p_q.add_argument("--file", help="path to a JSON matrix")
    p_q.add_argument("--identity", type=int,
                     help="n x n scalar identity matrix")
    p_q.add_argument("--random", type=int, nargs=2, metavar=("N", "D"),
                     help="random invertible N x N matrix of D x D entries")
    p_q.add_argument("--pos", type=int, nargs=2, required=True,
                     metavar=("I", "J"), help="1-based position")
    p_q.add_argument("--seed", type=int, default=0)
    p_q.add_argument("--out", default=".")
    p_q.set_defaults(handler=cmd_quasidet)

    p_z = sub.add_parser("zc", help="zero-curvature residual checks")
    p_z.add_argument("--seed-kind", dest="seed_kind", default="random",
                     help="rational or random")
    p_z.add_argument("--d", type=int, default=2)
    p_z.add_argument("--C", default=None)
    p_z.add_argument("--lambda", dest="lam", default="1,i,2-3i")
    p_z.add_argument("--rational-sign", dest="rational_sign", type=int,
                     choices=(1, -1), default=1)
    p_z.add_argument("--trials", type=int, default=25)
    p_z.add_argument("--seed", type=int, default=0)
    p_z.add_argument("--out", default=".")
    p_z.set_defaults(handler=cmd_zero_curvature)

    p_d = sub.add_parser("dress", help="Darboux dressing pipeline")
    p_d.add_argument("--N", type=int, required=True)
    p_d.add_argument("--gamma", default="",
                     help="comma-separated dressing parameters")
    p_d.add_argument("--seed", default="rational",
                     help="seed solution: rational, rational-neg or zero")
    p_d.add_argument("--C", default="4")
    p_d.add_argument("--z", default="1:2:0.001", help="grid start:stop:step")
    p_d.add_argument("--d", type=int, default=1)
    p_d.add_argument("--dt-convention", dest="convention",
                     default="b-matrix", help="b-matrix or d7")
    p_d.add_argument("--out", default=".")
    p_d.set_defaults(handler=cmd_dressing)

    p_s = sub.add_parser("symmetric", help="symmetric three-field flow")
    p_s.add_argument("--v0", default="0.1")
    p_s.add_argument("--v1", default="1")
    p_s.add_argument("--v2", default="0.3")
    p_s.add_argument("--random-matrix", dest="random_matrix", type=int,
                     default=None, help="use random d x d matrix data")
    p_s.add_argument("--alpha0", default="0.5")
    p_s.add_argument("--alpha1", default="1.5")
    p_s.add_argument("--t", default="0:1:0.001", help="flow start:stop:step")
    p_s.add_argument("--normalize", action="store_true",
                     help="zero the first integral (needs alpha sum 2)")
    p_s.add_argument("--min-cond", dest="min_cond", type=float, default=1e-12)
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--out", default=".")
    p_s.set_defaults(handler=cmd_symmetric)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NearSingularError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
