"""Command-line interface: ``lattice-approx <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .approximation import (
    KernelProductFunction,
    apply_lattice_algorithm,
    exact_l2_error,
    kernel_product_l2_error,
    make_test_function,
    sample_lattice,
)
from .bounds import approx_error_bound, auto_M, bound_report, lambda_grid, simplified_bound
from .cbc import cbc_construct
from .criterion import s_d, s_d_oracle, t_ds, worst_case_integration_error
from .errors import BudgetExceededError
from .index_set import enumerate_index_set
from .korobov import CriterionContext, FourierPolynomial, SpaceParams
from .lattice import GeneratingVector, is_prime
from .vectorfile import format_vector, read_vector
from .weights import WeightModel

EXIT_OK = 0
EXIT_BAD_N = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_BUDGET = 5

DEFAULT_SEED = 20240101
THREADS_ENV = "LATTICE_APPROX_THREADS"


class ConfigError(ValueError):
    pass


class InvalidN(ValueError):
    pass


def _load_json(text: str, what: str):
    """Parse ``text`` as inline JSON, or as a path to a JSON file."""
    source = text
    if not text.lstrip().startswith(("{", "[")):
        try:
            source = Path(text).read_text()
        except OSError as exc:
            raise OSError(f"cannot read {what} file {text!r}: {exc.strerror}") from None
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid {what} JSON: {exc}") from None


def _load_weights(text: str) -> WeightModel:
    cfg = _load_json(text, "weights")
    try:
        return WeightModel.from_config(cfg)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid weights: {exc}") from None


def _check_n(n: int) -> int:
    if not is_prime(n):
        raise InvalidN(f"n = {n} is not prime")
    return n


def _context(args, n: int, weights: WeightModel) -> CriterionContext:
    return CriterionContext.make(args.alpha, weights, _check_n(n))


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dumps(obj) -> str:
    # json writes floats via repr, which round-trips exactly
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def _parse_grid(text: str | None, alpha: float) -> list[float]:
    if text is None:
        return lambda_grid(alpha)
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad lambda grid {text!r}") from None
    if len(values) == 1 and values[0] < 0.5 and values[0] > 0:
        # a lone small number is read as the grid step
        return lambda_grid(alpha, values[0])
    return values


# -- subcommands -----------------------------------------------------------


def cmd_construct(args) -> int:
    weights = _load_weights(args.weights)
    ctx = _context(args, args.n, weights)
    result = cbc_construct(ctx, args.d)
    meta = {
        "alpha": float(args.alpha),
        "weights": weights.digest(),
        "T_final": result.minima[-1],
        "S_d": s_d(ctx, result.z, weights.restrict(result.z.d) if result.z.d < weights.d else None),
    }
    text = format_vector(result.z, meta)
    _emit(text, args.out)
    return EXIT_OK


def _vector_weights(z: GeneratingVector, weights: WeightModel) -> WeightModel:
    if weights.d < z.d:
        raise ConfigError(f"weights cover d={weights.d} but the vector has d={z.d}")
    return weights.restrict(z.d) if weights.d > z.d else weights


def cmd_criterion(args) -> int:
    z, _ = read_vector(args.vector)
    weights = _vector_weights(z, _load_weights(args.weights))
    ctx = _context(args, z.n, weights)
    report = {
        "n": z.n,
        "d": z.d,
        "alpha": float(args.alpha),
        "S_d": s_d(ctx, z),
        "e_int": worst_case_integration_error(ctx, z),
        "T_ds": [t_ds(ctx, z.head(s), z.d) for s in range(1, z.d + 1)],
    }
    if args.oracle is not None:
        oracle = s_d_oracle(ctx, z, H=args.oracle)
        report["S_d_oracle"] = oracle.value
        report["oracle_H"] = oracle.H
        report["oracle_tail_bound"] = oracle.tail_bound
        report["oracle_abs_diff"] = abs(report["S_d"] - oracle.value)
    _emit(_dumps(report), args.out)
    return EXIT_OK


def cmd_indexset(args) -> int:
    weights = _load_weights(args.weights)
    index_set = enumerate_index_set(SpaceParams(args.alpha, weights), args.M, budget=args.budget)
    _emit(index_set.dumps(), args.out)
    return EXIT_OK


def _build_function(fdef, params: SpaceParams, seed: int):
    if not isinstance(fdef, dict) or "kind" not in fdef:
        raise ConfigError("function JSON must be an object with a 'kind' key")
    kind = fdef["kind"]
    try:
        if kind == "polynomial":
            terms = {}
            for row in fdef["terms"]:
                h = tuple(int(v) for v in row[: params.d])
                re, im = (list(row[params.d :]) + [0.0, 0.0])[:2]
                terms[h] = complex(float(re), float(im))
            return FourierPolynomial(terms, params.d, real=bool(fdef.get("real", False)))
        options = {k: v for k, v in fdef.items() if k != "kind"}
        if kind == "random":
            options.setdefault("seed", seed)
        return make_test_function(kind, params, **options)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid function fdef: {exc}") from None


def _l2_error(f, z: GeneratingVector, index_set) -> float:
    if isinstance(f, KernelProductFunction):
        return kernel_product_l2_error(f, z, index_set)
    return exact_l2_error(f, z, index_set)


def _write_coefficients(path, approx: FourierPolynomial) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"h{j + 1}" for j in range(approx.d)] + ["re", "im"])
        for h, c in sorted(approx.terms.items()):
            c = complex(c)
            writer.writerow([*h, format(c.real, ".17g"), format(c.imag, ".17g")])


def cmd_approx(args) -> int:
    z, _ = read_vector(args.vector)
    weights = _vector_weights(z, _load_weights(args.weights))
    ctx = _context(args, z.n, weights)
    f = _build_function(_load_json(args.function, "function"), ctx.space, args.seed)
    index_set = enumerate_index_set(ctx.space, args.M, budget=args.budget)
    approx = apply_lattice_algorithm(sample_lattice(f, z), z, index_set)
    s_value = s_d(ctx, z)
    norm = f.norm_squared(ctx.space)
    report = {
        "n": z.n,
        "d": z.d,
        "M": float(args.M),
        "index_set_size": len(index_set),
        "S_d": s_value,
        "l2_error": _l2_error(f, z, index_set),
        "norm": math.sqrt(norm),
        "bound": math.sqrt(norm) * approx_error_bound(args.M, s_value),
        "coefficients_path": None,
    }
    if args.coefficients:
        _write_coefficients(args.coefficients, approx)
        report["coefficients_path"] = str(args.coefficients)
    _emit(_dumps(report), args.out)
    return EXIT_OK


def _vector_for(args, ctx: CriterionContext) -> GeneratingVector:
    if getattr(args, "vector", None):
        z, _ = read_vector(args.vector)
        if z.n != ctx.n:
            raise ConfigError(f"vector file has n={z.n}, expected {ctx.n}")
        return z
    return cbc_construct(ctx).z


def cmd_bound(args) -> int:
    weights = _load_weights(args.weights)
    if args.vector:
        z, _ = read_vector(args.vector)
        n = z.n
        weights = _vector_weights(z, weights)
    else:
        n = args.n
        if n is None:
            raise ConfigError("bound needs --n or --vector")
    ctx = _context(args, n, weights)
    z = _vector_for(args, ctx)
    s_value = s_d(ctx, z)
    grid = _parse_grid(args.lambda_grid, args.alpha)
    records = [bound_report(ctx, s_value, lam, args.M) for lam in grid]
    best = min(records, key=lambda rec: rec["bound"])
    report = {"z": list(z.z), "records": records, "best": best}
    _emit(_dumps(report), args.out)
    return EXIT_OK


def _sweep_row(n: int, args, weights: WeightModel, functions: list) -> dict:
    ctx = _context(args, n, weights)
    z = cbc_construct(ctx).z
    s_value = s_d(ctx, z)
    M = auto_M(n, args.lam)
    row = {
        "n": n,
        "M": M,
        "S_d": s_value,
        "bound": approx_error_bound(M, s_value),
        "simplified": simplified_bound(ctx, args.lam),
    }
    index_set = enumerate_index_set(ctx.space, M, budget=args.budget)
    for name, f in functions:
        row[f"l2_error_{name}"] = _l2_error(f, z, index_set)
    return row


def cmd_sweep(args) -> int:
    weights = _load_weights(args.weights)
    try:
        ns = [int(v) for v in args.n_list.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --n-list {args.n_list!r}") from None
    for n in ns:
        _check_n(n)
    params = SpaceParams(args.alpha, weights)
    if args.functions:
        fdefs = _load_json(args.functions, "functions")
        if isinstance(fdefs, dict):
            fdefs = [fdefs]
    else:
        fdefs = [{"kind": "kernel_product", "c": [1.0 / (j + 1) ** 2 for j in range(weights.d)]}]
    functions = []
    for i, fdef in enumerate(fdefs):
        name = fdef.get("name", f"{fdef.get('kind', 'f')}{i}") if isinstance(fdef, dict) else f"f{i}"
        functions.append((name, _build_function(fdef, params, args.seed + i)))
    with ThreadPoolExecutor(max_workers=min(_threads(), len(ns))) as pool:
        rows = list(pool.map(lambda n: _sweep_row(n, args, weights, functions), ns))
    buf = io.StringIO()
    fields = list(rows[0].keys())
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row.values()])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lattice-approx",
        description="CBC lattice rules for L2 approximation in weighted Korobov spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, weights_required=True):
        p.add_argument("--alpha", type=float, default=2.0, help="smoothness parameter (> 1)")
        p.add_argument(
            "--weights",
            required=weights_required,
            help="weight config as inline JSON or a path to a JSON file",
        )
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("construct", help="build a generating vector by CBC")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=None, help="dimension (default: the weights' d)")
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("criterion", help="evaluate S_d, T_ds and the integration error")
    p.add_argument("--vector", required=True)
    p.add_argument("--oracle", type=int, default=None, metavar="H", help="also run the box oracle of radius H")
    common(p)
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("indexset", help="enumerate the index set r(h) <= M")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--budget", type=int, default=5_000_000)
    common(p)
    p.set_defaults(func=cmd_indexset)

    p = sub.add_parser("approx", help="apply the lattice algorithm to a test function")
    p.add_argument("--function", required=True, help="function fdef as inline JSON or a path")
    p.add_argument("--vector", required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--coefficients", default=None, help="write approximated coefficients here")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--budget", type=int, default=5_000_000)
    common(p)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("bound", help="bound report over a lambda grid")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--vector", default=None, help="use this vector instead of running CBC")
    p.add_argument(
        "--lambda-grid",
        default=None,
        help="comma-separated lambdas, or a single step (default: 0.05 grid)",
    )
    p.add_argument("--M", type=float, default=None, help="fixed M (default: n^(1/(2 lambda)))")
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="CSV convergence table over several n")
    p.add_argument("--n-list", required=True, help="comma-separated primes")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="sets M = n^(1/(2 lambda))")
    p.add_argument("--functions", default=None, help="JSON list of function fdefs")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--budget", type=int, default=5_000_000)
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidN as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_N
    except BudgetExceededError as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_BAD_N if "not prime" in msg else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
