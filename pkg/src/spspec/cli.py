"""Command line experiments: convergence sweeps, set counting, timing,
coefficient cache building, and ad-hoc evaluation of serialized vectors.

All experiments are seedless and deterministic.  CSV goes to --out (default
stdout); diagnostics such as the fitted slope go to stderr so the CSV body
stays machine readable.  Validation problems exit with status 2.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
import time
from dataclasses import dataclass

import numpy as np

from .coeffs import FourierSymbol, HermiteCache, build_cache, load_cache, save_cache
from .evaluators import (
    EvalRequest,
    EvalResult,
    dense_oracle_fourier,
    dense_oracle_hermite,
    direct_sparse_eval,
    error_report,
    iterative_eval,
)
from .indices import Lattice, LatticeKind, SizeFunction, SparseSetSpec, count_sparse
from .spectral import Basis, BasisKind, l1s_norm, power_law_vector, read_vector, write_vector

CSV_HEADER = "method,basis,p,sigma,alpha,N,terms,error_l1,wall_time_s"
ERROR_FLOOR = 1e-13  # rows at or below this are saturated and excluded from fits


class CliError(ValueError):
    """Invalid experiment parameters; maps to exit status 2."""


@dataclass(frozen=True)
class ConvergenceRecord:
    method: str
    basis: str
    p: int
    sigma: float
    alpha: int
    N: int
    terms: int
    error_l1: float
    wall_time_s: float

    def row(self) -> str:
        return (
            f"{self.method},{self.basis},{self.p},{self.sigma!r},{self.alpha},"
            f"{self.N},{self.terms},{self.error_l1!r},{self.wall_time_s!r}"
        )


def fit_slope(ns, errors, floor: float = ERROR_FLOOR) -> float:
    """Least-squares slope of log error against log N, skipping saturated rows."""
    pts = [(math.log(n), math.log(e)) for n, e in zip(ns, errors) if e > floor]
    if len(pts) < 2:
        return math.nan
    x, y = zip(*pts)
    return float(np.polyfit(np.array(x), np.array(y), 1)[0])


def _parse_n_list(text: str) -> list[int]:
    try:
        ns = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise CliError(f"bad N list {text!r}; expected comma-separated integers") from None
    if not ns or any(n < 1 for n in ns):
        raise CliError(f"bad N list {text!r}; budgets must be positive")
    return ns


def _norm(name: str) -> SizeFunction:
    return SizeFunction.MAX if name == "max" else SizeFunction.PROD


def _load_arity_cache(path, arity: int) -> HermiteCache:
    cache = load_cache(path)
    if cache.arity != arity:
        raise CliError(f"cache {path} has arity {cache.arity}, this run needs {arity}")
    return cache


def _fourier_run(method, sym, u, p, spec):
    if method == "direct":
        return direct_sparse_eval(EvalRequest(sym, (u,) * p, spec))
    return iterative_eval(sym, [u] * p, spec.level, spec.alpha, size=spec.size)


def _hermite_run(method, cache, u, p, spec, domain, jmax, ell_cap):
    if method == "direct":
        return direct_sparse_eval(EvalRequest(cache, (u,) * p, spec, domain))
    if method == "iterative":
        return iterative_eval(
            cache, [u] * p, spec.level, spec.alpha, size=spec.size, ell_cap=ell_cap
        )
    out = min(spec.level - 1, jmax) if spec.level > 1 else 0
    vec = dense_oracle_hermite([u] * p, spec.level, out, strict=False)
    # transform work units: nodes times projected coefficients
    return EvalResult(vec, spec.level * (out + 1))


def cmd_converge(
    basis: str,
    p: int,
    sigma: float,
    n_list: list[int],
    alpha: int,
    method: str,
    *,
    norm: SizeFunction = SizeFunction.MAX,
    cutoff: int | None = None,
    ref_mult: int = 4,
    ref_nodes: int = 500,
    ref_jmax: int | None = None,
    ell_cap: int | None = None,
    cache_path=None,
    threads: int = 1,
    fit_window: tuple[int, int] | None = None,
):
    """Error against a dominating dense reference, one record per N.

    Returns (records, slope, notes).  Refuses references weaker than the
    runs they are supposed to certify.
    """
    if p < 1:
        raise CliError(f"p must be >= 1, got {p}")
    if alpha not in (0, 1):
        raise CliError(f"alpha must be 0 or 1, got {alpha}")
    n_max = max(n_list)
    notes = []
    if basis == "fourier":
        if method == "transform":
            raise CliError("the transform method applies to the Hermite basis")
        cut = cutoff if cutoff is not None else ref_mult * n_max
        if cut < n_max:
            raise CliError(f"reference weaker than test: cutoff {cut} < max N {n_max}")
        u = power_law_vector(sigma, cut, Basis.fourier(1))
        sym = FourierSymbol.unit(1)
        reference = dense_oracle_fourier([u] * p)
        tail = 2.0 * (1.0 + cut) ** (1.0 - sigma) / (sigma - 1.0)
        bound = p * tail * l1s_norm(u, 0.0) ** (p - 1)
        notes.append(f"input tail beyond cutoff {cut} shifts the reference by <= {bound:.3e}")

        def run(n):
            spec = SparseSetSpec(p, n, alpha, norm, Basis.fourier(1).lattice)
            t0 = time.perf_counter()
            res = _fourier_run(method, sym, u, p, spec)
            dt = time.perf_counter() - t0
            return res, dt

    elif basis == "hermite":
        cut = cutoff if cutoff is not None else n_max
        jmax = ref_jmax if ref_jmax is not None else p * n_max
        if jmax < n_max:
            raise CliError(f"reference weaker than test: output range {jmax} < max N {n_max}")
        u = power_law_vector(sigma, cut, Basis.hermite())
        try:
            reference = dense_oracle_hermite([u] * p, ref_nodes, jmax, strict=True)
        except ValueError as exc:
            raise CliError(f"reference weaker than test: {exc}") from None
        arity = 2 if method == "iterative" else p
        if cache_path is not None:
            cache = _load_arity_cache(cache_path, arity)
        else:
            cache = HermiteCache(arity)
        cap = ell_cap if ell_cap is not None else jmax
        domain = tuple((l,) for l in range(cap + 1)) if alpha == 0 else None

        def run(n):
            spec = SparseSetSpec(p, n, alpha, norm, Basis.hermite().lattice)
            t0 = time.perf_counter()
            res = _hermite_run(method, cache, u, p, spec, domain, jmax, cap)
            dt = time.perf_counter() - t0
            return res, dt

    else:
        raise CliError(f"unknown basis {basis!r}")

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, n_list))
        notes.append("timings under --threads > 1 contend for the interpreter lock")
    else:
        outcomes = [run(n) for n in n_list]

    records = []
    for n, (res, dt) in zip(n_list, outcomes):
        err = error_report(res.vector, reference)
        records.append(ConvergenceRecord(method, basis, p, sigma, alpha, n, res.terms, err, dt))
    fit_records = records
    if fit_window is not None:
        lo, hi = fit_window
        fit_records = [r for r in records if lo <= r.N <= hi]
    slope = fit_slope([r.N for r in fit_records], [r.error_l1 for r in fit_records])
    return records, slope, notes


def cmd_count(
    p: int,
    alpha: int,
    n_list: list[int],
    *,
    norm: SizeFunction = SizeFunction.MAX,
    lattice_kind: str = "Z",
    dim: int = 1,
    q: int | None = None,
    box: int | None = None,
):
    """Exact cardinalities with the matching log-normalized column."""
    lattice = Lattice(LatticeKind(lattice_kind), dim)
    if q is not None:
        if alpha != 0:
            raise CliError("momentum-restricted counting is defined for alpha = 0")
        if lattice.kind is not LatticeKind.INTEGERS:
            raise CliError("momentum-restricted counting applies to the Fourier lattice")
        if q < 0:
            raise CliError(f"momentum radius must be >= 0, got {q}")
    rows = []
    for n in n_list:
        spec = SparseSetSpec(p, n, alpha, norm, lattice, box)
        if q is not None:
            count = count_sparse(spec) * (2 * q + 1) ** dim
            denom = n**dim * math.log(n + 1.0) ** (p - 1)
        elif norm is SizeFunction.MAX:
            count = count_sparse(spec, include_ell=(alpha == 1))
            denom = n**dim * math.log(n + 1.0) ** (p - 1 + alpha)
        else:
            count = count_sparse(spec, include_ell=(alpha == 1))
            denom = n * math.log(n + 1.0) ** (dim * (p + alpha) - 1)
        rows.append((n, count, count / denom))
    return rows


def cmd_bench(
    basis: str,
    p: int,
    sigma: float,
    n_list: list[int],
    alpha: int,
    method: str,
    repeats: int = 3,
    *,
    norm: SizeFunction = SizeFunction.MAX,
    cache_path=None,
    ell_cap: int | None = None,
):
    """Median-of-repeats timings; error column is nan (no reference here).

    Timing runs are always sequential so the rows reflect single-threaded
    cost.
    """
    if repeats < 3:
        raise CliError(f"need at least 3 repeats for a stable median, got {repeats}")
    n_max = max(n_list)
    records = []
    if basis == "fourier":
        if method == "transform":
            raise CliError("the transform method applies to the Hermite basis")
        u = power_law_vector(sigma, n_max, Basis.fourier(1))
        sym = FourierSymbol.unit(1)
        for n in n_list:
            spec = SparseSetSpec(p, n, alpha, norm, Basis.fourier(1).lattice)
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                res = _fourier_run(method, sym, u, p, spec)
                times.append(time.perf_counter() - t0)
            records.append(
                ConvergenceRecord(
                    method, basis, p, sigma, alpha, n, res.terms, math.nan, statistics.median(times)
                )
            )
    elif basis == "hermite":
        u = power_law_vector(sigma, n_max, Basis.hermite())
        arity = 2 if method == "iterative" else p
        if cache_path is not None and method != "transform":
            cache = _load_arity_cache(cache_path, arity)
        else:
            cache = HermiteCache(arity)
        jmax = p * n_max
        cap = ell_cap if ell_cap is not None else jmax
        domain = tuple((l,) for l in range(cap + 1)) if alpha == 0 else None
        for n in n_list:
            spec = SparseSetSpec(p, n, alpha, norm, Basis.hermite().lattice)
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                res = _hermite_run(method, cache, u, p, spec, domain, jmax, cap)
                times.append(time.perf_counter() - t0)
            records.append(
                ConvergenceRecord(
                    method, basis, p, sigma, alpha, n, res.terms, math.nan, statistics.median(times)
                )
            )
    else:
        raise CliError(f"unknown basis {basis!r}")
    return records


def cmd_coeffs(p: int, jmax: int, out_path):
    """Build the bulk cache, save it, report (entry count, seconds)."""
    t0 = time.perf_counter()
    cache = build_cache(p, jmax)
    elapsed = time.perf_counter() - t0
    save_cache(cache, out_path)
    return len(cache.table), elapsed


def cmd_eval(
    in_path,
    out_path,
    basis: str,
    p: int,
    n: int,
    alpha: int,
    method: str,
    *,
    norm: SizeFunction = SizeFunction.MAX,
    cache_path=None,
    ell_cap: int | None = None,
):
    """Evaluate the p-fold product of one serialized vector with itself."""
    if basis == "fourier":
        u = read_vector(in_path, Basis.fourier(1))
        if method == "transform":
            raise CliError("the transform method applies to the Hermite basis")
        sym = FourierSymbol.unit(1)
        spec = SparseSetSpec(p, n, alpha, norm, Basis.fourier(1).lattice)
        res = _fourier_run(method, sym, u, p, spec)
    elif basis == "hermite":
        u = read_vector(in_path, Basis.hermite())
        arity = 2 if method == "iterative" else p
        if cache_path is not None and method != "transform":
            cache = _load_arity_cache(cache_path, arity)
        else:
            cache = HermiteCache(arity)
        if alpha == 0 and method != "transform" and ell_cap is None:
            raise CliError("alpha = 0 on the Hermite basis needs --ell-cap")
        jmax = ell_cap if ell_cap is not None else p * n
        domain = tuple((l,) for l in range(jmax + 1)) if alpha == 0 else None
        spec = SparseSetSpec(p, n, alpha, norm, Basis.hermite().lattice)
        res = _hermite_run(method, cache, u, p, spec, domain, jmax, jmax)
    else:
        raise CliError(f"unknown basis {basis!r}")
    write_vector(res.vector, out_path)
    return res.terms


def _write_csv(lines, out_path) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spspec", description="sparse coefficient-space product experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, methods=("direct", "iterative", "transform")):
        sp.add_argument("--basis", choices=("fourier", "hermite"), required=True)
        sp.add_argument("--p", type=int, required=True, help="number of inputs")
        sp.add_argument("--alpha", type=int, choices=(0, 1), required=True)
        sp.add_argument("--N", required=True, help="comma-separated budget list")
        sp.add_argument("--norm", choices=("max", "prod"), default="max")
        sp.add_argument("--method", choices=methods, default="direct")
        sp.add_argument("--cache", default=None, help="Hermite coefficient cache file")
        sp.add_argument("--out", default=None, help="CSV output path (default stdout)")

    con = sub.add_parser("converge", help="error sweep against a dense reference")
    common(con)
    con.add_argument("--sigma", type=float, default=3.0, help="power-law decay exponent")
    con.add_argument("--cutoff", type=int, default=None, help="input truncation")
    con.add_argument("--ref-mult", type=int, default=4, help="Fourier reference cutoff = mult * max N")
    con.add_argument("--ref-nodes", type=int, default=500, help="Hermite reference transform nodes")
    con.add_argument("--ref-jmax", type=int, default=None, help="Hermite reference output range")
    con.add_argument("--ell-cap", type=int, default=None, help="output cap for Hermite alpha=0")
    con.add_argument("--threads", type=int, default=1, help="parallelism across N values")
    con.add_argument("--fit-window", default=None, help="lo:hi N window for the slope fit")

    cnt = sub.add_parser("count", help="exact sparse-set cardinalities")
    cnt.add_argument("--p", type=int, required=True)
    cnt.add_argument("--alpha", type=int, choices=(0, 1), required=True)
    cnt.add_argument("--N", required=True)
    cnt.add_argument("--norm", choices=("max", "prod"), default="max")
    cnt.add_argument("--lattice", choices=("Z", "N"), default="Z")
    cnt.add_argument("--d", type=int, default=1, help="lattice dimension")
    cnt.add_argument("--q", type=int, default=None, help="momentum radius (alpha=0, Fourier)")
    cnt.add_argument("--box", type=int, default=None, help="per-index size cap")
    cnt.add_argument("--out", default=None)

    ben = sub.add_parser("bench", help="median-of-repeats timing rows")
    common(ben)
    ben.add_argument("--sigma", type=float, default=3.0)
    ben.add_argument("--repeats", type=int, default=3)
    ben.add_argument("--ell-cap", type=int, default=None)

    cof = sub.add_parser("coeffs", help="build and save a Hermite coefficient cache")
    cof.add_argument("--p", type=int, required=True)
    cof.add_argument("--jmax", type=int, required=True)
    cof.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate the p-fold product of a serialized vector")
    ev.add_argument("input", help="vector file, one 'coords<TAB>re<TAB>im' line per entry")
    ev.add_argument("--basis", choices=("fourier", "hermite"), required=True)
    ev.add_argument("--p", type=int, required=True)
    ev.add_argument("--alpha", type=int, choices=(0, 1), required=True)
    ev.add_argument("--N", type=int, required=True)
    ev.add_argument("--norm", choices=("max", "prod"), default="max")
    ev.add_argument("--method", choices=("direct", "iterative", "transform"), default="direct")
    ev.add_argument("--cache", default=None)
    ev.add_argument("--ell-cap", type=int, default=None)
    ev.add_argument("--out", required=True)
    return parser


def _parse_fit_window(text):
    if text is None:
        return None
    lo, sep, hi = text.partition(":")
    if not sep:
        raise CliError(f"bad fit window {text!r}; expected lo:hi")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise CliError(f"bad fit window {text!r}; expected integers") from None


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        if args.command == "converge":
            records, slope, notes = cmd_converge(
                args.basis,
                args.p,
                args.sigma,
                _parse_n_list(args.N),
                args.alpha,
                args.method,
                norm=_norm(args.norm),
                cutoff=args.cutoff,
                ref_mult=args.ref_mult,
                ref_nodes=args.ref_nodes,
                ref_jmax=args.ref_jmax,
                ell_cap=args.ell_cap,
                cache_path=args.cache,
                threads=args.threads,
                fit_window=_parse_fit_window(args.fit_window),
            )
            _write_csv([CSV_HEADER] + [r.row() for r in records], args.out)
            for note in notes:
                print(f"note: {note}", file=sys.stderr)
            print(f"slope={slope!r}", file=sys.stderr)
        elif args.command == "count":
            rows = cmd_count(
                args.p,
                args.alpha,
                _parse_n_list(args.N),
                norm=_norm(args.norm),
                lattice_kind=args.lattice,
                dim=args.d,
                q=args.q,
                box=args.box,
            )
            _write_csv(
                ["N,count,normalized"] + [f"{n},{c},{z!r}" for n, c, z in rows], args.out
            )
        elif args.command == "bench":
            records = cmd_bench(
                args.basis,
                args.p,
                args.sigma,
                _parse_n_list(args.N),
                args.alpha,
                args.method,
                args.repeats,
                norm=_norm(args.norm),
                cache_path=args.cache,
                ell_cap=args.ell_cap,
            )
            _write_csv([CSV_HEADER] + [r.row() for r in records], args.out)
        elif args.command == "coeffs":
            entries, elapsed = cmd_coeffs(args.p, args.jmax, args.out)
            print(f"wrote {entries} coefficients to {args.out} in {elapsed:.3f}s", file=sys.stderr)
        elif args.command == "eval":
            terms = cmd_eval(
                args.input,
                args.out,
                args.basis,
                args.p,
                args.N,
                args.alpha,
                args.method,
                norm=_norm(args.norm),
                cache_path=args.cache,
                ell_cap=args.ell_cap,
            )
            print(f"evaluated {terms} terms", file=sys.stderr)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
