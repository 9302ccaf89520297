"""Sparse, iterative, and dense evaluation of coefficient-space products.

The target quantity per output index ell is

    X_ell = sum over admitted (j_1, ..., j_p) of a_{ell;js} * u^1_{j_1} * ... * u^p_{j_p}

with the tuples admitted by a SparseSetSpec budget.  Two complementary
strategies are used:

* Fourier symbols vanish unless ell - sum(js) stays inside the symbol
  support, so the evaluator walks the j-tuples once and scatters each
  contribution to the few reachable ell (cost proportional to the actual
  nonzero terms).
* Hermite coefficients have no such locality, so the evaluator gathers
  per output index over the budgeted tuples restricted to the input
  supports.

Both walks order candidates by size and then lexicographically, so every
per-ell sum is accumulated in a fixed deterministic order.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .coeffs import FourierSymbol, HermiteCache
from .indices import Index, SizeFunction, SparseSetSpec, indices_up_to
from .quadrature import gauss_hermite_rule, hermite_batch
from .spectral import Basis, BasisKind, SpectralVector


@dataclass(frozen=True)
class EvalRequest:
    """One evaluation task: provider, inputs, sparse-set parameters."""

    provider: FourierSymbol | HermiteCache
    inputs: tuple[SpectralVector, ...]
    spec: SparseSetSpec
    output_domain: tuple[Index, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.inputs) != self.spec.p:
            raise ValueError(f"spec has p={self.spec.p} but {len(self.inputs)} inputs given")
        basis = self.provider.basis
        for u in self.inputs:
            if u.basis != basis:
                raise ValueError(f"basis mismatch: provider {basis} vs input {u.basis}")
        if basis.lattice != self.spec.lattice:
            raise ValueError("sparse-set lattice does not match the provider basis")
        if isinstance(self.provider, HermiteCache) and self.provider.arity != self.spec.p:
            raise ValueError(
                f"coefficient cache has arity {self.provider.arity}, spec needs {self.spec.p}"
            )


@dataclass(frozen=True)
class EvalResult:
    vector: SpectralVector
    terms: int


def _support_by_size(u: SpectralVector, size: SizeFunction):
    """Support split into parallel lists sorted by (size, index).

    A budget b then admits exactly a prefix, located by bisecting the size
    list; iterating that prefix is the evaluator's deterministic term order.
    """
    items = sorted(u.items(), key=lambda kv: (size.of(kv[0]), kv[0]))
    sizes = [size.of(j) for j, _ in items]
    keys = [j for j, _ in items]
    vals = [v for _, v in items]
    return sizes, keys, vals


def _scatter_fourier(
    symbol: FourierSymbol,
    inputs: Sequence[SpectralVector],
    spec: SparseSetSpec,
    domain: tuple[Index, ...] | None,
):
    p, level, alpha, size, box = spec.p, spec.level, spec.alpha, spec.size, spec.box
    supports = [_support_by_size(u, size) for u in inputs]
    bitems = sorted(symbol.table.items())
    dom = set(domain) if domain is not None else None
    out: dict[Index, complex] = {}
    terms = 0

    def walk(slot: int, budget: int, psum: Index, pprod: complex, prodsz: int):
        nonlocal terms
        sizes, keys, vals = supports[slot]
        cap = budget if box is None else min(budget, box)
        hi = bisect_right(sizes, cap)
        if slot == p - 1:
            for i in range(hi):
                total = tuple(a + b for a, b in zip(psum, keys[i]))
                value = pprod * vals[i]
                used = prodsz * sizes[i]
                for m, bm in bitems:
                    ell = tuple(a + b for a, b in zip(total, m))
                    if alpha and size.of(ell) * used > level:
                        continue
                    if box is not None and size.of(ell) > box:
                        continue
                    if dom is not None and ell not in dom:
                        continue
                    out[ell] = out.get(ell, 0j) + bm * value
                    terms += 1
        else:
            for i in range(hi):
                walk(
                    slot + 1,
                    budget // sizes[i],
                    tuple(a + b for a, b in zip(psum, keys[i])),
                    pprod * vals[i],
                    prodsz * sizes[i],
                )

    walk(0, level, (0,) * spec.lattice.dim, 1.0 + 0j, 1)
    return out, terms


def _gather(
    provider,
    inputs: Sequence[SpectralVector],
    spec: SparseSetSpec,
    ells: Sequence[Index],
):
    p, level, size, box = spec.p, spec.level, spec.size, spec.box
    supports = [_support_by_size(u, size) for u in inputs]
    out: dict[Index, complex] = {}
    terms = 0
    js: list[Index] = [()] * p

    for ell in ells:
        sz_ell = size.of(ell)
        if box is not None and sz_ell > box:
            continue
        budget = level // sz_ell**spec.alpha
        if budget < 1:
            continue
        acc = 0j

        def walk(slot: int, budget: int, pprod: complex):
            nonlocal acc, terms
            sizes, keys, vals = supports[slot]
            cap = budget if box is None else min(budget, box)
            hi = bisect_right(sizes, cap)
            if slot == p - 1:
                for i in range(hi):
                    js[slot] = keys[i]
                    terms += 1
                    c = provider.coefficient(ell, tuple(js))
                    if c:
                        acc += c * (pprod * vals[i])
            else:
                for i in range(hi):
                    js[slot] = keys[i]
                    walk(slot + 1, budget // sizes[i], pprod * vals[i])

        walk(0, budget, 1.0 + 0j)
        if acc != 0j:
            out[ell] = acc
    return out, terms


def direct_sparse_eval(request: EvalRequest) -> EvalResult:
    """Evaluate the budgeted sum per output index in one pass.

    For Fourier providers the output domain defaults to the momentum
    closure of the admitted tuples; for Hermite, alpha = 1 defaults to
    {ell : size(ell) <= N} and alpha = 0 requires an explicit domain since
    nothing else bounds the output range.
    """
    spec = request.spec
    if isinstance(request.provider, FourierSymbol):
        entries, terms = _scatter_fourier(
            request.provider, request.inputs, spec, request.output_domain
        )
    else:
        if request.output_domain is not None:
            ells = [spec.lattice.validate(ell) for ell in request.output_domain]
        elif spec.alpha == 1:
            ells = list(indices_up_to(spec.lattice, spec.size, min(spec.level, spec.box or spec.level)))
        else:
            raise ValueError("alpha = 0 with a Hermite provider needs an explicit output domain")
        entries, terms = _gather(request.provider, request.inputs, spec, ells)
    basis = request.provider.basis
    return EvalResult(SpectralVector(basis, entries), terms)


def iterative_eval(
    provider,
    inputs: Sequence[SpectralVector],
    level: int,
    alpha: int,
    *,
    size: SizeFunction = SizeFunction.MAX,
    ell_cap: int | None = None,
) -> EvalResult:
    """Left fold of budgeted binary products: X(..X(X(u1,u2),u3).., up).

    Each fold reuses the same budget N and alpha.  For a Fourier symbol the
    symbol is applied on the first fold only and the remaining folds use the
    plain product, which keeps the composition equal to the direct p-ary sum
    when the symbol is b = 1 and matches it bit for bit at p = 2.  A Hermite
    provider must be an arity-2 cache, reused by every fold.
    """
    if not inputs:
        raise ValueError("need at least one input")
    if size is not SizeFunction.MAX:
        raise ValueError("iterative evaluation is defined for the max-norm size only")
    if len(inputs) == 1:
        return EvalResult(inputs[0], 0)
    basis = inputs[0].basis
    hermite = isinstance(provider, HermiteCache)
    if hermite and provider.arity != 2:
        raise ValueError("iterative evaluation needs an arity-2 coefficient cache")
    pair_spec = SparseSetSpec(2, level, alpha, size, basis.lattice)
    domain = None
    if hermite and alpha == 0:
        if ell_cap is None:
            raise ValueError("alpha = 0 with a Hermite provider needs ell_cap")
        domain = tuple((l,) for l in range(ell_cap + 1))
    unit = FourierSymbol.unit(basis.dim) if not hermite else None
    acc = inputs[0]
    terms = 0
    for i, u in enumerate(inputs[1:]):
        prov = provider if (hermite or i == 0) else unit
        res = direct_sparse_eval(EvalRequest(prov, (acc, u), pair_spec, domain))
        acc = res.vector
        terms += res.terms
    return EvalResult(acc, terms)


def _dense_convolve_pair(a: dict, b: dict) -> dict:
    out: dict[Index, complex] = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0j) + va * vb
    return out


def _convolve_line(a: dict, b: dict) -> dict:
    """Exact 1-d convolution on a contiguous index window via numpy."""
    alo = min(k[0] for k in a)
    ahi = max(k[0] for k in a)
    blo = min(k[0] for k in b)
    bhi = max(k[0] for k in b)
    arr_a = np.zeros(ahi - alo + 1, dtype=complex)
    arr_b = np.zeros(bhi - blo + 1, dtype=complex)
    for k, v in a.items():
        arr_a[k[0] - alo] = v
    for k, v in b.items():
        arr_b[k[0] - blo] = v
    conv = np.convolve(arr_a, arr_b)
    lo = alo + blo
    return {(lo + i,): v for i, v in enumerate(conv) if v != 0}


def dense_oracle_fourier(
    inputs: Sequence[SpectralVector],
    cutoff: int | None = None,
    symbol: FourierSymbol | None = None,
) -> SpectralVector:
    """Full convolution of the stored entries, with no sparsity at all.

    Desk-scale reference: cost grows with the product of the supports.  An
    optional cutoff truncates every input to coordinate magnitudes <= cutoff
    first; an optional symbol applies b as one more convolution.
    """
    if not inputs:
        raise ValueError("need at least one input")
    basis = inputs[0].basis
    if basis.kind is not BasisKind.FOURIER:
        raise ValueError("the convolution oracle applies to Fourier inputs")
    for u in inputs:
        if u.basis != basis:
            raise ValueError("all inputs must share one basis")
    tables = []
    for u in inputs:
        t = {
            k: v
            for k, v in u.items()
            if cutoff is None or max(abs(c) for c in k) <= cutoff
        }
        tables.append(t)
    if symbol is not None:
        if symbol.dim != basis.dim:
            raise ValueError("symbol dimension does not match the inputs")
        tables.append(dict(symbol.table))
    acc = tables[0]
    for t in tables[1:]:
        if not acc or not t:
            acc = {}
            break
        if basis.dim == 1:
            acc = _convolve_line(acc, t)
        else:
            acc = _dense_convolve_pair(acc, t)
    return SpectralVector(basis, acc)


def dense_oracle_hermite(
    inputs: Sequence[SpectralVector],
    n_nodes: int,
    jmax_out: int,
    strict: bool = True,
) -> SpectralVector:
    """Pointwise route: evaluate the inputs at quadrature nodes, multiply,
    and project back onto chi_0 .. chi_jmax_out.

    The product of p inputs and one projector carries exp(-(p+1)x^2/2), so
    nodes are substituted with c = sqrt((p+1)/2) and combined with scaled
    weights.  With strict=True the node count must make the rule exact for
    the polynomial degree involved; strict=False emulates a practical
    fixed-resolution transform.
    """
    if not inputs:
        raise ValueError("need at least one input")
    basis = inputs[0].basis
    if basis.kind is not BasisKind.HERMITE:
        raise ValueError("the transform oracle applies to Hermite inputs")
    for u in inputs:
        if u.basis != basis:
            raise ValueError("all inputs must share one basis")
    if jmax_out < 0:
        raise ValueError(f"jmax_out must be >= 0, got {jmax_out}")
    degs = [u.max_degree() for u in inputs]
    needed = sum(degs) + jmax_out
    if strict and 2 * n_nodes - 1 < needed:
        raise ValueError(
            f"{n_nodes} nodes cannot integrate degree {needed}; need at least {(needed + 2) // 2}"
        )
    q = len(inputs) + 1
    rule = gauss_hermite_rule(n_nodes)
    c = math.sqrt(q / 2.0)
    xs = rule.nodes / c
    chi = hermite_batch(max(max(degs, default=0), jmax_out), xs)
    prod = np.asarray(rule.scaled_weights / c, dtype=complex)
    for u in inputs:
        vals = np.zeros(len(xs), dtype=complex)
        for j, v in u.items():
            vals += v * chi[j[0]]
        prod *= vals
    proj = chi[: jmax_out + 1] @ prod
    return SpectralVector(basis, {(l,): proj[l] for l in range(jmax_out + 1)})


def error_report(
    approx: SpectralVector,
    reference: SpectralVector,
    s: float = 0.0,
    size: SizeFunction = SizeFunction.MAX,
) -> float:
    """Weighted l1 distance over the union of the supports."""
    if approx.basis != reference.basis:
        raise ValueError("cannot compare vectors over different bases")
    keys = sorted(set(approx) | set(reference))
    return float(
        sum(size.of(j) ** s * abs(approx.get(j, 0j) - reference.get(j, 0j)) for j in keys)
    )


class RatePrediction(NamedTuple):
    value: float
    valid: bool


def predicted_rate(
    s: float,
    s_prime: float,
    sigma_embed: float = 1.0,
    *,
    theta: float,
    nu: float,
    kappa: float,
    alpha: int,
) -> RatePrediction:
    """Guaranteed direct-method rate: error = O(N**-value) when valid.

    sigma_embed is the exponent relating the two size functions in play
    (1 when the estimate and the budget use the same size).  The flag is
    False when s_prime sits below the regularity threshold, in which case
    the formula value is returned anyway but is not backed by the theory.
    """
    beta = min(
        (s_prime - sigma_embed * s - theta * kappa) / (sigma_embed * alpha + 1),
        s_prime - (1.0 - theta) * kappa - nu,
    )
    valid = s_prime >= max(sigma_embed * s + theta * kappa, (1.0 - theta) * kappa + nu)
    return RatePrediction(beta, valid)


def predicted_rate_iterative(
    p: int,
    s: float,
    s_prime: float,
    *,
    theta: float,
    nu: float,
    kappa: float,
    alpha: int,
) -> RatePrediction:
    """Guaranteed rate for the folded binary products; equals the direct
    formula with sigma_embed = 1 at p = 2."""
    if p < 2:
        raise ValueError(f"iterative rate needs p >= 2, got {p}")
    beta = min(
        (s_prime - s - (p - 1) * theta * kappa) / (alpha + 1),
        s_prime - (p - 3) * theta * kappa - kappa - nu,
    )
    valid = s_prime >= max(s + (p - 1) * theta * kappa, (1.0 - theta) * kappa + nu)
    return RatePrediction(beta, valid)
