"""Multi-indices and sparse product-budget index sets.

A multi-index is a plain tuple of ints living in Z^d or N^d.  Sparse sets
are cut out of the p-fold lattice product by bounding

    size(ell)**alpha * size(j_1) * ... * size(j_p)  <=  N

where the size of an index is either its max-norm floored at 1 or the
product of (1 + |coordinate|) over coordinates.  Enumeration is always in
lexicographic order and counting never materializes the set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

Index = tuple[int, ...]


class LatticeKind(Enum):
    INTEGERS = "Z"
    NATURALS = "N"


@dataclass(frozen=True)
class Lattice:
    kind: LatticeKind
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"lattice dimension must be >= 1, got {self.dim}")

    def contains(self, j: Index) -> bool:
        if len(j) != self.dim:
            return False
        if self.kind is LatticeKind.NATURALS:
            return all(c >= 0 for c in j)
        return True

    def validate(self, j: Index) -> Index:
        if any(c != int(c) for c in j):
            raise ValueError(f"non-integer coordinate in index {tuple(j)}")
        j = tuple(int(c) for c in j)
        if not self.contains(j):
            raise ValueError(f"index {j} not in {self.kind.value}^{self.dim}")
        return j


def integers(dim: int = 1) -> Lattice:
    return Lattice(LatticeKind.INTEGERS, dim)


def naturals(dim: int = 1) -> Lattice:
    return Lattice(LatticeKind.NATURALS, dim)


def max_norm(j: Index) -> int:
    """max(1, |j^1|, ..., |j^d|); the floor keeps sizes multiplicative."""
    m = 1
    for c in j:
        a = abs(c)
        if a > m:
            m = a
    return m


def prod_norm(j: Index) -> int:
    """Product of (1 + |j^n|) over coordinates."""
    out = 1
    for c in j:
        out *= 1 + abs(c)
    return out


class SizeFunction(Enum):
    MAX = "max"
    PROD = "prod"

    def of(self, j: Index) -> int:
        return max_norm(j) if self is SizeFunction.MAX else prod_norm(j)


def momentum(ell: Index, js: Sequence[Index]) -> Index:
    """ell - j_1 - ... - j_p, computed coordinate-wise in Z^d."""
    d = len(ell)
    out = list(ell)
    for j in js:
        if len(j) != d:
            raise ValueError(f"dimension mismatch: ell has {d} coordinates, got index {j}")
        for n in range(d):
            out[n] -= j[n]
    return tuple(out)


@dataclass(frozen=True)
class SparseSetSpec:
    """Parameters of one sparse set: arity, budget, output weight, geometry."""

    p: int
    level: int
    alpha: int
    size: SizeFunction
    lattice: Lattice
    box: int | None = None

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"arity p must be >= 1, got {self.p}")
        if self.level < 1:
            raise ValueError(f"budget level must be >= 1, got {self.level}")
        if self.alpha not in (0, 1):
            raise ValueError(f"alpha must be 0 or 1, got {self.alpha}")
        if self.box is not None and self.box < 1:
            raise ValueError(f"box cap must be >= 1, got {self.box}")

    def admits(self, ell: Index, js: Sequence[Index]) -> bool:
        """Membership predicate for the pair (ell, js)."""
        if len(js) != self.p:
            return False
        sz_ell = self.size.of(ell)
        if self.box is not None and sz_ell > self.box:
            return False
        prod = 1
        for j in js:
            sz = self.size.of(j)
            if self.box is not None and sz > self.box:
                return False
            prod *= sz
        return sz_ell**self.alpha * prod <= self.level


def indices_up_to(lattice: Lattice, size: SizeFunction, cap: int) -> Iterator[Index]:
    """All lattice indices with size <= cap, in lexicographic order."""
    if cap < 1:
        return
    if size is SizeFunction.MAX:
        if lattice.kind is LatticeKind.INTEGERS:
            rng = range(-cap, cap + 1)
        else:
            rng = range(0, cap + 1)
        yield from itertools.product(rng, repeat=lattice.dim)
    else:
        yield from _prod_norm_indices(lattice.kind, lattice.dim, cap)


def _prod_norm_indices(kind: LatticeKind, dim: int, cap: int) -> Iterator[Index]:
    if dim == 0:
        yield ()
        return
    lo = -(cap - 1) if kind is LatticeKind.INTEGERS else 0
    for c in range(lo, cap):
        for rest in _prod_norm_indices(kind, dim - 1, cap // (1 + abs(c))):
            yield (c,) + rest


def enumerate_sparse(spec: SparseSetSpec, ell: Index) -> Iterator[tuple[Index, ...]]:
    """Stream the p-tuples (j_1, ..., j_p) admitted with this ell.

    Tuples come out in lexicographic order on the concatenated coordinates.
    The descent carries the remaining multiplicative budget, so no full
    p-fold product is ever formed.  Empty stream when ell itself breaks the
    budget or the box cap.
    """
    ell = spec.lattice.validate(ell)
    sz_ell = spec.size.of(ell)
    if spec.box is not None and sz_ell > spec.box:
        return
    budget = spec.level // sz_ell**spec.alpha
    if budget < 1:
        return
    yield from _descend(spec, 0, budget, ())


def _descend(
    spec: SparseSetSpec, slot: int, budget: int, prefix: tuple[Index, ...]
) -> Iterator[tuple[Index, ...]]:
    cap = budget if spec.box is None else min(budget, spec.box)
    if slot == spec.p - 1:
        for j in indices_up_to(spec.lattice, spec.size, cap):
            yield prefix + (j,)
    else:
        for j in indices_up_to(spec.lattice, spec.size, cap):
            yield from _descend(spec, slot + 1, budget // spec.size.of(j), prefix + (j,))


def count_indices_up_to(lattice: Lattice, size: SizeFunction, cap: int) -> int:
    """Cardinality of {j : size(j) <= cap} without enumerating it."""
    if cap < 1:
        return 0
    if size is SizeFunction.MAX:
        if lattice.kind is LatticeKind.INTEGERS:
            return (2 * cap + 1) ** lattice.dim
        return (cap + 1) ** lattice.dim
    return _prod_norm_cumulative(lattice.kind, lattice.dim, cap, {})


def _prod_norm_cumulative(kind: LatticeKind, dim: int, cap: int, memo: dict) -> int:
    if cap < 1:
        return 0
    if dim == 0:
        return 1
    key = (dim, cap)
    if key in memo:
        return memo[key]
    total = 0
    for t in range(1, cap + 1):
        c1 = 1 if (t == 1 or kind is LatticeKind.NATURALS) else 2
        total += c1 * _prod_norm_cumulative(kind, dim - 1, cap // t, memo)
    memo[key] = total
    return total


def count_indices_of_size(lattice: Lattice, size: SizeFunction, k: int) -> int:
    return count_indices_up_to(lattice, size, k) - count_indices_up_to(lattice, size, k - 1)


def count_sparse(spec: SparseSetSpec, include_ell: bool = False) -> int:
    """Exact cardinality of the sparse set.

    With include_ell the count is over pairs (ell, tuple); ell then ranges
    over the lattice, which is only finite when alpha = 1 or a box cap is
    present.  Python integers do not overflow, so large counts are exact.
    """
    per_size: dict[int, int] = {}

    def size_count(k: int) -> int:
        if k not in per_size:
            per_size[k] = count_indices_of_size(spec.lattice, spec.size, k)
        return per_size[k]

    memo: dict[tuple[int, int], int] = {}

    def tuples(q: int, budget: int) -> int:
        if budget < 1:
            return 0
        if q == 0:
            return 1
        cap = budget if spec.box is None else min(budget, spec.box)
        key = (q, cap)
        if key in memo:
            return memo[key]
        total = 0
        for k in range(1, cap + 1):
            cnt = size_count(k)
            if cnt:
                total += cnt * tuples(q - 1, budget // k)
        memo[key] = total
        return total

    if not include_ell:
        return tuples(spec.p, spec.level)
    if spec.alpha == 1:
        return tuples(spec.p + 1, spec.level)
    if spec.box is None:
        raise ValueError("count over unconstrained ell is infinite for alpha = 0")
    return count_indices_up_to(spec.lattice, spec.size, spec.box) * tuples(spec.p, spec.level)
