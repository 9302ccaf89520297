"""Sparse coefficient vectors over Fourier and Hermite index lattices."""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .indices import Index, Lattice, SizeFunction, integers, max_norm, naturals

# Entries smaller than this are dropped on normalization: they cannot
# influence any norm at double precision and would bloat serialized files.
PRUNE_TOL = 1e-300


class BasisKind(Enum):
    FOURIER = "fourier"
    HERMITE = "hermite"


@dataclass(frozen=True)
class Basis:
    kind: BasisKind
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"basis dimension must be >= 1, got {self.dim}")
        if self.kind is BasisKind.HERMITE and self.dim != 1:
            raise ValueError("the Hermite basis is one-dimensional")

    @property
    def lattice(self) -> Lattice:
        if self.kind is BasisKind.FOURIER:
            return integers(self.dim)
        return naturals(1)

    @staticmethod
    def fourier(dim: int = 1) -> "Basis":
        return Basis(BasisKind.FOURIER, dim)

    @staticmethod
    def hermite() -> "Basis":
        return Basis(BasisKind.HERMITE, 1)


class SpectralVector(Mapping):
    """Immutable finitely supported coefficient family u = (u_j).

    Keys are lattice multi-indices, values complex.  Entries are stored in
    lexicographic key order so that iteration, serialization and norm
    accumulation are deterministic.
    """

    __slots__ = ("basis", "_entries")

    def __init__(self, basis: Basis, entries: Mapping | Iterable[tuple[Index, complex]]):
        lattice = basis.lattice
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean = {}
        for j, v in items:
            j = lattice.validate(j)
            v = complex(v)
            if abs(v) >= PRUNE_TOL:
                clean[j] = v
        self.basis = basis
        self._entries = dict(sorted(clean.items()))

    def __getitem__(self, j: Index) -> complex:
        return self._entries[j]

    def __iter__(self) -> Iterator[Index]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectralVector):
            return NotImplemented
        return self.basis == other.basis and self._entries == other._entries

    __hash__ = None  # mutable-looking container semantics; not hashable

    def __repr__(self) -> str:
        return f"SpectralVector({self.basis.kind.value}, {len(self)} entries)"

    def support(self) -> tuple[Index, ...]:
        return tuple(self._entries)

    def max_degree(self) -> int:
        """Largest raw coordinate magnitude in the support (0 if empty)."""
        out = 0
        for j in self._entries:
            for c in j:
                if abs(c) > out:
                    out = abs(c)
        return out


def l1s_norm(u: SpectralVector, s: float, size: SizeFunction = SizeFunction.MAX) -> float:
    """Weighted absolute-sum norm: sum of size(j)**s * |u_j|."""
    return float(sum(size.of(j) ** s * abs(v) for j, v in u.items()))


def l2s_norm(u: SpectralVector, s: float) -> float:
    """Weighted Euclidean norm with max-norm weights."""
    return math.sqrt(sum(max_norm(j) ** (2.0 * s) * abs(v) ** 2 for j, v in u.items()))


def power_law_vector(sigma: float, cutoff: int, basis: Basis) -> SpectralVector:
    """Test family u_k = (1 + |k|)**(-sigma) truncated at |k| <= cutoff.

    For Fourier, |k| is the largest coordinate magnitude (so u_0 = 1 in any
    dimension); for Hermite, |k| = k.  sigma must exceed 1 so the family has
    finite weighted l1 norms below the critical exponent.
    """
    if sigma <= 1:
        raise ValueError(f"power-law exponent must be > 1, got {sigma}")
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    entries = {}
    if basis.kind is BasisKind.FOURIER:
        for k in itertools.product(range(-cutoff, cutoff + 1), repeat=basis.dim):
            m = max(abs(c) for c in k)
            entries[k] = (1.0 + m) ** (-sigma)
    else:
        for n in range(cutoff + 1):
            entries[(n,)] = (1.0 + n) ** (-sigma)
    return SpectralVector(basis, entries)


def dump_vector(u: SpectralVector) -> str:
    """One line per entry: coordinates, then real and imaginary parts.

    Fields are tab-separated, coordinates space-separated, floats in
    shortest round-trip decimal, keys in lexicographic order.
    """
    lines = []
    for j, v in u.items():
        coords = " ".join(str(c) for c in j)
        lines.append(f"{coords}\t{v.real!r}\t{v.imag!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_vector(text: str, basis: Basis) -> SpectralVector:
    entries = {}
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {i}: expected 3 tab-separated fields, got {len(parts)}")
        try:
            j = tuple(int(c) for c in parts[0].split())
            v = complex(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ValueError(f"line {i}: {exc}") from None
        if len(j) != basis.dim:
            raise ValueError(f"line {i}: expected {basis.dim} coordinates, got {len(j)}")
        entries[j] = v
    return SpectralVector(basis, entries)


def write_vector(u: SpectralVector, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_vector(u))


def read_vector(path, basis: Basis) -> SpectralVector:
    with open(path) as fh:
        return parse_vector(fh.read(), basis)
