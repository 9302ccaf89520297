"""Size-profile diagnostics behind the coefficient-decay estimates.

Every quantity here depends on an index tuple only through its max-norm
sizes, so exhaustive checks sweep size profiles directly: a sweep over
sizes 1..B covers all indices with max-norm at most B exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .indices import Index, max_norm


def mu(ks: Sequence[Index]) -> tuple[int, ...]:
    """Max-norm sizes of the tuple, sorted non-increasing (ties kept)."""
    if not ks:
        raise ValueError("profile of an empty tuple is undefined")
    return tuple(sorted((max_norm(k) for k in ks), reverse=True))


def a_theta(ell: Index, js: Sequence[Index], theta: float) -> float:
    """Decay kernel mu2^theta*mu3^(1-theta) / (same + mu1 - mu2).

    The profile is taken over the concatenated tuple (ell, j_1, ..., j_p);
    at least two input indices are needed so that mu3 exists.  The value
    lies in (0, 1] and equals 1 exactly when mu1 = mu2.
    """
    if len(js) < 2:
        raise ValueError("the kernel needs at least two input indices")
    prof = mu((ell, *js))
    m1, m2, m3 = prof[0], prof[1], prof[2]
    g = float(m2) ** theta * float(m3) ** (1.0 - theta)
    return g / (g + (m1 - m2))


@dataclass(frozen=True)
class KernelBoundReport:
    """Outcome of one exhaustive sweep of size(ell)*A_theta <= 2*mu1(js)."""

    p: int
    size_max: int
    theta: float
    checked: int
    max_ratio: float
    argmax: tuple[int, tuple[int, ...]]  # (ell size, j sizes)
    violations: tuple[tuple[int, tuple[int, ...], float, float], ...]

    def csv(self) -> str:
        """Violation rows as CSV: ell size, j sizes, lhs, rhs."""
        buf = io.StringIO()
        buf.write("ell_size," + ",".join(f"j{i+1}_size" for i in range(self.p)) + ",lhs,rhs\n")
        for ell_sz, j_sz, lhs, rhs in self.violations:
            buf.write(f"{ell_sz}," + ",".join(str(s) for s in j_sz) + f",{lhs!r},{rhs!r}\n")
        return buf.getvalue()


def check_kernel_bound(p: int, size_max: int, theta: float) -> KernelBoundReport:
    """Sweep all size profiles with entries in 1..size_max exhaustively.

    Checks size(ell) * A_theta(ell, js) <= 2 * mu1(js) for every profile of
    one output and p input sizes.  Vectorized; p = 3 at size_max = 30 is
    under a million rows.
    """
    if p < 2:
        raise ValueError(f"need p >= 2, got {p}")
    if size_max < 1:
        raise ValueError(f"size_max must be >= 1, got {size_max}")
    axes = np.meshgrid(*([np.arange(1, size_max + 1)] * (p + 1)), indexing="ij")
    grid = np.stack([a.ravel() for a in axes], axis=1).astype(float)
    prof = np.sort(grid, axis=1)[:, ::-1]
    g = prof[:, 1] ** theta * prof[:, 2] ** (1.0 - theta)
    kernel = g / (g + prof[:, 0] - prof[:, 1])
    lhs = grid[:, 0] * kernel
    rhs = 2.0 * grid[:, 1:].max(axis=1)
    ratio = lhs / rhs
    top = int(np.argmax(ratio))
    bad = np.nonzero(lhs > rhs * (1.0 + 1e-12))[0]
    violations = tuple(
        (int(grid[i, 0]), tuple(int(s) for s in grid[i, 1:]), float(lhs[i]), float(rhs[i]))
        for i in bad
    )
    return KernelBoundReport(
        p=p,
        size_max=size_max,
        theta=theta,
        checked=len(grid),
        max_ratio=float(ratio[top]),
        argmax=(int(grid[top, 0]), tuple(int(s) for s in grid[top, 1:])),
        violations=violations,
    )
