"""Gauss-Hermite quadrature (weight e^{-x^2}) and normalized Hermite functions.

Nodes come from the symmetric tridiagonal Jacobi matrix of the Hermite
recurrence, polished by one Newton step on the normalized Hermite function
chi_n.  Weights are evaluated through the stable identity

    w_i = exp(-x_i^2) / (n * chi_{n-1}(x_i)^2)

which also yields the scaled weights w_i * exp(x_i^2) without underflow;
evaluators that integrate products of Hermite functions need those, since
the plain weights degrade below ~1e-308 once n grows past a few hundred.

Inside the rule builder the chi recurrence carries an explicit power-of-two
exponent: near the classical edge of a large rule the seed exp(-x^2/2)
underflows in doubles even though chi_{n-1} there is O(1), so the plain
recurrence would turn into exact zeros and poison both the Newton step and
the weight identity.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

# Past this count the plain weights underflow so badly that a rule is no
# longer representable in doubles end to end.
MAX_NODES = 1024

_SQRT2 = math.sqrt(2.0)
_LOG2E = math.log2(math.e)


def _chi_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """chi_{n-1}(x) and chi_n(x) as mantissas v0, v1 with a shared exponent e.

    The true values are v * 2**e.  Renormalization multiplies by exact powers
    of two, so precision matches the plain recurrence wherever that one stays
    in range.  Ratios of the pair can be taken on the mantissas directly.
    """
    t = -0.5 * x * x * _LOG2E
    e = np.floor(t).astype(np.int32)
    v0 = math.pi**-0.25 * np.exp2(t - e)
    v1 = _SQRT2 * x * v0
    for k in range(2, n + 1):
        v0, v1 = v1, x * math.sqrt(2.0 / k) * v1 - math.sqrt((k - 1.0) / k) * v0
        m = np.maximum(np.abs(v0), np.abs(v1))
        wild = (m > 2.0**500) | ((m > 0.0) & (m < 2.0**-500))
        if wild.any():
            shift = np.where(wild, np.frexp(m)[1], np.int32(0))
            v0 = np.ldexp(v0, -shift)
            v1 = np.ldexp(v1, -shift)
            e += shift
    return v0, v1, e


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals against e^{-x^2} on the line."""

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> float:
        """Apply plain weights to integrand values at the nodes."""
        return float(np.dot(self.weights, values))


def hermite_function(n: int, x: float) -> float:
    """Normalized Hermite function chi_n(x), orthonormal on the line.

    chi_0(x) = pi**-0.25 * exp(-x**2/2) and the three-term recurrence

        chi_{n+1}(x) = x*sqrt(2/(n+1))*chi_n(x) - sqrt(n/(n+1))*chi_{n-1}(x)

    never forms the Hermite polynomial or a factorial, so it is stable for
    large n and decays with the Gaussian built in.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    h0 = math.pi**-0.25 * math.exp(-0.5 * x * x)
    if n == 0:
        return h0
    h1 = _SQRT2 * x * h0
    for k in range(2, n + 1):
        h0, h1 = h1, x * math.sqrt(2.0 / k) * h1 - math.sqrt((k - 1.0) / k) * h0
    return h1


def hermite_batch(nmax: int, x) -> np.ndarray:
    """All chi_0(x), ..., chi_nmax(x) as rows, for scalar or array x."""
    if nmax < 0:
        raise ValueError(f"order must be >= 0, got {nmax}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = _SQRT2 * x * out[0]
    for k in range(2, nmax + 1):
        out[k] = x * math.sqrt(2.0 / k) * out[k - 1] - math.sqrt((k - 1.0) / k) * out[k - 2]
    return out


@functools.lru_cache(maxsize=None)
def gauss_hermite_rule(n: int) -> QuadratureRule:
    """n-node Gauss-Hermite rule, exact for polynomial degree <= 2n - 1.

    Parameters
    ----------
    n : int
        Node count, 1 <= n <= 1024.

    Returns
    -------
    QuadratureRule
        Strictly increasing nodes symmetric about 0, positive plain weights
        summing to sqrt(pi), and underflow-safe scaled weights.
    """
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if n > MAX_NODES:
        raise ValueError(f"weight underflow: {n} nodes exceed the supported maximum {MAX_NODES}")
    diag = np.zeros(n)
    off = np.sqrt(np.arange(1, n) / 2.0)
    x = eigh_tridiagonal(diag, off, eigvals_only=True)
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry about 0
    if n > 1:
        # one Newton step on chi_n; chi_n'(x) = sqrt(2n) chi_{n-1}(x) - x chi_n(x)
        v0, v1, _ = _chi_pair(n, x)
        deriv = math.sqrt(2.0 * n) * v0 - x * v1
        x = x - np.divide(v1, deriv, out=np.zeros_like(x), where=deriv != 0.0)
        x = 0.5 * (x - x[::-1])
    if np.any(np.diff(x) <= 0.0):
        bad = int(np.argmax(np.diff(x) <= 0.0))
        raise RuntimeError(f"node refinement failed between nodes {bad} and {bad + 1} for n={n}")
    v0, _, e = _chi_pair(n, x)
    chi_last = np.ldexp(v0, e)  # chi_{n-1} at the nodes is always representable
    scaled = 1.0 / (n * chi_last**2)
    weights = scaled * np.exp(-x * x)
    for arr in (x, weights, scaled):
        arr.setflags(write=False)
    return QuadratureRule(nodes=x, weights=weights, scaled_weights=scaled)
