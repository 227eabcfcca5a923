"""Half-line Jacobi operators with a finitely supported perturbation.

The free operator has unit off-diagonals and zero diagonal; its spectrum
is the band [-2, 2].  A random n x n block coupled to the free half-line
through a single entry kappa becomes, after reduction and reordering, a
Jacobi operator whose first n coefficient pairs carry all the randomness:

    a = (|gamma| t_{n-1}, ..., |gamma| t_1, kappa),  b = (gamma s_n, ..., gamma s_1)

with (s, t) the tridiagonal block entries.  Everything past index n is
free.  Finite truncations provide an independent eigenvalue oracle for
the polynomial route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .ensembles import TridiagonalSample

DEFAULT_BAND_MARGIN = 0.01
DEFAULT_TRUNCATION_SIZE = 2000


@dataclass(frozen=True)
class JacobiCoefficients:
    """First n coefficient pairs of a perturbed half-line Jacobi operator.

    a_j > 0 are off-diagonal entries, b_j real diagonal entries, both
    1-based in the mathematical indexing (a[0] is a_1).  Entries beyond
    index n are implicitly free (a_j = 1, b_j = 0).
    """

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have equal length")
        if len(self.a) == 0:
            raise ValueError("need at least one coefficient pair")
        for j, x in enumerate(self.a):
            if not x > 0:
                raise ValueError(f"a[{j}] = {x} must be positive")

    @property
    def n(self) -> int:
        return len(self.a)


def perturbation_order(coeffs: JacobiCoefficients, tol: float = 0.0) -> int:
    """Smallest k such that a_j = 1 for j > k/2 and b_j = 0 for j > (k+1)/2.

    Equals 2j when the deepest nontrivial entry is a_j, and 2j - 1 when it
    is b_j with all a's at or beyond j trivial.  Returns 0 for the free
    operator.  This also equals the number of nonzero roots of the final
    recursion polynomial.
    """
    a, b = coeffs.a, coeffs.b
    for j in range(coeffs.n, 0, -1):
        if abs(a[j - 1] - 1.0) > tol:
            return 2 * j
        if abs(b[j - 1]) > tol:
            return 2 * j - 1
    return 0


def assemble_coupled(
    sample: TridiagonalSample, gamma: float, kappa: float
) -> JacobiCoefficients:
    """Coefficients of the coupled operator for a given finite block.

    Order reversal puts the block's last row next to the lead, so the
    coupling entry kappa lands at position a_n.
    """
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    s, t = sample.s, sample.t
    ag = abs(gamma)
    a = tuple(ag * x for x in reversed(t)) + (kappa,)
    b = tuple(gamma * x for x in reversed(s))
    return JacobiCoefficients(a, b)


@dataclass(frozen=True)
class TruncatedOperator:
    """Leading size x size section of the half-line operator."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)


def truncate(coeffs: JacobiCoefficients, size: int) -> TruncatedOperator:
    """Finite section containing every perturbed entry (size >= n + 1)."""
    n = coeffs.n
    if size < n + 1:
        raise ValueError(f"truncation size {size} must be at least n + 1 = {n + 1}")
    diag = np.zeros(size)
    diag[:n] = coeffs.b
    off = np.ones(size - 1)
    off[:n] = coeffs.a
    return TruncatedOperator(diag, off)


def tridiag_eigenvalues(op: TruncatedOperator) -> np.ndarray:
    """All eigenvalues of the finite section, ascending."""
    return eigvalsh_tridiagonal(op.diag, op.offdiag)


def eigenvalues_in_range(op: TruncatedOperator, lo: float, hi: float) -> np.ndarray:
    """Eigenvalues in (lo, hi], by Sturm bisection; cheap for narrow windows."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    vals = eigvalsh_tridiagonal(
        op.diag, op.offdiag, select="v", select_range=(lo, hi), lapack_driver="stebz"
    )
    return np.sort(vals)


def eigenvalues_outside_band(
    coeffs: JacobiCoefficients,
    size: int = DEFAULT_TRUNCATION_SIZE,
    margin: float = DEFAULT_BAND_MARGIN,
) -> np.ndarray:
    """Truncation eigenvalues below -2 - margin or above 2 + margin, ascending.

    For large sections these approximate the genuine point spectrum: the
    free tail's spectrum stays inside (-2, 2), so anything found out here
    is a perturbation-induced bound state.  Bound-state eigenfunctions
    decay exponentially, making the truncation error negligible against
    the margin already at modest sizes.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    op = truncate(coeffs, size)
    # Gershgorin bound keeps the search window finite
    bound = float(np.max(np.abs(op.diag)) + 2.0 * np.max(np.abs(op.offdiag))) + 1.0
    lo = -2.0 - margin
    hi = 2.0 + margin
    below = eigenvalues_in_range(op, -bound, lo) if -bound < lo else np.empty(0)
    above = eigenvalues_in_range(op, hi, bound) if hi < bound else np.empty(0)
    return np.concatenate([below, above])
