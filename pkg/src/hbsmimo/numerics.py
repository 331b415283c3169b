"""Complex linear algebra and special functions used by the other modules.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the only wrapper
type is :class:`UnitaryDft`, which carries the array size alongside the
matrix so that callers can check conformance.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import special

from ._validation import check_complex_matrix, check_complex_vector, check_count
from .exceptions import ConfigurationError, DomainError, SingularityError

#: residual bound on ``G @ pinv(G) - I`` that the pseudoinverse guarantees
PINV_RESIDUAL_TOL = 1e-9
#: largest 2-norm condition number accepted before inversion is refused
MAX_CONDITION = 1e12
#: unitarity tolerance of the DFT matrix, per entry
UNITARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class UnitaryDft:
    """Spatial DFT ``F`` of an ``size``-element array.

    Row ``m`` is the Hermitian transpose of the steering vector at spatial
    frequency ``m / size``, so ``F @ h`` maps an antenna-domain channel onto
    beam coordinates.
    """

    size: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def apply(self, H):
        H = np.asarray(H)
        if H.shape[0] != self.size:
            raise ConfigurationError(
                f"DFT of size {self.size} cannot act on {H.shape[0]} antennas")
        return self.matrix @ H


def dft_matrix(M):
    """Build the unitary spatial DFT of size ``M``.

    Parameters
    ----------
    M : int
        Number of antennas, at least 1.

    Returns
    -------
    UnitaryDft
    """
    M = check_count(M, "M")
    n = np.arange(M)
    # conj of the steering vector at phi = m/M, one row per beam
    F = np.exp(2j * np.pi * np.outer(n, n) / M) / np.sqrt(M)
    return UnitaryDft(M, F)


def cos2_angle(u, v):
    """Squared cosine of the angle between two complex vectors.

    Computes ``|u^H v|^2 / (||u||^2 ||v||^2)``, clipped into ``[0, 1]``.
    Raises :class:`DomainError` if either vector is zero.
    """
    u = check_complex_vector(u, "u")
    v = check_complex_vector(v, "v")
    if u.shape != v.shape:
        raise DomainError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    nu = np.vdot(u, u).real
    nv = np.vdot(v, v).real
    if nu == 0.0 or nv == 0.0:
        raise DomainError("cos2_angle is undefined for a zero vector")
    c = abs(np.vdot(u, v)) ** 2 / (nu * nv)
    return float(min(max(c, 0.0), 1.0))


def right_pseudoinverse(G, name="G"):
    """Right inverse ``G^H (G G^H)^{-1}`` of a wide, full-row-rank matrix.

    Computed from a thin QR factorization ``G^H = Q R`` as ``Q R^{-H}``, which
    keeps the error proportional to the condition number of ``G`` rather
    than its square. A condition number above ``MAX_CONDITION`` raises
    :class:`SingularityError` carrying the offending matrix.

    Parameters
    ----------
    G : array_like, shape (K, N)
        Matrix with ``N >= K``.
    name : str
        Label used in error messages.

    Returns
    -------
    ndarray, shape (N, K)
    """
    G = check_complex_matrix(G, name)
    K, N = G.shape
    if N < K:
        raise SingularityError(
            f"{name} is {K}x{N}: a right inverse needs at least as many columns as rows",
            matrix=G)
    Q, R = np.linalg.qr(G.conj().T, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    cond = np.inf if sv[-1] == 0.0 else float(sv[0] / sv[-1])
    if not cond <= MAX_CONDITION:
        raise SingularityError(
            f"{name} ({K}x{N}) is rank deficient or ill-conditioned "
            f"(condition estimate {cond:.3g} > {MAX_CONDITION:.0e})",
            matrix=G, condition=cond)
    # G^H = QR  =>  G G^H = R^H R  and  G^+ = Q R^{-H}
    return Q @ scipy.linalg.solve_triangular(R, np.eye(K), trans="C", lower=False)


def log_gamma(x):
    """Natural logarithm of the gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or not np.isfinite(x):
        raise DomainError(f"log_gamma needs a finite x > 0, got {x}")
    return float(special.gammaln(x))


def beta_fn(x, y):
    """Beta function ``Gamma(x) Gamma(y) / Gamma(x + y)`` via log-gamma."""
    x, y = float(x), float(y)
    if not (x > 0.0 and y > 0.0):
        raise DomainError(f"beta_fn needs positive arguments, got ({x}, {y})")
    return float(np.exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y)))
