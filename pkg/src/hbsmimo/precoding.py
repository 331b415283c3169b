"""Zero-forcing precoding on the equivalent channel and rate metrics.

Noise has unit variance and data symbols unit power, so both are handled
analytically inside the SINR expressions; nothing is simulated at symbol
level.
"""
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_matrix
from .exceptions import ConfigurationError, NumericalError
from .numerics import right_pseudoinverse

#: leakage |h_k^H w_i| / ||h_k|| tolerated when CSI is perfect
NULLING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Precoder:
    """Unit-norm ZF columns ``W`` and the pre-normalization column norms."""

    matrix: np.ndarray
    normalization: np.ndarray


@dataclass(frozen=True, eq=False)
class RateSample:
    per_user_perfect: np.ndarray
    per_user_quantized: np.ndarray
    snr_linear: float
    K: int

    @property
    def loss(self):
        return self.per_user_perfect - self.per_user_quantized


@dataclass(frozen=True)
class RateLoss:
    per_user: np.ndarray
    mean: float


def _as_matrix(H):
    return check_complex_matrix(getattr(H, "matrix", H), "H_eq")


def zf_precoder(H_eq):
    """Normalized right pseudoinverse of the downlink matrix ``H_eq^H``.

    Parameters
    ----------
    H_eq : EquivalentChannel or array_like, shape (N_RF_g, K)

    Returns
    -------
    Precoder
        ``matrix`` has shape ``(N_RF_g, K)`` with unit-norm columns.

    Raises
    ------
    SingularityError
        If ``H_eq`` does not have full column rank, e.g. when a user has no
        energy on any selected beam.
    """
    H = _as_matrix(H_eq)
    G = H.conj().T
    P = right_pseudoinverse(G, name="effective channel H_eq^H")
    norms = np.linalg.norm(P, axis=0)
    return Precoder(P / norms, norms)


def _gains(H, W, rho, K):
    return (rho / K) * np.abs(H.conj().T @ W) ** 2


def rate_perfect(H_eq, rho, K=None):
    """Per-user ZF rate ``log2(1 + (rho/K) |h_k^H w_k|^2)`` with perfect CSI."""
    H = _as_matrix(H_eq)
    K = H.shape[1] if K is None else K
    W = zf_precoder(H).matrix
    cross = np.abs(H.conj().T @ W)
    np.fill_diagonal(cross, 0.0)
    col_norms = np.linalg.norm(H, axis=0)
    leak = (cross / col_norms[:, None]).max() if H.shape[1] > 1 else 0.0
    if leak > NULLING_TOL:
        raise NumericalError(f"ZF leakage {leak:.2e} exceeds {NULLING_TOL:.0e}")
    return np.log2(1.0 + (rho / K) * np.abs(np.einsum("nk,nk->k", H.conj(), W)) ** 2)


def rate_quantized(H_eq, H_hat, rho, K=None):
    """Per-user rate when ZF is designed on ``H_hat`` but the channel is ``H_eq``.

    Residual interference ``sum_{i != k} (rho/K) |h_k^H w_i|^2`` enters the
    denominator next to the unit noise power.
    """
    H = _as_matrix(H_eq)
    Hh = _as_matrix(H_hat)
    if H.shape != Hh.shape:
        raise ConfigurationError(f"shape mismatch {H.shape} vs {Hh.shape}")
    K = H.shape[1] if K is None else K
    W = zf_precoder(Hh).matrix
    g = _gains(H, W, rho, K)
    signal = np.diag(g)
    interference = g.sum(axis=1) - signal
    return np.log2(1.0 + signal / (1.0 + interference))


def rate_loss(perfect, quantized):
    perfect = np.asarray(perfect, dtype=float)
    quantized = np.asarray(quantized, dtype=float)
    if perfect.shape != quantized.shape:
        raise ConfigurationError(f"length mismatch {perfect.shape} vs {quantized.shape}")
    diff = perfect - quantized
    return RateLoss(diff, float(diff.mean()) if diff.size else 0.0)


def rate_loss_bound(gamma_linear, K, expected_qe):
    """``log2(1 + gamma (K - 1) E[Z])``; ``gamma`` on a linear scale."""
    if gamma_linear < 0 or expected_qe < 0 or K < 1:
        raise ConfigurationError("rate_loss_bound needs nonnegative inputs and K >= 1")
    return math.log2(1.0 + gamma_linear * (K - 1) * expected_qe)


def received_snr_estimate(samples, rho, K):
    """Received SNR ``(rho/K) E ||h_eq,k||^2`` over users and trials.

    Parameters
    ----------
    samples : sequence of (N_RF_g, K) arrays or EquivalentChannel
    rho : float
        Transmit power.
    K : int

    Returns
    -------
    (float, float)
        Linear SNR and the same value in dB.
    """
    energies = [np.sum(np.abs(_as_matrix(s)) ** 2, axis=0) for s in samples]
    if not energies:
        raise ConfigurationError("received_snr_estimate needs at least one sample")
    mean_energy = float(np.mean(np.concatenate(energies)))
    lin = (rho / K) * mean_energy
    db = 10.0 * math.log10(lin) if lin > 0 else -math.inf
    return lin, db


class ZeroForcingPrecoder(BaseEstimator):
    """Estimator form of :func:`zf_precoder`.

    ``X`` holds one user per row: ``X[k] = h_eq,k^T``, shape ``(K, N_RF_g)``.

    Attributes
    ----------
    coef_ : ndarray, shape (N_RF_g, K)
        Unit-norm precoding columns.
    normalization_ : ndarray, shape (K,)
    """

    def fit(self, X, y=None):
        X = check_complex_matrix(X, "X")
        pre = zf_precoder(X.T)
        self.coef_ = pre.matrix
        self.normalization_ = pre.normalization
        self.n_features_in_ = X.shape[1]
        return self

    def effective_channel(self, X):
        """``H^H W`` for the channels in ``X``; diagonal when ``X`` was fitted."""
        check_is_fitted(self, "coef_")
        X = check_complex_matrix(X, "X")
        return X.conj() @ self.coef_

    def rates(self, X, rho):
        """Per-user rates of channels ``X`` under the fitted precoder."""
        g = (rho / X.shape[0]) * np.abs(self.effective_channel(X)) ** 2
        signal = np.diag(g)
        return np.log2(1.0 + signal / (1.0 + g.sum(axis=1) - signal))

