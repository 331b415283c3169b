"""Random vector quantization (RVQ) of equivalent channels and its error law.

Each user owns a codebook of ``2**bits`` unit vectors obtained by pushing
isotropic Gaussian vectors ``c ~ CN(0, I_M)`` through ``S_h^H F`` and
normalizing. It reports the index of the codeword closest in angle to its
equivalent channel. The quantization error is
``Z = 1 - cos^2(angle(h, codeword))``.

For an isotropic channel direction in ``C^L`` the error has CCDF
``(1 - z^(L-1))^(2^N)`` and mean
``Gamma(2^N + 1) Gamma(L/(L-1)) / Gamma(2^N + L/(L-1))``; both are provided,
together with an adaptive-quadrature evaluation of the mean that does not
use the gamma-function form.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _rng
from ._validation import check_complex_matrix, check_complex_vector, check_count
from .exceptions import ConfigurationError, DomainError, NumericalError
from .numerics import log_gamma

#: codewords whose projected norm falls below this are redrawn
MIN_CODEWORD_NORM = 1e-12
MAX_RESAMPLE = 16
#: rows generated per chunk when streaming a codebook
CHUNK_ROWS = 1 << 15
QUAD_TOL = 1e-12
MAX_QUAD_BITS = 20
#: largest codebook that is ever drawn, 2**24 codewords
MAX_CODEBOOK_BITS = 24

SUPPORTS = ("user", "full")
METHODS = ("project", "direct")


@dataclass(frozen=True, eq=False)
class Codebook:
    """``2**bits`` unit-norm codewords of length ``N_RF_g`` for one user."""

    entries: np.ndarray
    bits: int
    user: int
    seed: int = None
    support: str = "user"

    def __post_init__(self):
        self.entries.setflags(write=False)

    def __len__(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class QuantizationResult:
    index: int
    qe: float
    quantized_channel: np.ndarray


def feedback_bits(gamma_db, K, L):
    """Feedback budget ``floor((gamma/3)(L-1) + (L-1) log2(K-1))``.

    ``gamma_db`` is the received SNR in dB. ``L`` may be fractional (an
    effective cluster count); ``L = 1`` gives zero bits.
    """
    K = check_count(K, "K", minimum=1)
    if K < 2:
        raise DomainError("feedback_bits needs K >= 2 (log2(K-1) undefined at K=1)")
    L = float(L)
    gamma_db = float(gamma_db)
    if L < 1:
        raise DomainError(f"cluster count must be >= 1, got {L}")
    if gamma_db < 0:
        raise DomainError(f"gamma_db must be >= 0, got {gamma_db}")
    raw = (gamma_db / 3.0) * (L - 1.0) + (L - 1.0) * math.log2(K - 1)
    # guard against 6.99999... from rounding when raw is integral
    return max(0, int(math.floor(raw + 1e-9)))


def codeword_mask(sel, user, support="user"):
    """Rows of ``S_h^H F c`` that a user's codewords may occupy."""
    if support not in SUPPORTS:
        raise ConfigurationError(f"support must be one of {SUPPORTS}, got {support!r}")
    scale = sel.block_scale
    active = scale != 0.0
    if support == "user":
        active &= sel.owner_user == user
    return active


def _codeword_chunks(sel, F, bits, user, rng, support, method):
    """Yield ``(rows, block)``: consecutive blocks of normalized codewords.

    ``block`` holds only the columns listed in ``rows``; every other entry of
    a codeword is zero. The blocks concatenate to the same codebook whatever
    the chunk size, because each one draws ``(n, dim, 2)`` normals from the
    same stream.
    """
    if bits > MAX_CODEBOOK_BITS:
        raise ConfigurationError(
            f"{bits} feedback bits exceed the codebook limit of {MAX_CODEBOOK_BITS}")
    scale = sel.block_scale
    mask = codeword_mask(sel, user, support)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise ConfigurationError(f"user {user} has no active beams to quantize on")
    n_total = 1 << bits
    beams = np.asarray(sel.beam_indices)[rows]
    weights = scale[rows]
    if method == "project":
        F_sel = F.matrix[beams, :]
        dim = F.size
    elif method == "direct":
        dim = rows.size
    else:
        raise ConfigurationError(f"method must be one of {METHODS}, got {method!r}")

    def draw(n):
        g = rng.standard_normal((n, dim, 2))
        c = (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5)
        return c @ F_sel.T if method == "project" else c

    done = 0
    while done < n_total:
        n = min(CHUNK_ROWS, n_total - done)
        proj = draw(n) * weights
        norms = np.linalg.norm(proj, axis=1)
        bad = np.flatnonzero(norms < MIN_CODEWORD_NORM)
        tries = 0
        while bad.size:
            if tries == MAX_RESAMPLE:
                raise NumericalError(
                    f"codeword norm stayed below {MIN_CODEWORD_NORM} after "
                    f"{MAX_RESAMPLE} redraws (user {user})")
            proj[bad] = draw(bad.size) * weights
            norms[bad] = np.linalg.norm(proj[bad], axis=1)
            bad = bad[norms[bad] < MIN_CODEWORD_NORM]
            tries += 1
        yield rows, proj / norms[:, None]
        done += n


def generate_codebook(sel, F, bits, user, seed=0, trial=0, support="user",
                      method="project"):
    """Build user ``user``'s RVQ codebook.

    Parameters
    ----------
    sel : HybridSelector
    F : UnitaryDft
    bits : int
        Codebook size is ``2**bits``.
    user : int
    seed : int or numpy.random.Generator
        An integer selects the substream ``(seed, trial, CODEBOOK, user)``.
    support : {"user", "full"}
        ``"user"`` keeps only the rows of the beams this user claimed;
        ``"full"`` keeps every active row of ``S_h``.
    method : {"project", "direct"}
        ``"project"`` draws ``c ~ CN(0, I_M)`` and applies the selected rows
        of ``F``; ``"direct"`` draws the selected coordinates themselves,
        which has the same distribution because ``F`` is unitary.

    Returns
    -------
    Codebook
    """
    bits = check_count(bits, "bits", minimum=0)
    _check_extent(sel, F)
    rng, seed_value = _stream(seed, trial, user)
    entries = np.zeros((1 << bits, sel.width), dtype=complex)
    start = 0
    for rows, block in _codeword_chunks(sel, F, bits, user, rng, support, method):
        entries[start:start + block.shape[0], rows] = block
        start += block.shape[0]
    return Codebook(entries, bits, int(user), seed_value, support)


def _check_extent(sel, F):
    idx = sel.beam_indices
    if idx and max(idx) >= F.size:
        raise ConfigurationError(
            f"selector refers to beam {max(idx)}, DFT has only {F.size} beams")


def _stream(seed, trial, user):
    if isinstance(seed, np.random.Generator):
        return seed, None
    return _rng.substream(int(seed), trial, _rng.CODEBOOK, user), int(seed)


def quantize(h_eq, cb):
    """Pick the codeword with the smallest quantization error.

    Ties go to the lowest index. Returns the index, its error and
    ``||h_eq|| * codeword``.
    """
    h = check_complex_vector(h_eq, "h_eq")
    entries = cb.entries if isinstance(cb, Codebook) else check_complex_matrix(cb, "cb")
    if entries.shape[1] != h.shape[0]:
        raise ConfigurationError(
            f"codeword length {entries.shape[1]} != channel length {h.shape[0]}")
    norm2 = float(np.vdot(h, h).real)
    if norm2 == 0.0:
        raise DomainError("cannot quantize a zero channel")
    # |c^H h| == |c^T conj(h)|, avoids conjugating the whole codebook
    gains = np.abs(entries @ h.conj()) ** 2 / norm2
    i = int(np.argmax(gains))
    qe = float(min(max(1.0 - gains[i], 0.0), 1.0))
    return QuantizationResult(i, qe, math.sqrt(norm2) * entries[i])


def quantize_streaming(h_eq, sel, F, bits, user, seed=0, trial=0, support="user",
                       method="direct"):
    """Same result as ``quantize(h_eq, generate_codebook(...))`` without
    holding the whole codebook in memory."""
    h = check_complex_vector(h_eq, "h_eq")
    bits = check_count(bits, "bits", minimum=0)
    norm2 = float(np.vdot(h, h).real)
    if norm2 == 0.0:
        raise DomainError("cannot quantize a zero channel")
    _check_extent(sel, F)
    rng, _ = _stream(seed, trial, user)
    best_gain, best_idx, best_word, offset = -1.0, -1, None, 0
    for rows, block in _codeword_chunks(sel, F, bits, user, rng, support, method):
        gains = np.abs(block @ h[rows].conj()) ** 2
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain, best_idx = float(gains[i]), offset + i
            best_word = np.zeros(h.shape[0], dtype=complex)
            best_word[rows] = block[i]
        offset += block.shape[0]
    qe = float(min(max(1.0 - best_gain / norm2, 0.0), 1.0))
    return QuantizationResult(best_idx, qe, math.sqrt(norm2) * best_word)


def _check_clusters(L):
    L = float(L)
    if not L >= 2:
        raise DomainError(
            f"the quantization-error law needs at least 2 clusters, got L={L}")
    return L


def qe_ccdf(z, L, bits):
    """``Pr(Z >= z) = (1 - z^(L-1))^(2^N)``, evaluated in log domain."""
    L = _check_clusters(L)
    bits = check_count(bits, "bits", minimum=0)
    z = np.asarray(z, dtype=float)
    if np.any((z < 0) | (z > 1)):
        raise DomainError("z must lie in [0, 1]")
    base = z ** (L - 1.0)
    with np.errstate(divide="ignore"):
        out = np.where(base < 1.0, np.exp((2.0 ** bits) * np.log1p(-np.minimum(base, 1.0))), 0.0)
    return float(out) if out.ndim == 0 else out


def expected_qe_closed(L, bits):
    """Mean RVQ error ``2^N Gamma(2^N) Gamma(L/(L-1)) / Gamma(2^N + L/(L-1))``."""
    L = _check_clusters(L)
    bits = check_count(bits, "bits", minimum=0)
    n = 2.0 ** bits
    a = L / (L - 1.0)
    # 2^N Gamma(2^N) = Gamma(2^N + 1)
    return math.exp(log_gamma(n + 1.0) + log_gamma(a) - log_gamma(n + a))


def expected_qe_numeric(L, bits):
    """Integrate the CCDF over ``[0, 1]`` with adaptive quadrature.

    The integrand drops from 1 to 0 within ``~2^(-N/(L-1))`` of the origin, so
    the interval is cut at geometrically spaced points around that width and
    each piece is integrated separately.
    """
    L = _check_clusters(L)
    bits = check_count(bits, "bits", minimum=0)
    if bits > MAX_QUAD_BITS:
        raise DomainError(f"quadrature oracle limited to bits <= {MAX_QUAD_BITS}")
    n = 2.0 ** bits
    p = L - 1.0

    def f(z):
        return math.exp(n * math.log1p(-z ** p)) if z < 1.0 else 0.0

    width = 2.0 ** (-bits / p)
    cuts = [c for c in width * 4.0 ** np.arange(-2, 14) if 0.0 < c < 1.0]
    edges = [0.0] + cuts + [1.0]
    total, err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad(f, a, b, epsabs=QUAD_TOL / len(edges), epsrel=1e-13,
                                limit=200)
        total += val
        err += e
    if err > QUAD_TOL:
        raise NumericalError(
            f"quadrature error estimate {err:.2e} above {QUAD_TOL:.0e} "
            f"for L={L}, bits={bits}", estimate=total)
    return total


def qe_case_bound(L, bits, case):
    """Upper bound on the mean error: ``2^-N`` (case I) or ``2^(-N/2)`` (case II)."""
    _check_clusters(L)
    bits = float(bits)
    if case in ("I", 1):
        return 2.0 ** (-bits)
    if case in ("II", 2):
        return 2.0 ** (-bits / 2.0)
    raise DomainError(f"case must be 'I' or 'II', got {case!r}")


def sample_isotropic_qe(L, bits, n_samples, seed=0):
    """Quantization errors of isotropic directions in ``C^L``.

    Each sample pairs a fresh random direction with a fresh codebook of
    ``2**bits`` isotropic unit vectors and runs :func:`quantize`, so the
    errors are i.i.d. draws from the law that :func:`qe_ccdf` describes.
    """
    L = check_count(L, "L", minimum=1)
    bits = check_count(bits, "bits", minimum=0)
    n_samples = check_count(n_samples, "n_samples")
    rng = _rng.as_generator(seed) if not isinstance(seed, int) else _rng.substream(
        seed, _rng.VALIDATION, L, bits)
    out = np.empty(n_samples)
    size = 1 << bits
    for s in range(n_samples):
        g = rng.standard_normal((size + 1, L, 2))
        c = g[..., 0] + 1j * g[..., 1]
        words = c[1:] / np.linalg.norm(c[1:], axis=1, keepdims=True)
        out[s] = quantize(c[0], words).qe
    return out


class RVQQuantizer(TransformerMixin, BaseEstimator):
    """Per-user RVQ of an equivalent channel.

    ``fit`` draws one codebook per user for a given selector; ``transform``
    maps equivalent channels (one row per user, shape ``(K, N_RF_g)``) to
    their quantized versions ``||h|| * codeword``.

    Parameters
    ----------
    bits : int
    support : {"user", "full"}
    method : {"project", "direct"}
    random_state : int
        Base seed of the codebook substreams.

    Attributes
    ----------
    codebooks_ : list of Codebook
    qe_ : ndarray
        Errors from the last ``transform`` call.
    indices_ : ndarray of int
        Codeword indices fed back in the last ``transform`` call.
    """

    def __init__(self, bits=7, support="user", method="direct", random_state=0):
        self.bits = bits
        self.support = support
        self.method = method
        self.random_state = random_state

    def fit(self, X, y=None, selector=None, dft=None):
        X = check_complex_matrix(X, "X")
        if selector is None or dft is None:
            raise ConfigurationError("RVQQuantizer.fit needs the selector and the DFT")
        if X.shape[1] != selector.width:
            raise ConfigurationError(
                f"X has {X.shape[1]} columns, selector width is {selector.width}")
        self.codebooks_ = [
            generate_codebook(selector, dft, self.bits, k, self.random_state,
                              support=self.support, method=self.method)
            for k in range(X.shape[0])]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "codebooks_")
        X = check_complex_matrix(X, "X")
        if X.shape[0] != len(self.codebooks_):
            raise ConfigurationError(
                f"fitted for {len(self.codebooks_)} users, got {X.shape[0]}")
        results = [quantize(X[k], cb) for k, cb in enumerate(self.codebooks_)]
        self.qe_ = np.array([r.qe for r in results])
        self.indices_ = np.array([r.index for r in results])
        return np.vstack([r.quantized_channel for r in results])
