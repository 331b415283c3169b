"""Beamspace transform, beam selection and the equivalent channel.

Two selection schemes are provided:

* single beam selection (SBS): one group of ``n_rf`` beams, ``n_rf / K`` per
  user, picked greedily by magnitude;
* hybrid beam selection (HBS): two disjoint groups of sizes ``g1`` and
  ``g2`` whose selector blocks are weighted ``xi`` and ``1 - xi``.

Both produce a :class:`HybridSelector`; SBS is the special case with an
empty second group and ``xi = 1``.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_matrix, check_count, check_unit_interval
from .exceptions import ConfigurationError


@dataclass(frozen=True, eq=False)
class BeamspaceChannel:
    """``H_b = F H``: one column per user, one row per beam."""

    matrix: np.ndarray

    @property
    def beam_energy(self):
        return np.abs(self.matrix) ** 2

    @property
    def M(self):
        return self.matrix.shape[0]

    @property
    def K(self):
        return self.matrix.shape[1]


@dataclass(frozen=True)
class SelectionGroup:
    """Selected beam indices and, for each, the user that claimed it."""

    beam_indices: tuple
    owner_user: tuple

    def __post_init__(self):
        if len(set(self.beam_indices)) != len(self.beam_indices):
            raise ConfigurationError("selection group contains repeated beams")
        if len(self.owner_user) != len(self.beam_indices):
            raise ConfigurationError("owner list does not match beam list")

    @property
    def size(self):
        return len(self.beam_indices)

    def beams_of(self, user):
        return tuple(b for b, u in zip(self.beam_indices, self.owner_user) if u == user)

    def matrix(self, M):
        """``M x size`` selector; column ``j`` is the basis vector of beam ``j``."""
        S = np.zeros((M, self.size))
        S[list(self.beam_indices), np.arange(self.size)] = 1.0
        return S


@dataclass(frozen=True)
class HybridSelector:
    """Two beam groups blended as ``S_h = [xi S1, (1 - xi) S2]``."""

    group1: SelectionGroup
    group2: SelectionGroup
    xi: float
    n_users: int

    def __post_init__(self):
        overlap = set(self.group1.beam_indices) & set(self.group2.beam_indices)
        if overlap:
            raise ConfigurationError(f"groups share beams {sorted(overlap)}")
        check_unit_interval(self.xi, "xi")

    @classmethod
    def single(cls, group, n_users):
        return cls(group, SelectionGroup((), ()), 1.0, n_users)

    @property
    def width(self):
        """Total number of selected beams ``N_RF_g = g1 + g2``."""
        return self.group1.size + self.group2.size

    @property
    def beam_indices(self):
        return self.group1.beam_indices + self.group2.beam_indices

    @property
    def owner_user(self):
        return np.array(self.group1.owner_user + self.group2.owner_user, dtype=int)

    @property
    def block_scale(self):
        return np.concatenate([np.full(self.group1.size, self.xi),
                               np.full(self.group2.size, 1.0 - self.xi)])

    @property
    def clusters(self):
        """Effective cluster count ``L_h = xi L1 + (1 - xi) L2``."""
        L1 = self.group1.size / self.n_users
        L2 = self.group2.size / self.n_users
        return self.xi * L1 + (1.0 - self.xi) * L2

    def matrix(self, M):
        return np.hstack([self.group1.matrix(M), self.group2.matrix(M)]) * self.block_scale


@dataclass(frozen=True, eq=False)
class EquivalentChannel:
    """``H_eq = S_h^H H_b``, shape ``N_RF_g x K``."""

    matrix: np.ndarray
    selector: HybridSelector

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def K(self):
        return self.matrix.shape[1]


def to_beamspace(channels, F):
    """Project a :class:`~hbsmimo.channel.ChannelSet` onto the beam grid."""
    H = channels.matrix if hasattr(channels, "matrix") else np.asarray(channels)
    if F.size != H.shape[0]:
        raise ConfigurationError(f"DFT size {F.size} does not match M={H.shape[0]}")
    return BeamspaceChannel(F.matrix @ H)


def _check_budget(budget, K, M, name):
    budget = check_count(budget, name, minimum=K)
    if budget % K:
        raise ConfigurationError(f"{name}={budget} is not a multiple of K={K}")
    if budget > M:
        raise ConfigurationError(f"{name}={budget} exceeds the {M} available beams")
    return budget


def _allocate(energy, budget, claimed):
    """Greedy per-user allocation of ``budget / K`` beams each.

    The unfinished user whose strongest unclaimed beam is largest goes next
    and takes its ``budget / K`` strongest unclaimed beams. Equal magnitudes
    resolve to the lower beam index, equal users to the lower user index.
    """
    M, K = energy.shape
    per_user = budget // K
    claimed = claimed.copy()
    if M - claimed.sum() < budget:
        raise ConfigurationError(
            f"only {M - claimed.sum()} unclaimed beams left for a budget of {budget}")
    owned = [None] * K
    pending = list(range(K))
    while pending:
        masked = np.where(claimed[:, None], -np.inf, energy[:, pending])
        best = masked.max(axis=0)
        user = pending[int(np.argmax(best))]
        col = np.where(claimed, -np.inf, energy[:, user])
        order = np.lexsort((np.arange(M), -col))[:per_user]
        owned[user] = [int(b) for b in order]
        claimed[order] = True
        pending.remove(user)
    beams = tuple(b for k in range(K) for b in owned[k])
    owners = tuple(k for k in range(K) for _ in owned[k])
    return SelectionGroup(beams, owners), claimed


def select_sbs(bs, n_rf):
    """Single beam selection: ``n_rf / K`` strongest beams per user.

    Parameters
    ----------
    bs : BeamspaceChannel
    n_rf : int
        RF-chain budget; a multiple of the user count, at most ``M``.

    Returns
    -------
    SelectionGroup
    """
    n_rf = _check_budget(n_rf, bs.K, bs.M, "n_rf")
    group, _ = _allocate(bs.beam_energy, n_rf, np.zeros(bs.M, dtype=bool))
    return group


def build_hybrid_selector(bs, g1, g2, xi):
    """Hybrid selection: group 1 as SBS with budget ``g1``, group 2 from the rest."""
    K, M = bs.K, bs.M
    g1 = _check_budget(g1, K, M, "g1")
    g2 = _check_budget(g2, K, M, "g2")
    xi = check_unit_interval(xi, "xi")
    if g1 + g2 > M:
        raise ConfigurationError(f"g1 + g2 = {g1 + g2} exceeds the {M} available beams")
    energy = bs.beam_energy
    group1, claimed = _allocate(energy, g1, np.zeros(M, dtype=bool))
    group2, _ = _allocate(energy, g2, claimed)
    return HybridSelector(group1, group2, xi, K)


def equivalent_channel(bs, sel):
    """Apply ``S_h^H`` to the beamspace channel."""
    idx = list(sel.beam_indices)
    if idx and (min(idx) < 0 or max(idx) >= bs.M):
        raise ConfigurationError("selector refers to beams outside [0, M)")
    H_eq = sel.block_scale[:, None] * bs.matrix[idx, :]
    return EquivalentChannel(H_eq, sel)


def captured_energy(bs, group):
    """Fraction of the total beamspace energy that lies on ``group``'s beams."""
    E = bs.beam_energy
    total = E.sum()
    if total == 0 or group.size == 0:
        return 0.0
    return float(E[list(group.beam_indices), :].sum() / total)


# ---------------------------------------------------------------------------
# estimator interface
#
# Inputs follow the scikit-learn convention of one row per sample: ``X`` is
# the transposed beamspace channel, shape (n_users, n_beams).
# ---------------------------------------------------------------------------

class SingleBeamSelector(TransformerMixin, BaseEstimator):
    """Transformer wrapping :func:`select_sbs`.

    Parameters
    ----------
    n_rf : int
        RF-chain budget.

    Attributes
    ----------
    selector_ : HybridSelector
        Selection learned by ``fit``; an SBS selector with ``xi = 1``.
    beam_indices_ : ndarray of int
    n_features_in_ : int
        Number of beams ``M`` seen during ``fit``.
    """

    def __init__(self, n_rf=48):
        self.n_rf = n_rf

    def _select(self, bs):
        return HybridSelector.single(select_sbs(bs, self.n_rf), bs.K)

    def fit(self, X, y=None):
        X = check_complex_matrix(X, "X")
        bs = BeamspaceChannel(X.T)
        self.selector_ = self._select(bs)
        self.beam_indices_ = np.array(self.selector_.beam_indices, dtype=int)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "selector_")
        X = check_complex_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ConfigurationError(
                f"X has {X.shape[1]} beams, selector was fitted on {self.n_features_in_}")
        return equivalent_channel(BeamspaceChannel(X.T), self.selector_).matrix.T


class HybridBeamSelector(SingleBeamSelector):
    """Transformer wrapping :func:`build_hybrid_selector`."""

    def __init__(self, g1=48, g2=32, xi=1.0):
        self.g1 = g1
        self.g2 = g2
        self.xi = xi

    def _select(self, bs):
        return build_hybrid_selector(bs, self.g1, self.g2, self.xi)
