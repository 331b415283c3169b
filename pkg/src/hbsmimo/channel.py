"""Sparse multipath far-field channels for a uniform linear array.

User ``k`` sees ``h_k = sum_i alpha_{k,i} a(phi_{k,i})`` with ``L`` paths, where
``a`` is the unit-norm ULA steering vector and ``phi = (d / lambda) sin(theta)``.
Angles of departure are uniform on ``[-pi/2, pi/2]`` and gains are
``CN(0, 1/L)`` so that ``E ||h_k||^2 = 1`` for every ``L``.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._validation import check_count
from .exceptions import ConfigurationError, DomainError, ReportIOError

SPEED_OF_LIGHT = 299_792_458.0
MAX_PATHS = 3


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array; half-wavelength spacing unless given."""

    M: int
    carrier_hz: float = 60e9
    spacing_m: float = None

    def __post_init__(self):
        check_count(self.M, "M")
        if not self.carrier_hz > 0:
            raise ConfigurationError(f"carrier_hz must be positive, got {self.carrier_hz}")
        if self.spacing_m is None:
            object.__setattr__(self, "spacing_m", self.wavelength_m / 2)
        elif not self.spacing_m > 0:
            raise ConfigurationError(f"spacing_m must be positive, got {self.spacing_m}")

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def spacing_ratio(self):
        """Antenna spacing in wavelengths, ``d / lambda``."""
        return self.spacing_m / self.wavelength_m


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    aod_rad: float
    spatial_freq: float


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Channels of ``K`` users, one column per user.

    ``users`` holds the path decomposition of each column; it may be empty
    for ensembles imported from a file that carried no paths.
    """

    geometry: ArrayGeometry
    users: tuple
    matrix: np.ndarray
    seed: int = None
    n_paths: int = field(default=None)

    def __post_init__(self):
        self.matrix.setflags(write=False)
        if self.n_paths is None and self.users:
            object.__setattr__(self, "n_paths", len(self.users[0]))

    @property
    def K(self):
        return self.matrix.shape[1]

    @property
    def M(self):
        return self.matrix.shape[0]

    def reconstruct(self):
        """Rebuild the channel matrix from the stored paths."""
        H = np.zeros((self.M, len(self.users)), dtype=complex)
        for k, paths in enumerate(self.users):
            for p in paths:
                H[:, k] += p.gain * steering_vector(p.spatial_freq, self.M)
        return H


def steering_vector(phi, M):
    """ULA response ``(1/sqrt(M)) exp(-j 2 pi phi m)``, ``m = 0..M-1``."""
    M = check_count(M, "M")
    return np.exp(-2j * np.pi * float(phi) * np.arange(M)) / np.sqrt(M)


def spatial_frequency(theta_rad, geometry):
    """Map an angle of departure to ``(d / lambda) sin(theta)``."""
    theta = float(theta_rad)
    if not abs(theta) <= math.pi / 2 + 1e-12:
        raise DomainError(f"angle of departure {theta} outside [-pi/2, pi/2]")
    return geometry.spacing_ratio * math.sin(theta)


def _draw_user(geometry, L, rng):
    theta = rng.uniform(-math.pi / 2, math.pi / 2, size=L)
    gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) * math.sqrt(0.5 / L)
    return tuple(
        PathComponent(complex(g), float(t), spatial_frequency(t, geometry))
        for g, t in zip(gains, theta))


def sample_channel_set(geometry, K, L, seed=0, trial=0):
    """Draw one channel realization for ``K`` users with ``L`` paths each.

    Parameters
    ----------
    geometry : ArrayGeometry
    K : int
        Number of single-antenna users.
    L : int
        Paths per user, between 1 and 3.
    seed : int or numpy.random.Generator
        With an integer, user ``k`` draws from the substream
        ``(seed, trial, CHANNEL, k)`` and the result does not depend on how
        users are scheduled. A Generator is consumed sequentially instead.
    trial : int
        Trial index folded into the substream key.

    Returns
    -------
    ChannelSet
    """
    K = check_count(K, "K")
    L = check_count(L, "L")
    if L > MAX_PATHS:
        raise ConfigurationError(f"L must be in [1, {MAX_PATHS}], got {L}")
    if geometry.M < K * L:
        warnings.warn(f"M={geometry.M} < K*L={K * L}: beam supports will overlap",
                      stacklevel=2)
    if isinstance(seed, np.random.Generator):
        streams = [seed] * K
        seed_value = None
    else:
        seed_value = int(seed)
        streams = [_rng.substream(seed_value, trial, _rng.CHANNEL, k) for k in range(K)]
    users = tuple(_draw_user(geometry, L, streams[k]) for k in range(K))
    H = np.zeros((geometry.M, K), dtype=complex)
    for k, paths in enumerate(users):
        for p in paths:
            H[:, k] += p.gain * steering_vector(p.spatial_freq, geometry.M)
    return ChannelSet(geometry, users, H, seed_value, L)


def _fmt(x):
    return format(float(x), ".17g")


def export_csv(channels, path):
    """Write a channel ensemble as CSV text.

    Layout: a ``M,K,L,seed`` header and its value row, then an
    ``antenna,user,real,imag`` table with one row per entry, then a
    ``user,path,gain_real,gain_imag,aod_rad`` table of path components.
    """
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["M", "K", "L", "seed"])
            w.writerow([channels.M, channels.K, channels.n_paths or "",
                        "" if channels.seed is None else channels.seed])
            w.writerow(["antenna", "user", "real", "imag"])
            for m in range(channels.M):
                for k in range(channels.K):
                    z = channels.matrix[m, k]
                    w.writerow([m, k, _fmt(z.real), _fmt(z.imag)])
            w.writerow(["user", "path", "gain_real", "gain_imag", "aod_rad"])
            for k, paths in enumerate(channels.users):
                for i, p in enumerate(paths):
                    w.writerow([k, i, _fmt(p.gain.real), _fmt(p.gain.imag), _fmt(p.aod_rad)])
    except OSError as exc:
        raise ReportIOError(f"cannot write channel file {path}: {exc}") from exc


def import_csv(path, carrier_hz=60e9):
    """Read a file written by :func:`export_csv`."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ReportIOError(f"cannot read channel file {path}: {exc}") from exc
    try:
        if rows[0] != ["M", "K", "L", "seed"] or rows[2] != ["antenna", "user", "real", "imag"]:
            raise ValueError("unexpected header")
        M, K = int(rows[1][0]), int(rows[1][1])
        L = int(rows[1][2]) if rows[1][2] else None
        seed = int(rows[1][3]) if rows[1][3] else None
        H = np.zeros((M, K), dtype=complex)
        body = rows[3:3 + M * K]
        for m, k, re, im in body:
            H[int(m), int(k)] = complex(float(re), float(im))
        geometry = ArrayGeometry(M, carrier_hz)
        rest = rows[3 + M * K:]
        users = ()
        if rest:
            per_user = [[] for _ in range(K)]
            for k, _, gr, gi, aod in rest[1:]:
                t = float(aod)
                per_user[int(k)].append(PathComponent(
                    complex(float(gr), float(gi)), t, spatial_frequency(t, geometry)))
            users = tuple(tuple(p) for p in per_user)
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"malformed channel file {path}: {exc}") from exc
    return ChannelSet(geometry, users, H, seed, L)
