"""Run configuration and its flat ``key = value`` file format."""
import dataclasses
import math
from dataclasses import dataclass, fields

from .._validation import check_count, check_unit_interval
from ..channel import MAX_PATHS
from ..exceptions import ConfigurationError, ReportIOError
from ..feedback import MAX_CODEBOOK_BITS

SCHEMES = ("SBS", "HBS")
FORMATS = ("csv", "json")
SUPPORTS = ("user", "full")
SINGULAR_POLICIES = ("skip", "raise")
DEFAULT_SWEEP_DB = tuple(float(x) for x in range(0, 21, 2))


@dataclass
class RunConfig:
    """Everything that determines one experiment.

    ``L`` is the number of propagation paths per user; when left as ``None``
    it is taken from the active beam group, ``budget / K``. ``bits`` overrides
    the feedback budget that would otherwise follow from the SNR rule.
    ``on_singular`` decides what happens to a trial whose equivalent channel
    is too ill-conditioned for zero-forcing: ``"skip"`` drops and reports it,
    ``"raise"`` aborts the run.
    """

    M: int = 256
    K: int = 16
    L: int = None
    scheme: str = "HBS"
    n_rf: int = 48
    g1: int = 48
    g2: int = 32
    xi: float = 1.0
    snr_db: tuple = (12.0,)
    trials: int = 10
    seed: int = 0
    bits: int = None
    support: str = "user"
    on_singular: str = "skip"
    carrier_hz: float = 60e9
    label: str = ""
    output: str = None
    format: str = "csv"

    def __post_init__(self):
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = (float(self.snr_db),)
        else:
            self.snr_db = tuple(float(s) for s in self.snr_db)

    @property
    def active_clusters(self):
        """Effective cluster count of the active selection, ``L_h``."""
        if self.scheme == "SBS":
            return self.n_rf / self.K
        return self.xi * self.g1 / self.K + (1.0 - self.xi) * self.g2 / self.K

    @property
    def paths(self):
        if self.L is not None:
            return self.L
        lh = self.active_clusters
        if not float(lh).is_integer():
            raise ConfigurationError(
                f"effective cluster count {lh} is not an integer; set L explicitly")
        return int(lh)

    def validate(self):
        """Check every module precondition before any work starts."""
        check_count(self.M, "M")
        check_count(self.K, "K", minimum=2)
        check_count(self.trials, "trials")
        check_count(self.seed, "seed", minimum=0)
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.support not in SUPPORTS:
            raise ConfigurationError(f"support must be one of {SUPPORTS}, got {self.support!r}")
        if self.on_singular not in SINGULAR_POLICIES:
            raise ConfigurationError(
                f"on_singular must be one of {SINGULAR_POLICIES}, got {self.on_singular!r}")
        check_unit_interval(self.xi, "xi")
        budgets = {"n_rf": self.n_rf} if self.scheme == "SBS" else {"g1": self.g1, "g2": self.g2}
        for name, value in budgets.items():
            check_count(value, name, minimum=self.K)
            if value % self.K:
                raise ConfigurationError(f"{name}={value} is not a multiple of K={self.K}")
        if sum(budgets.values()) > self.M:
            raise ConfigurationError(
                f"beam budget {sum(budgets.values())} exceeds M={self.M}")
        L = check_count(self.paths, "L")
        if L > MAX_PATHS:
            hint = "" if self.L is not None else " (taken from beam budget / K; set L or the budget)"
            raise ConfigurationError(f"L must be in [1, {MAX_PATHS}], got {L}{hint}")
        if self.bits is not None:
            check_count(self.bits, "bits", minimum=0)
            if self.bits > MAX_CODEBOOK_BITS:
                raise ConfigurationError(f"bits must be <= {MAX_CODEBOOK_BITS}, got {self.bits}")
        if not self.snr_db:
            raise ConfigurationError("snr_db needs at least one value")
        for s in self.snr_db:
            if not math.isfinite(s) or s < 0:
                raise ConfigurationError(f"snr_db values must be finite and >= 0, got {s}")
        if not self.carrier_hz > 0:
            raise ConfigurationError("carrier_hz must be positive")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def echo(self):
        """Short ``key=value`` summary used in error messages."""
        keys = ("scheme", "M", "K", "L", "n_rf", "g1", "g2", "xi", "bits", "seed")
        return ", ".join(f"{k}={getattr(self, k)}" for k in keys)


_NONE = ("", "none", "null")


def _coerce(f, raw):
    name = f.name
    text = raw.strip()
    try:
        if name == "snr_db":
            return tuple(float(x) for x in text.split(",") if x.strip())
        if name in ("L", "bits"):
            return None if text.lower() in _NONE else int(text)
        if name == "output":
            return None if text.lower() in _NONE else text
        if name in ("M", "K", "n_rf", "g1", "g2", "trials", "seed"):
            return int(text)
        if name in ("xi", "carrier_hz"):
            return float(text)
        if name == "scheme":
            return text.upper()
        return text
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from exc


def parse_assignments(lines, base=None):
    """Apply ``key = value`` lines to ``base`` (default: a fresh RunConfig).

    Blank lines and ``#`` comments are skipped; unknown keys are errors.
    """
    known = {f.name: f for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(known[key], raw)
    base = base or RunConfig()
    return dataclasses.replace(base, **values)


def load_config(path, base=None):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ReportIOError(f"cannot read config {path}: {exc}") from exc
    return parse_assignments(lines, base)
