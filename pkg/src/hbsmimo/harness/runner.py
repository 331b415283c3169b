"""Seeded Monte Carlo experiments.

Each trial draws channels from the substream ``(seed, trial, CHANNEL, user)``
and codebooks from ``(seed, trial, CODEBOOK, user)``. Configurations that
share a seed therefore see the same channel realizations, and the results do
not depend on how trials are scheduled.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np

from ..beamspace import (HybridSelector, build_hybrid_selector, captured_energy,
                         equivalent_channel, select_sbs, to_beamspace)
from ..channel import ArrayGeometry, sample_channel_set
from ..exceptions import ConfigurationError, HbsError, NumericalError, SingularityError
from ..feedback import expected_qe_closed, feedback_bits, quantize_streaming
from ..numerics import dft_matrix
from ..precoding import (rate_loss_bound, rate_perfect, rate_quantized,
                         received_snr_estimate)
from .config import DEFAULT_SWEEP_DB, RunConfig
from .report import RateReport

# rows of the reference rate-loss table: (label, overrides, reference value)
TABLE1_ROWS = (
    ("SBS N_RF=48 L=3", dict(scheme="SBS", n_rf=48, L=3), 0.34),
    ("HBS 32+16 xi=0 L2=1", dict(scheme="HBS", g1=32, g2=16, xi=0.0, L=1), 0.73),
    ("HBS 32+16 xi=1 L1=2", dict(scheme="HBS", g1=32, g2=16, xi=1.0, L=2), 0.12),
    ("HBS 48+32 xi=0 L2=2", dict(scheme="HBS", g1=48, g2=32, xi=0.0, L=2), 0.10),
    ("HBS 48+32 xi=1 L1=3", dict(scheme="HBS", g1=48, g2=32, xi=1.0, L=3), 0.09),
)

RVQ_FULL_MAX_M = 64
#: a run aborts when more than this share of its trials is ill-conditioned
MAX_SKIP_FRACTION = 0.05

log = logging.getLogger(__name__)


@contextmanager
def _trial_context(trial, config):
    try:
        yield
    except HbsError as exc:
        if getattr(exc, "_annotated", False):
            raise
        exc.args = (f"trial {trial} [{config.echo()}]: {exc}",) + exc.args[1:]
        exc._annotated = True
        raise


def _select(config, bs):
    if config.scheme == "SBS":
        return HybridSelector.single(select_sbs(bs, config.n_rf), config.K)
    return build_hybrid_selector(bs, config.g1, config.g2, config.xi)


def _prepare(config, F, geometry, trial):
    with _trial_context(trial, config):
        channels = sample_channel_set(geometry, config.K, config.paths, config.seed, trial)
        bs = to_beamspace(channels, F)
        sel = _select(config, bs)
        return bs, sel, equivalent_channel(bs, sel)


def _feedback_trial(config, F, prepared, bits, rho, trial):
    bs, sel, eq = prepared
    H = eq.matrix
    K = config.K
    with _trial_context(trial, config):
        try:
            r_p = rate_perfect(H, rho, K)
        except SingularityError as exc:
            if config.on_singular == "raise":
                raise
            log.warning("skipping trial %d [%s]: %s", trial, config.echo(), exc)
            return None
        H_hat = np.empty_like(H)
        qe = np.empty(K)
        qe_support = np.empty(K)
        owners = sel.owner_user
        for k in range(K):
            res = quantize_streaming(H[:, k], sel, F, bits, k, config.seed, trial,
                                     support=config.support)
            H_hat[:, k] = res.quantized_channel
            qe[k] = res.qe
            own = owners == k
            h_own = H[own, k]
            n_own = np.vdot(h_own, h_own).real
            word = res.quantized_channel[own]
            n_word = np.vdot(word, word).real
            cos2 = (abs(np.vdot(word, h_own)) ** 2 / (n_own * n_word)
                    if n_own > 0 and n_word > 0 else 0.0)
            qe_support[k] = 1.0 - min(cos2, 1.0)
        r_q = rate_quantized(H, H_hat, rho, K)
    return dict(r_p=r_p, r_q=r_q, qe=qe, qe_support=qe_support,
                cap1=captured_energy(bs, sel.group1),
                cap2=captured_energy(bs, sel.group2))


def _map(fn, items, n_jobs):
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_point(config, snr_db, n_jobs=1, label=None, reference=None):
    """Run all trials of ``config`` at one SNR and return the aggregate record.

    The transmit power is chosen so that the realized received SNR
    ``(rho/K) mean ||h_eq,k||^2`` equals ``snr_db``; the mean is taken over
    every user and trial of this configuration.
    """
    config.validate()
    geometry = ArrayGeometry(config.M, config.carrier_hz)
    F = dft_matrix(config.M)
    trials = range(config.trials)
    prepared = _map(lambda t: _prepare(config, F, geometry, t), trials, n_jobs)

    eq_mats = [p[2].matrix for p in prepared]
    unit_lin, _ = received_snr_estimate(eq_mats, config.K, config.K)
    if unit_lin <= 0:
        raise ConfigurationError(f"selected beams carry no energy [{config.echo()}]")
    gamma_target = 10.0 ** (snr_db / 10.0)
    rho = config.K * gamma_target / unit_lin
    gamma_lin, gamma_db = received_snr_estimate(eq_mats, rho, config.K)

    L_h = prepared[0][1].clusters
    rule_bits = feedback_bits(snr_db, config.K, L_h)
    bits = rule_bits if config.bits is None else int(config.bits)

    out = _map(lambda t: _feedback_trial(config, F, prepared[t], bits, rho, t), trials, n_jobs)
    skipped = [t for t, o in zip(trials, out) if o is None]
    if len(skipped) > MAX_SKIP_FRACTION * config.trials:
        raise NumericalError(
            f"{len(skipped)} of {config.trials} trials have an ill-conditioned equivalent "
            f"channel (trials {skipped[:10]}) [{config.echo()}]")
    out = [o for o in out if o is not None]

    r_p = np.array([o["r_p"] for o in out])
    r_q = np.array([o["r_q"] for o in out])
    loss = r_p - r_q
    per_trial_loss = loss.mean(axis=1)
    per_trial_rq = r_q.mean(axis=1)
    n = len(out)
    stderr = float(per_trial_loss.std(ddof=1) / math.sqrt(n)) if n > 1 else None
    rq_std = float(per_trial_rq.std(ddof=1)) if n > 1 else None

    qe_expected = expected_qe_closed(L_h, bits) if L_h >= 2 else None
    bound = (rate_loss_bound(gamma_lin, config.K, qe_expected)
             if qe_expected is not None else None)
    sel0 = prepared[0][1]
    selection = [[int(b) for b in sel0.group1.beams_of(k) + sel0.group2.beams_of(k)]
                 for k in range(config.K)]
    return dict(
        label=label if label is not None else (config.label or config.scheme),
        scheme=config.scheme,
        M=config.M,
        K=config.K,
        L=config.paths,
        L_h=float(L_h),
        n_rf=config.n_rf if config.scheme == "SBS" else config.g1 + config.g2,
        g1=config.g1 if config.scheme == "HBS" else None,
        g2=config.g2 if config.scheme == "HBS" else None,
        xi=float(config.xi) if config.scheme == "HBS" else 1.0,
        snr_db=float(snr_db),
        bits=int(bits),
        bits_overridden=config.bits is not None and bits != rule_bits,
        trials=config.trials,
        skipped_trials=len(skipped),
        seed=config.seed,
        support=config.support,
        rho=float(rho),
        gamma_lin=float(gamma_lin),
        gamma_db=float(gamma_db),
        rate_perfect=float(r_p.mean()),
        rate_quantized=float(r_q.mean()),
        rate_quantized_std=rq_std,
        delta_r=float(loss.mean()),
        delta_r_stderr=stderr,
        bound=bound,
        qe_expected=qe_expected,
        qe_measured=float(np.mean([o["qe"] for o in out])),
        qe_support=float(np.mean([o["qe_support"] for o in out])),
        captured_g1=float(np.mean([o["cap1"] for o in out])),
        captured_g2=float(np.mean([o["cap2"] for o in out])),
        max_user_excess=float(max(0.0, (-loss).max())),
        reference=reference,
        selection_trial0=selection,
    )


def run(config, n_jobs=1):
    """Run ``config`` at every SNR in ``config.snr_db``."""
    config.validate()
    t0 = time.perf_counter()
    records = [run_point(config, s, n_jobs) for s in config.snr_db]
    return RateReport("run", records, {"config": _config_meta(config),
                                       "wall_clock_s": time.perf_counter() - t0})


def table1_configs(base):
    return [(label, base.replace(label=label, **over), ref)
            for label, over, ref in TABLE1_ROWS]


def reproduce_table1(seed=0, trials=10, base=None, n_jobs=1):
    """Measure the five reference-table configurations at 12 dB."""
    base = (base or RunConfig()).replace(seed=seed, trials=trials, snr_db=(12.0,),
                                         bits=None)
    t0 = time.perf_counter()
    records = [run_point(cfg, cfg.snr_db[0], n_jobs, label, ref)
               for label, cfg, ref in table1_configs(base)]
    return RateReport("table1", records, {"seed": seed, "trials": trials,
                                          "wall_clock_s": time.perf_counter() - t0})


def sweep_configs(base, baseline=None):
    """Scheme configurations of a rate-against-SNR sweep."""
    K = base.K
    schemes = [
        ("HBS-I", base.replace(scheme="HBS", xi=0.0, L=None, bits=None)),
        ("HBS-II", base.replace(scheme="HBS", xi=1.0, L=None, bits=None)),
        ("SBS", base.replace(scheme="SBS", L=None, bits=None)),
    ]
    if baseline == "rvq-full":
        if base.M > RVQ_FULL_MAX_M:
            raise ConfigurationError(
                f"rvq-full baseline needs M <= {RVQ_FULL_MAX_M}, got M={base.M}")
        if base.M % K:
            raise ConfigurationError("rvq-full baseline needs M divisible by K")
        schemes.append(("RVQ-full", base.replace(
            scheme="SBS", n_rf=base.M, L=min(3, base.n_rf // K), support="full", bits=None)))
    elif baseline is not None:
        raise ConfigurationError(f"unknown baseline {baseline!r}")
    return schemes


def sweep_snr(base, snr_list=None, baseline=None, n_jobs=1):
    """Per-user rate against SNR for HBS case I/II, SBS and the error-free ideal.

    The feedback budget is recomputed at every SNR point. The ``ideal`` row
    is the best perfect-CSI rate among the schemes.
    """
    snr_list = tuple(DEFAULT_SWEEP_DB if snr_list is None else snr_list)
    default_grid = snr_list == DEFAULT_SWEEP_DB
    if not snr_list:
        return RateReport("sweep", [], {"snr_grid_default": False, "wall_clock_s": 0.0})
    t0 = time.perf_counter()
    rows = []
    details = []
    schemes = sweep_configs(base, baseline)
    sbs_clusters = base.n_rf / base.K
    for snr in snr_list:
        ideal = None
        for name, cfg in schemes:
            if name == "RVQ-full":
                # same feedback budget as the SBS curve at this SNR
                cfg = cfg.replace(bits=feedback_bits(snr, base.K, sbs_clusters))
            rec = run_point(cfg, snr, n_jobs, label=name)
            details.append(rec)
            rows.append(dict(snr_db=float(snr), scheme=name, rate=rec["rate_quantized"],
                             rate_std=rec["rate_quantized_std"]))
            if name != "RVQ-full" and (ideal is None or rec["rate_perfect"] > ideal["rate_perfect"]):
                ideal = rec
        rows.append(dict(snr_db=float(snr), scheme="ideal", rate=ideal["rate_perfect"],
                         rate_std=None))
    meta = {"snr_grid_default": default_grid, "baseline": baseline,
            "g1": base.g1, "g2": base.g2, "n_rf": base.n_rf, "seed": base.seed,
            "trials": base.trials, "details": details,
            "wall_clock_s": time.perf_counter() - t0}
    if baseline == "rvq-full":
        meta["rvq_full_note"] = ("indicative only; configuration of the original baseline unknown; "
                                 "feedback bits matched to the SBS curve")
    return RateReport("sweep", rows, meta)


def _config_meta(config):
    d = {k: getattr(config, k) for k in
         ("M", "K", "L", "scheme", "n_rf", "g1", "g2", "xi", "trials", "seed", "bits",
          "support", "on_singular", "carrier_hz")}
    d["snr_db"] = list(config.snr_db)
    return d
