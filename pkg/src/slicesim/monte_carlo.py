"""Monte Carlo outage estimation over independent channel realizations.

Every trial owns a keyed random stream, so estimates are bit-identical
across runs, execution orders, and worker counts, and different operating
points are compared on common random numbers (the channel draws depend
only on the scenario and seed, never on the rates under test).

The engine exploits that split: `build_trial_table` draws all realizations
once and reduces each to the per-trial statistics that the MRC-SIC
recursion actually consumes (sorted received powers, pairwise projection
magnitudes, broadband coupling terms). Evaluating an operating point is
then a vectorized replay over all trials, milliseconds instead of a fresh
simulation, which is what makes the outer rate searches affordable.

`sample_orth_trial` / `sample_nonorth_trial` run the same trials through
the readable per-realization decoders in `sic_decoder`; the test suite
checks exact agreement between the two routes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import SystemConfig, draw_realization
from .numerics import _normals_from_uniforms, keyed_uniforms
from .sic_decoder import DecodeOutcome, decode_non_orthogonal, decode_orthogonal

__all__ = [
    "OutageEstimate",
    "SlicingSample",
    "TrialTable",
    "build_trial_table",
    "embb_channel_gains",
    "estimate_mmtc_outage_orth",
    "estimate_joint_outage_nonorth",
    "estimate_embb_power",
    "estimate_embb_truncation_outage",
    "sample_orth_trial",
    "sample_nonorth_trial",
]

_Z95 = 1.959963984540054


def wilson_half_width(p_hat: float, n: int) -> float:
    """Half-width of the 95% Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    z2 = _Z95 * _Z95
    return (_Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))) / (
        1.0 + z2 / n
    )


@dataclass(frozen=True)
class OutageEstimate:
    """Probability estimate with its denominator and 95% half-width.

    `trials` is the denominator of p_hat: the trial count for per-slot
    events, M * trials for per-device mMTC events.
    """

    p_hat: float
    trials: int
    half_width_95: float

    @classmethod
    def from_counts(cls, errors: int, n: int) -> "OutageEstimate":
        p = errors / n
        return cls(p_hat=p, trials=n, half_width_95=wilson_half_width(p, n))


@dataclass(frozen=True, eq=False)
class SlicingSample:
    """One trial pushed through the reference decoder: outcome plus the
    realized broadband transmit power and transmit decision."""

    trial_index: int
    outcome: DecodeOutcome
    P_B: float
    embb_transmitted: bool


class TrialTable:
    """Per-trial MRC-SIC statistics, all in SIC order (strongest first).

    With T trials and M devices:
      c        (T, M)  received powers ||g_m||^2, sorted descending
      interf   (T, M)  P_M * sum of |g_m^H g_m'|^2 over weaker undecoded m'
      b        (T, M)  |g_m^H g_B|^2 broadband coupling per device
      b_suffix (T, M)  P_M * sum of b over devices m.. (undecoded-set term
                       seen by a broadband attempt at position m)
      d        (T,)    broadband received power ||g_B||^2
      sigma_no_b (T, M)  MTC SINR chain without broadband interference
      prefix_min (T, M)  running minimum of sigma_no_b along the SIC order
    """

    def __init__(self, cfg: SystemConfig, c, interf, b, b_suffix, d, sigma_no_b):
        self.cfg = cfg
        self.c = c
        self.interf = interf
        self.b = b
        self.b_suffix = b_suffix
        self.d = d
        self.sigma_no_b = sigma_no_b
        self.prefix_min = (
            np.minimum.accumulate(sigma_no_b, axis=1) if cfg.M else sigma_no_b
        )

    @property
    def trials(self) -> int:
        return self.cfg.trials

    def mmtc_orth_error_count(self, r_M: float) -> int:
        """Device-slot failures under orthogonal stop-on-failure decoding.

        The decoded set in a trial is the longest prefix of the SIC order
        whose SINRs all reach the threshold, so the count only needs the
        running minimum of the no-broadband SINR chain.
        """
        thr = 2.0**r_M - 1.0
        decoded = int((self.prefix_min >= thr).sum())
        return self.cfg.M * self.cfg.trials - decoded

    def nonorth_error_counts(self, r_M: float, r_B: float, gamma_tar: float):
        """(mMTC device-slot failures, broadband decode failures) under the
        interleaved procedure with inverted broadband power gamma_tar / d."""
        thr_M = 2.0**r_M - 1.0
        thr_B = 2.0**r_B - 1.0
        cfg = self.cfg
        T, M = cfg.trials, cfg.M
        P_B = gamma_tar / self.d
        n_dec = np.zeros(T, dtype=np.int64)
        embb_dec = np.zeros(T, dtype=bool)
        dead = np.zeros(T, dtype=bool)
        for j in range(M):
            c_j = self.c[:, j]
            sig_with_b = (cfg.P_M * c_j * c_j) / (
                self.interf[:, j] + P_B * self.b[:, j] + c_j
            )
            sig_no_b = self.sigma_no_b[:, j]
            sig_embb = P_B * self.d * self.d / (self.b_suffix[:, j] + self.d)
            live = ~dead
            before = live & ~embb_dec  # broadband still unresolved
            after = live & embb_dec
            ok_with_b = sig_with_b >= thr_M
            ok_no_b = sig_no_b >= thr_M
            failed = before & ~ok_with_b
            embb_ok = sig_embb >= thr_B
            rescued = failed & embb_ok  # broadband resolved, device retried
            n_dec += (before & ok_with_b) | (rescued & ok_no_b) | (after & ok_no_b)
            dead |= (failed & ~embb_ok) | (rescued & ~ok_no_b) | (after & ~ok_no_b)
            embb_dec |= rescued
        # trials that decoded every device with the broadband signal pending:
        # final attempt is interference-free, SNR = P_B * d = gamma_tar
        embb_dec |= ~dead & (P_B * self.d >= thr_B)
        mm_err = M * T - int(n_dec.sum())
        eb_err = T - int(embb_dec.sum())
        return mm_err, eb_err


def _chunk_size(M: int) -> int:
    # keep the per-chunk (chunk, M, M) Gram block around 30 MB
    return max(256, min(16384, 4_000_000 // max(M * M, 1)))


def _table_chunk(cfg: SystemConfig, t0: int, t1: int):
    L, M = cfg.L, cfg.M
    n = t1 - t0
    U = keyed_uniforms(cfg.seed, t0, n, 2 * L * (M + 1))
    Z = _normals_from_uniforms(U)
    g_B = (Z[:, 0 : 2 * L : 2] + 1j * Z[:, 1 : 2 * L : 2]) * math.sqrt(
        cfg.gamma_bar_B / 2.0
    )
    rows = Z[:, 2 * L :].reshape(n, M, 2 * L)
    G = (rows[:, :, 0::2] + 1j * rows[:, :, 1::2]) * math.sqrt(cfg.gamma_bar_M / 2.0)
    c = np.einsum("tml,tml->tm", G, G.conj()).real
    order = np.argsort(-c, axis=1, kind="stable")
    G = np.take_along_axis(G, order[:, :, None], axis=1)
    c = np.take_along_axis(c, order, axis=1)
    cross = np.einsum("tml,tnl->tmn", G, G.conj())
    cross = cross.real**2 + cross.imag**2
    upper = np.triu(np.ones((M, M)), k=1)
    interf = cfg.P_M * np.einsum("tmn,mn->tm", cross, upper)
    xb = np.einsum("tml,tl->tm", G.conj(), g_B)
    b = xb.real**2 + xb.imag**2
    d = np.einsum("tl,tl->t", g_B, g_B.conj()).real
    b_suffix = cfg.P_M * np.cumsum(b[:, ::-1], axis=1)[:, ::-1]
    sigma_no_b = (cfg.P_M * c * c) / (interf + c)
    return c, interf, b, b_suffix, d, sigma_no_b


def build_trial_table(cfg: SystemConfig, workers: int = 1) -> TrialTable:
    """Draw all cfg.trials realizations and reduce them to SIC statistics.

    Per-trial keyed streams make the result independent of chunking and of
    `workers`, which only bounds the thread pool used across chunks.
    """
    T, M = cfg.trials, cfg.M
    c = np.empty((T, M))
    interf = np.empty((T, M))
    b = np.empty((T, M))
    b_suffix = np.empty((T, M))
    d = np.empty(T)
    sigma_no_b = np.empty((T, M))
    step = _chunk_size(M)
    bounds = [(t0, min(t0 + step, T)) for t0 in range(0, T, step)]

    def fill(span):
        t0, t1 = span
        out = _table_chunk(cfg, t0, t1)
        for dst, src in zip((c, interf, b, b_suffix, d, sigma_no_b), out):
            dst[t0:t1] = src

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, bounds))
    else:
        for span in bounds:
            fill(span)
    return TrialTable(cfg, c, interf, b, b_suffix, d, sigma_no_b)


def embb_channel_gains(cfg: SystemConfig, workers: int = 1) -> np.ndarray:
    """Broadband received powers ||g_B||^2 for all trials.

    Consumes only the leading draws of each trial's stream, so the values
    agree with `draw_realization` for the same (seed, trial_index).
    """
    T, L = cfg.trials, cfg.L
    d = np.empty(T)
    step = 65536

    def fill(t0):
        t1 = min(t0 + step, T)
        Z = _normals_from_uniforms(keyed_uniforms(cfg.seed, t0, t1 - t0, 2 * L))
        g = (Z[:, 0::2] + 1j * Z[:, 1::2]) * math.sqrt(cfg.gamma_bar_B / 2.0)
        d[t0:t1] = np.einsum("tl,tl->t", g, g.conj()).real

    starts = range(0, T, step)
    if workers > 1 and T > step:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for t0 in starts:
            fill(t0)
    return d


def _check_table(cfg: SystemConfig, table: Optional[TrialTable], workers: int) -> TrialTable:
    if table is None:
        return build_trial_table(cfg, workers=workers)
    if table.cfg != cfg:
        raise ValueError("trial table was built for a different configuration")
    return table


def estimate_mmtc_outage_orth(
    cfg: SystemConfig,
    r_M: float,
    *,
    table: Optional[TrialTable] = None,
    workers: int = 1,
) -> OutageEstimate:
    """Per-device mMTC outage probability under orthogonal decoding.

    The error event is per device-slot: p_hat is the probability that a
    uniformly chosen device fails in a uniformly chosen slot.
    """
    if cfg.M < 1:
        raise ValueError("mMTC outage needs at least one MTC device (M >= 1)")
    if r_M < 0:
        raise ValueError(f"r_M must be nonnegative, got {r_M}")
    table = _check_table(cfg, table, workers)
    errors = table.mmtc_orth_error_count(r_M)
    return OutageEstimate.from_counts(errors, cfg.M * cfg.trials)


def estimate_joint_outage_nonorth(
    cfg: SystemConfig,
    r_M: float,
    r_B: float,
    gamma_tar: float,
    *,
    table: Optional[TrialTable] = None,
    workers: int = 1,
):
    """(mMTC estimate, broadband estimate) under non-orthogonal slicing.

    The broadband device is conservatively always active: per trial it
    transmits at gamma_tar / ||g_B||^2 with no truncation, so its error is
    purely a decoding error. Requires gamma_tar > 2^r_B - 1, otherwise even
    the interference-free attempt could never succeed.
    """
    if cfg.M < 1:
        raise ValueError("joint outage needs at least one MTC device (M >= 1)")
    if r_M < 0 or r_B < 0:
        raise ValueError("rates must be nonnegative")
    if not gamma_tar > 2.0**r_B - 1.0:
        raise ValueError(
            f"gamma_tar={gamma_tar} must exceed 2^r_B - 1 = {2.0**r_B - 1.0}"
        )
    table = _check_table(cfg, table, workers)
    mm_err, eb_err = table.nonorth_error_counts(r_M, r_B, gamma_tar)
    return (
        OutageEstimate.from_counts(mm_err, cfg.M * cfg.trials),
        OutageEstimate.from_counts(eb_err, cfg.trials),
    )


def estimate_embb_power(
    cfg: SystemConfig,
    gamma_min: float,
    gamma_tar: float,
    *,
    gains: Optional[np.ndarray] = None,
    workers: int = 1,
) -> float:
    """Monte Carlo mean of the truncated-inversion transmit power."""
    if gains is None:
        gains = embb_channel_gains(cfg, workers=workers)
    with np.errstate(divide="ignore"):
        power = np.where(gains >= gamma_min, gamma_tar / gains, 0.0)
    return float(power.mean())


def estimate_embb_truncation_outage(
    cfg: SystemConfig,
    gamma_min: float,
    *,
    gains: Optional[np.ndarray] = None,
    workers: int = 1,
) -> OutageEstimate:
    """Probability that the broadband channel falls below the transmit
    threshold (the only outage source in the orthogonal case)."""
    if gains is None:
        gains = embb_channel_gains(cfg, workers=workers)
    errors = int((gains < gamma_min).sum())
    return OutageEstimate.from_counts(errors, len(gains))


def sample_orth_trial(cfg: SystemConfig, trial_index: int, r_M: float) -> SlicingSample:
    """Reference route: one trial through the per-realization orthogonal decoder."""
    real = draw_realization(cfg, trial_index)
    outcome = decode_orthogonal(real.G_M, cfg.P_M, r_M)
    return SlicingSample(
        trial_index=trial_index, outcome=outcome, P_B=0.0, embb_transmitted=False
    )


def sample_nonorth_trial(
    cfg: SystemConfig, trial_index: int, r_M: float, r_B: float, gamma_tar: float
) -> SlicingSample:
    """Reference route: one trial through the per-realization interleaved decoder."""
    real = draw_realization(cfg, trial_index)
    d = float(np.real(np.vdot(real.g_B, real.g_B)))
    P_B = gamma_tar / d
    outcome = decode_non_orthogonal(real.G_M, real.g_B, cfg.P_M, P_B, r_M, r_B)
    return SlicingSample(
        trial_index=trial_index, outcome=outcome, P_B=P_B, embb_transmitted=True
    )
