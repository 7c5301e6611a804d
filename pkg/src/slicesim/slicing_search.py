"""Numerical searches for achievable rate pairs and device counts.

Orthogonal slicing time-shares the slot: the broadband service gets a
fraction alpha at its closed-form outage rate, the MTC devices get the
rest at the largest common rate whose Monte Carlo outage stays within
eps_M, so the region is a straight line between the two single-service
endpoints.

Non-orthogonal slicing overlaps both services and needs a two-dimensional
search: for each broadband rate r_B the largest feasible MTC rate is
bisected, and each feasibility probe runs an inner search for the smallest
broadband target SNR that keeps the broadband decoding-error probability
within eps_B (smaller target SNR means less interference onto the MTC
devices, so the MTC constraint is checked at that minimum). The target SNR
is capped by the unit-average-power value of the orthogonal analysis.

All probes share one trial table (common random numbers), which makes the
bisections deterministic and cheap. The inner search assumes the broadband
error probability is nonincreasing in the target SNR; that structure is
checked empirically by `validate_gamma_monotonicity`, and a 32-point
log-grid scan is available as a fallback strategy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import SystemConfig
from .embb_analysis import EmbbOperatingPoint, operating_point
from .monte_carlo import (
    TrialTable,
    build_trial_table,
    estimate_joint_outage_nonorth,
    estimate_mmtc_outage_orth,
)

__all__ = [
    "RatePoint",
    "max_mmtc_rate_orth",
    "orthogonal_region",
    "min_feasible_gamma_tar",
    "max_mmtc_rate_nonorth",
    "nonorthogonal_region",
    "max_devices",
    "validate_gamma_monotonicity",
]

RATE_TOL = 0.01  # bits/s/Hz, below the plot resolution of the target figures
GAMMA_REL_TOL = 0.01
RATE_CAP = 64.0


@dataclass(frozen=True)
class RatePoint:
    """An achievable (r_B, r_M) pair with its operating point: the
    time-sharing fraction for orthogonal points, the accepted broadband
    target SNR for non-orthogonal ones."""

    r_B: float
    r_M: float
    mode: str  # "orthogonal" | "non_orthogonal"
    alpha: Optional[float] = None
    gamma_tar: Optional[float] = None


def _embb_op(cfg: SystemConfig, op: Optional[EmbbOperatingPoint]) -> EmbbOperatingPoint:
    return op if op is not None else operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)


def max_mmtc_rate_orth(
    cfg: SystemConfig,
    *,
    table: Optional[TrialTable] = None,
    workers: int = 1,
    tol: float = RATE_TOL,
    r_cap: float = RATE_CAP,
) -> float:
    """Largest common MTC rate meeting the eps_M outage target without
    broadband interference. Bisection on common random numbers; zero is
    always feasible, the upper bracket grows geometrically up to r_cap."""
    if cfg.M < 1:
        raise ValueError("mMTC rate search needs M >= 1")
    if table is None:
        table = build_trial_table(cfg, workers=workers)

    def feasible(r: float) -> bool:
        return estimate_mmtc_outage_orth(cfg, r, table=table).p_hat <= cfg.eps_M

    lo, hi = 0.0, min(1.0, r_cap)
    while feasible(hi):
        if hi >= r_cap:
            warnings.warn(
                f"mMTC rate search hit the cap {r_cap} bits/s/Hz; "
                "the outage constraint appears non-binding"
            )
            return r_cap
        lo = hi
        hi = min(hi * 2.0, r_cap)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def orthogonal_region(
    cfg: SystemConfig,
    alpha_grid: Sequence[float],
    *,
    table: Optional[TrialTable] = None,
    workers: int = 1,
    op: Optional[EmbbOperatingPoint] = None,
    r_M_out: Optional[float] = None,
) -> List[RatePoint]:
    """Time-sharing line: alpha -> (alpha * r_B_out, (1 - alpha) * r_M_out)."""
    alphas = list(alpha_grid)
    if not alphas:
        raise ValueError("alpha_grid must not be empty")
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValueError("alpha_grid values must lie in [0, 1]")
    op = _embb_op(cfg, op)
    if r_M_out is None:
        r_M_out = max_mmtc_rate_orth(cfg, table=table, workers=workers)
    return [
        RatePoint(
            r_B=a * op.r_B_out,
            r_M=(1.0 - a) * r_M_out,
            mode="orthogonal",
            alpha=a,
        )
        for a in alphas
    ]


def _gamma_bracket(op: EmbbOperatingPoint, r_B: float) -> Optional[Tuple[float, float]]:
    """Admissible target-SNR interval (open below at 2^r_B - 1, capped by the
    unit-average-power bound); None when it is empty."""
    thr_B = 2.0**r_B - 1.0
    hi = op.gamma_tar
    if hi <= thr_B * (1.0 + 1e-12) + 1e-300:
        return None
    lo = thr_B + (hi - thr_B) * 1e-9
    return lo, hi


def min_feasible_gamma_tar(
    cfg: SystemConfig,
    r_B: float,
    r_M: float,
    *,
    table: Optional[TrialTable] = None,
    op: Optional[EmbbOperatingPoint] = None,
    workers: int = 1,
    rel_tol: float = GAMMA_REL_TOL,
    strategy: str = "bisect",
    n_scan: int = 32,
) -> Optional[float]:
    """Smallest target SNR whose broadband error probability meets eps_B at
    the given rate pair; None if no admissible value works.

    "bisect" assumes the error probability is nonincreasing in the target
    SNR and returns the feasible end of the final bracket; "scan" evaluates
    n_scan log-spaced candidates and needs no structure.
    """
    op = _embb_op(cfg, op)
    bracket = _gamma_bracket(op, r_B)
    if bracket is None:
        return None
    lo, hi = bracket
    if table is None:
        table = build_trial_table(cfg, workers=workers)

    def embb_ok(g: float) -> bool:
        return estimate_joint_outage_nonorth(cfg, r_M, r_B, g, table=table)[1].p_hat <= cfg.eps_B

    if strategy == "scan":
        for g in np.geomspace(lo, hi, n_scan):
            if embb_ok(float(g)):
                return float(g)
        return None
    if strategy != "bisect":
        raise ValueError(f"unknown gamma search strategy {strategy!r}")
    if embb_ok(lo):
        return lo
    if not embb_ok(hi):
        return None
    while hi / lo > 1.0 + rel_tol:
        mid = float(np.sqrt(lo * hi))
        if embb_ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def max_mmtc_rate_nonorth(
    cfg: SystemConfig,
    r_B: float,
    *,
    table: Optional[TrialTable] = None,
    op: Optional[EmbbOperatingPoint] = None,
    r_hi: Optional[float] = None,
    workers: int = 1,
    tol: float = RATE_TOL,
    gamma_strategy: str = "bisect",
) -> Tuple[float, float]:
    """Largest MTC rate feasible under non-orthogonal slicing at broadband
    rate r_B, together with the accepted (minimal) broadband target SNR.

    A rate is feasible when some admissible target SNR keeps the broadband
    error within eps_B and, at the smallest such SNR, the MTC outage stays
    within eps_M. Returns (0.0, cap SNR) when the admissible interval is
    empty (r_B at the orthogonal outage rate).
    """
    op = _embb_op(cfg, op)
    if r_B < 0 or r_B > op.r_B_out * (1.0 + 1e-12):
        raise ValueError(f"r_B must lie in [0, r_B_out={op.r_B_out:.6f}], got {r_B}")
    if table is None:
        table = build_trial_table(cfg, workers=workers)
    if _gamma_bracket(op, r_B) is None:
        return 0.0, op.gamma_tar

    def probe(r: float) -> Tuple[bool, Optional[float]]:
        g = min_feasible_gamma_tar(
            cfg, r_B, r, table=table, op=op, strategy=gamma_strategy
        )
        if g is None:
            return False, None
        mm = estimate_joint_outage_nonorth(cfg, r, r_B, g, table=table)[0]
        return mm.p_hat <= cfg.eps_M, g

    ok0, g0 = probe(0.0)
    if not ok0:
        # unreachable analytically (rate zero never fails); keep the floor
        return 0.0, g0 if g0 is not None else op.gamma_tar
    best_r, best_g = 0.0, g0
    if r_hi is None:
        r_hi = max_mmtc_rate_orth(cfg, table=table, tol=tol) + tol
    hi = max(r_hi, tol)
    ok_hi, g_hi = probe(hi)
    while ok_hi:
        best_r, best_g = hi, g_hi
        hi *= 2.0
        if hi > RATE_CAP:
            warnings.warn("non-orthogonal mMTC rate search hit the rate cap")
            return best_r, best_g
        ok_hi, g_hi = probe(hi)
    lo = best_r
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, g = probe(mid)
        if ok:
            lo, best_g = mid, g
        else:
            hi = mid
    return lo, best_g


def nonorthogonal_region(
    cfg: SystemConfig,
    r_B_grid: Optional[Sequence[float]] = None,
    *,
    n_points: int = 41,
    table: Optional[TrialTable] = None,
    op: Optional[EmbbOperatingPoint] = None,
    workers: int = 1,
    tol: float = RATE_TOL,
    gamma_strategy: str = "bisect",
) -> List[RatePoint]:
    """Sweep the broadband rate over [0, r_B_out] (default: n_points evenly
    spaced values) and search the largest MTC rate at each point."""
    op = _embb_op(cfg, op)
    if r_B_grid is None:
        r_B_grid = np.linspace(0.0, op.r_B_out, n_points)
    grid = [float(r) for r in r_B_grid]
    if not grid:
        raise ValueError("r_B_grid must not be empty")
    if table is None:
        table = build_trial_table(cfg, workers=workers)
    r_hi = max_mmtc_rate_orth(cfg, table=table, tol=tol) + tol
    points = []
    for r_B in grid:
        r_M, gamma = max_mmtc_rate_nonorth(
            cfg,
            r_B,
            table=table,
            op=op,
            r_hi=r_hi,
            tol=tol,
            gamma_strategy=gamma_strategy,
        )
        points.append(
            RatePoint(r_B=r_B, r_M=r_M, mode="non_orthogonal", gamma_tar=gamma)
        )
    return points


def validate_gamma_monotonicity(
    cfg: SystemConfig,
    r_B: float,
    r_M: float,
    *,
    table: Optional[TrialTable] = None,
    op: Optional[EmbbOperatingPoint] = None,
    n_grid: int = 8,
    workers: int = 1,
) -> bool:
    """Empirical check that the broadband error probability is nonincreasing
    in the target SNR on a coarse log grid (the structure the bisection
    strategy relies on). Returns True when monotone on the tested grid."""
    op = _embb_op(cfg, op)
    bracket = _gamma_bracket(op, r_B)
    if bracket is None:
        return True
    if table is None:
        table = build_trial_table(cfg, workers=workers)
    lo, hi = bracket
    last = None
    for g in np.geomspace(lo, hi, n_grid):
        p = estimate_joint_outage_nonorth(cfg, r_M, r_B, float(g), table=table)[1].p_hat
        if last is not None and p > last:
            return False
        last = p
    return True


def max_devices(
    cfg: SystemConfig,
    r_M: float,
    r_B: float,
    mode: str,
    *,
    workers: int = 1,
    m_cap: int = 4096,
    gamma_strategy: str = "bisect",
) -> int:
    """Largest number of MTC devices supportable at (r_M, r_B) in the given
    mode; cfg.M is a template value and is replaced during the search.

    Orthogonal mode allocates the slot fraction implied by r_B and requires
    the per-device rate r_M / (1 - alpha) during the MTC fraction; a
    broadband rate at or past the outage rate leaves no time for MTC and
    yields 0. Geometric growth brackets the answer, then binary search,
    assuming feasibility is monotone in the device count.
    """
    if r_M <= 0:
        raise ValueError(f"r_M must be positive, got {r_M}")
    op = operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)
    if mode == "orthogonal":
        alpha = r_B / op.r_B_out
        if alpha >= 1.0:
            return 0
        required = r_M / (1.0 - alpha)

        def feasible(m: int) -> bool:
            cfg_m = replace(cfg, M=m)
            est = estimate_mmtc_outage_orth(cfg_m, required, workers=workers)
            return est.p_hat <= cfg.eps_M

    elif mode == "non_orthogonal":
        if _gamma_bracket(op, r_B) is None:
            return 0

        def feasible(m: int) -> bool:
            cfg_m = replace(cfg, M=m)
            table = build_trial_table(cfg_m, workers=workers)
            g = min_feasible_gamma_tar(
                cfg_m, r_B, r_M, table=table, op=op, strategy=gamma_strategy
            )
            if g is None:
                return False
            mm = estimate_joint_outage_nonorth(cfg_m, r_M, r_B, g, table=table)[0]
            return mm.p_hat <= cfg.eps_M

    else:
        raise ValueError(f"unknown mode {mode!r}")

    if not feasible(1):
        return 0
    lo, hi = 1, 2
    while hi <= m_cap and feasible(hi):
        lo = hi
        hi *= 2
    if hi > m_cap:
        warnings.warn(f"device search hit the cap M = {m_cap}")
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo
