"""Command-line interface: config ingestion, experiment orchestration, CSV output.

Config files are flat `key = value` text ('#' starts a comment). Average
channel gains are accepted either linear (`gamma_bar_B`) or in dB
(`gamma_bar_B_db`), exactly one form per gain; conversion to linear happens
here, once, and everything downstream is linear. `L` may be a single value
or a comma-separated sweep. The two named presets reproduce the reference
experiment shapes (rate-region sweep at M = 10, and max-device sweep at
r_M = 0.25) over L in {1, 2, 4, 8, 16}.

Commands
    embb-analytic  closed-form broadband operating point per L
    outage         Monte Carlo outage estimates at a fixed operating point
    region         achievable (r_B, r_M) pairs, orthogonal and/or non-orthogonal
    max-devices    largest supportable device count over an r_B grid

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channel import SystemConfig, db_to_linear
from .embb_analysis import operating_point
from .monte_carlo import (
    build_trial_table,
    estimate_joint_outage_nonorth,
    estimate_mmtc_outage_orth,
)
from .slicing_search import (
    max_devices,
    max_mmtc_rate_orth,
    nonorthogonal_region,
    orthogonal_region,
)

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "parse_spec",
    "serialize_spec",
    "run_embb_analytic",
    "run_outage",
    "run_region",
    "run_max_devices",
    "main",
]

COMMANDS = ("embb-analytic", "outage", "region", "max-devices")
MODES = ("orth", "nonorth", "both")


class ConfigError(ValueError):
    """Invalid configuration input; maps to exit code 2."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed experiment: canonical scenario (linear gains) plus grid and
    command controls. L_values carries a preset's antenna sweep; plain
    configs have a single entry."""

    scenario: SystemConfig
    command: str
    mode: str = "both"
    L_values: Tuple[int, ...] = ()
    alpha_points: int = 41
    r_b_points: int = 41
    r_M: Optional[float] = None
    r_B: Optional[float] = None
    gamma_tar: Optional[float] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.L_values:
            object.__setattr__(self, "L_values", (self.scenario.L,))
        if self.alpha_points < 1:
            raise ConfigError(f"alpha_points must be >= 1, got {self.alpha_points}")
        if self.r_b_points < 1:
            raise ConfigError(f"r_b_points must be >= 1, got {self.r_b_points}")


_SCENARIO_KEYS = {
    "L", "M", "gamma_bar_B", "gamma_bar_B_db", "gamma_bar_M", "gamma_bar_M_db",
    "eps_B", "eps_M", "P_M", "trials", "seed",
}
_EXPERIMENT_KEYS = {"mode", "alpha_points", "r_b_points", "r_M", "r_B", "gamma_tar"}

_PRESET_COMMON = dict(
    gamma_bar_B=db_to_linear(20.0),
    gamma_bar_M=db_to_linear(5.0),
    eps_B=1e-3,
    eps_M=1e-1,
    P_M=1.0,
    M=10,
    trials=100_000,
    seed=0,
    L_values=(1, 2, 4, 8, 16),
    mode="both",
)
PRESETS: Dict[str, Dict] = {
    "fig3": dict(_PRESET_COMMON),
    "fig5": dict(_PRESET_COMMON, r_M=0.25),
}


def _parse_kv(text: str) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {line!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _convert(key: str, value: str):
    try:
        if key in ("M", "trials", "seed", "alpha_points", "r_b_points"):
            return int(value)
        if key == "L":
            return tuple(int(v) for v in value.split(","))
        if key == "mode":
            return value
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"config field {key!r}: cannot parse {value!r}") from exc


def _pick_gain(raw: Dict, name: str) -> float:
    lin, db = raw.get(name), raw.get(f"{name}_db")
    if lin is not None and db is not None:
        raise ConfigError(f"config field {name!r}: give linear or _db form, not both")
    if lin is not None:
        return float(lin)
    if db is not None:
        return db_to_linear(float(db))
    raise ConfigError(f"config field {name!r} is required (linear or _db)")


def parse_spec(
    command: str,
    config_text: Optional[str] = None,
    preset: Optional[str] = None,
    *,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
) -> ExperimentSpec:
    """Assemble a spec from (preset defaults) <- (config file) <- (overrides)."""
    merged: Dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        merged.update(PRESETS[preset])
    if config_text is not None:
        raw = _parse_kv(config_text)
        unknown = set(raw) - _SCENARIO_KEYS - _EXPERIMENT_KEYS
        if unknown:
            raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
        for gain in ("gamma_bar_B", "gamma_bar_M"):
            if gain in raw or f"{gain}_db" in raw:
                merged[gain] = _pick_gain(raw, gain)
        for key, value in raw.items():
            if key in ("gamma_bar_B", "gamma_bar_B_db", "gamma_bar_M", "gamma_bar_M_db"):
                continue
            converted = _convert(key, value)
            if key == "L":
                merged["L_values"] = converted
            else:
                merged[key] = converted
    if not merged:
        raise ConfigError("no configuration given: need --config and/or --preset")
    if seed is not None:
        merged["seed"] = seed
    if trials is not None:
        merged["trials"] = trials

    missing = [
        k for k in ("L_values", "M", "gamma_bar_B", "gamma_bar_M", "eps_B", "eps_M")
        if k not in merged
    ]
    if missing:
        name = "L" if missing[0] == "L_values" else missing[0]
        raise ConfigError(f"config field {name!r} is required")
    L_values = tuple(merged.pop("L_values"))
    experiment = {k: merged.pop(k) for k in list(merged) if k in _EXPERIMENT_KEYS}
    try:
        scenario = SystemConfig(L=L_values[0], **merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentSpec(
        scenario=scenario, command=command, L_values=L_values, **experiment
    )


def serialize_spec(spec: ExperimentSpec) -> str:
    """Canonical flat key-value form (linear gains); parse(serialize(s)) == s."""
    cfg = spec.scenario
    lines = [
        f"L = {','.join(str(v) for v in spec.L_values)}",
        f"M = {cfg.M}",
        f"gamma_bar_B = {cfg.gamma_bar_B!r}",
        f"gamma_bar_M = {cfg.gamma_bar_M!r}",
        f"eps_B = {cfg.eps_B!r}",
        f"eps_M = {cfg.eps_M!r}",
        f"P_M = {cfg.P_M!r}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.seed}",
        f"mode = {spec.mode}",
        f"alpha_points = {spec.alpha_points}",
        f"r_b_points = {spec.r_b_points}",
    ]
    for key in ("r_M", "r_B", "gamma_tar"):
        value = getattr(spec, key)
        if value is not None:
            lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.6f}"


def _fmt_gamma(x) -> str:
    # target SNRs span ~1e-7 (vanishing interference) to ~1e4: keep
    # significant digits rather than fixed decimals
    return "" if x is None else f"{x:.10g}"


def _write_csv(header: Sequence[str], rows: List[Sequence], out: Optional[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def _cfg_for(spec: ExperimentSpec, L: int) -> SystemConfig:
    return replace(spec.scenario, L=L)


def run_embb_analytic(spec: ExperimentSpec, out: Optional[str] = None) -> str:
    """Closed-form broadband operating point, one row per antenna count."""
    rows = []
    for L in spec.L_values:
        cfg = _cfg_for(spec, L)
        op = operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)
        rows.append((L, op.gamma_min, op.gamma_tar, op.a_B, op.r_B_out))
    return _write_csv(["L", "gamma_min", "gamma_tar", "a_B", "r_B_out"], rows, out)


_OUTAGE_HEADER = [
    "mode", "L", "M", "r_M", "r_B", "gamma_tar",
    "eps_B_hat", "eps_M_hat", "halfwidth_B", "halfwidth_M",
]


def run_outage(spec: ExperimentSpec, out: Optional[str] = None, workers: int = 1) -> str:
    """Outage estimates at a fixed operating point (r_M required; nonorth
    additionally needs r_B, with gamma_tar defaulting to the average-power cap)."""
    if spec.r_M is None:
        raise ConfigError("config field 'r_M' is required for the outage command")
    rows = []
    for L in spec.L_values:
        cfg = _cfg_for(spec, L)
        if spec.mode in ("orth", "both"):
            est = estimate_mmtc_outage_orth(cfg, spec.r_M, workers=workers)
            rows.append(
                ("orth", L, cfg.M, spec.r_M, None, None,
                 None, est.p_hat, None, est.half_width_95)
            )
        if spec.mode in ("nonorth", "both"):
            if spec.r_B is None:
                raise ConfigError(
                    "config field 'r_B' is required for non-orthogonal outage"
                )
            op = operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)
            gamma = spec.gamma_tar if spec.gamma_tar is not None else op.gamma_tar
            mm, eb = estimate_joint_outage_nonorth(
                cfg, spec.r_M, spec.r_B, gamma, workers=workers
            )
            rows.append(
                ("nonorth", L, cfg.M, spec.r_M, spec.r_B, _fmt_gamma(gamma),
                 eb.p_hat, mm.p_hat, eb.half_width_95, mm.half_width_95)
            )
    return _write_csv(_OUTAGE_HEADER, rows, out)


_REGION_HEADER = [
    "mode", "L", "M", "alpha", "gamma_tar", "r_B", "r_M",
    "eps_B_hat", "eps_M_hat", "halfwidth_B", "halfwidth_M",
]


def run_region(spec: ExperimentSpec, out: Optional[str] = None, workers: int = 1) -> str:
    """Achievable rate pairs over the requested grids, one CSV row per point."""
    rows = []
    for L in spec.L_values:
        cfg = _cfg_for(spec, L)
        op = operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)
        table = build_trial_table(cfg, workers=workers)
        r_M_out = max_mmtc_rate_orth(cfg, table=table)
        if spec.mode in ("orth", "both"):
            mm_est = estimate_mmtc_outage_orth(cfg, r_M_out, table=table)
            alphas = np.linspace(0.0, 1.0, spec.alpha_points)
            for pt in orthogonal_region(cfg, alphas, op=op, r_M_out=r_M_out):
                rows.append(
                    ("orth", L, cfg.M, pt.alpha, None, pt.r_B, pt.r_M,
                     1.0 - op.a_B, mm_est.p_hat, 0.0, mm_est.half_width_95)
                )
        if spec.mode in ("nonorth", "both"):
            points = nonorthogonal_region(
                cfg, n_points=spec.r_b_points, table=table, op=op
            )
            for pt in points:
                if pt.gamma_tar > 2.0**pt.r_B - 1.0:
                    mm, eb = estimate_joint_outage_nonorth(
                        cfg, pt.r_M, pt.r_B, pt.gamma_tar, table=table
                    )
                    stats = (eb.p_hat, mm.p_hat, eb.half_width_95, mm.half_width_95)
                else:
                    # degenerate grid endpoint (r_B at the outage rate): the
                    # accepted rate is 0, where both error probabilities vanish
                    stats = (0.0, 0.0, 0.0, 0.0)
                rows.append(
                    ("nonorth", L, cfg.M, None, _fmt_gamma(pt.gamma_tar),
                     pt.r_B, pt.r_M) + stats
                )
    return _write_csv(_REGION_HEADER, rows, out)


def run_max_devices(spec: ExperimentSpec, out: Optional[str] = None, workers: int = 1) -> str:
    """Largest supportable device count over an r_B grid (default r_M 0.25)."""
    r_M = spec.r_M if spec.r_M is not None else 0.25
    if r_M <= 0:
        raise ConfigError(f"config field 'r_M' must be positive, got {r_M}")
    rows = []
    for L in spec.L_values:
        cfg = _cfg_for(spec, L)
        op = operating_point(cfg.L, cfg.eps_B, cfg.gamma_bar_B)
        grid = np.linspace(0.0, op.r_B_out, spec.r_b_points)
        for mode_token, mode in (("orth", "orthogonal"), ("nonorth", "non_orthogonal")):
            if spec.mode not in (mode_token, "both"):
                continue
            for r_B in grid:
                m_max = max_devices(cfg, r_M, float(r_B), mode, workers=workers)
                rows.append((mode_token, L, float(r_B), m_max))
    return _write_csv(["mode", "L", "r_B", "M_max"], rows, out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="slicesim",
        description="Uplink eMBB/mMTC slicing simulator (MRC-SIC, Monte Carlo)",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--trials", type=int, help="override the trial budget")
    parser.add_argument("--workers", type=int, default=1,
                        help="max threads for trial generation (never affects results)")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    args = parser.parse_args(argv)

    try:
        config_text = None
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    config_text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
        spec = parse_spec(
            args.command, config_text, args.preset, seed=args.seed, trials=args.trials
        )
        if args.command == "embb-analytic":
            run_embb_analytic(spec, out=args.out)
        elif args.command == "outage":
            run_outage(spec, out=args.out, workers=args.workers)
        elif args.command == "region":
            run_region(spec, out=args.out, workers=args.workers)
        else:
            run_max_devices(spec, out=args.out, workers=args.workers)
    except ConfigError as exc:
        print(f"slicesim: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"slicesim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
