"""
Scenario model for the CSATN uplink analysis toolkit
Derived shadowed-Rician constants and configuration validation
"""

import math
from typing import List, NamedTuple

from . import config
from .errors import ConfigError, SeriesConvergenceError
from .schemas import ScenarioConfig, SrParams, Violation


class SrConstants(NamedTuple):
    """Constants of the shadowed-Rician power PDF kappa * exp(-beta x) * 1F1(q; 1; delta x)"""
    kappa: float
    delta: float
    beta: float

    @property
    def rate(self) -> float:
        """beta - delta, the exponential decay of the Kummer-transformed PDF"""
        return self.beta - self.delta


def derive_sr_constants(sr: SrParams) -> SrConstants:
    """kappa = (2cq)^q / (2c (2cq+Omega)^q), delta = Omega / (2c (2cq+Omega)), beta = 1/(2c)"""
    c, q, omega = sr.c, sr.q, sr.omega
    if not (c > 0 and q > 0 and omega >= 0):
        raise SeriesConvergenceError(f"shadowed-Rician parameters out of range: c={c}, q={q}, omega={omega}")
    two_c = 2.0 * c
    denom = two_c * q + omega
    # log form keeps (2cq/(2cq+Omega))^q finite for large q
    kappa = math.exp(q * (math.log(two_c * q) - math.log(denom))) / two_c
    delta = omega / (two_c * denom)
    beta = 1.0 / two_c
    if not beta > delta:
        raise SeriesConvergenceError(f"beta={beta:.6g} <= delta={delta:.6g}: shadowed-Rician series cannot converge")
    return SrConstants(kappa=kappa, delta=delta, beta=beta)


def validate(cfg: ScenarioConfig) -> List[Violation]:
    """Every violated invariant of cfg; empty iff the scenario is usable"""
    out: List[Violation] = []

    def err(field: str, rule: str):
        out.append(Violation(field=field, rule=rule, severity="error"))

    for name in ("h_a", "d_0", "r_u", "r_a", "d_min"):
        if not getattr(cfg, name) > 0:
            err(name, "length must be > 0")
    for name in ("p_t", "p_a", "p_m", "g_t_main", "g_t_side", "g_r", "alpha_1", "alpha_2", "k_rate"):
        if not getattr(cfg, name) > 0:
            err(name, "must be > 0")
    for name in ("lambda_t", "lambda_1", "noise_t", "noise_a"):
        if getattr(cfg, name) < 0:
            err(name, "must be >= 0")

    if cfg.d_min > 0 and not math.isclose(cfg.r_a, cfg.d_min / 2.0, rel_tol=config.ASSOCIATION_RTOL):
        out.append(Violation(field="r_a", rule=f"r_a must equal d_min/2 = {cfg.d_min / 2.0:g} m",
                             severity="warning"))
    if cfg.r_u > 0 and cfg.r_a > 0 and not cfg.r_u > cfg.r_a:
        err("r_u", "user disk radius must exceed the AN coverage radius")
    if cfg.n_0 < 1:
        err("lambda_t", f"n_0 = round(lambda_t * pi * r_u^2) = {cfg.n_0} must be >= 1")
    if not (0 < cfg.theta <= 2 * math.pi):
        err("theta", "mainlobe width must lie in (0, 2*pi]")
    if cfg.n_ta < 1:
        err("n_ta", "Nakagami parameter must be >= 1")

    sr = cfg.sr
    if not sr.c > 0:
        err("sr.c", "must be > 0")
    if not sr.q > 0:
        err("sr.q", "must be > 0")
    if sr.omega < 0:
        err("sr.omega", "must be >= 0")
    return out


def require_valid(cfg: ScenarioConfig) -> ScenarioConfig:
    """Raise ConfigError if cfg has error-class violations"""
    errors = [v for v in validate(cfg) if v.severity == "error"]
    if errors:
        raise ConfigError(errors)
    return cfg


def has_errors(violations: List[Violation]) -> bool:
    return any(v.severity == "error" for v in violations)
