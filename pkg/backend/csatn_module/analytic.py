"""
Analytic module for the CSATN uplink analysis toolkit
Interference Laplace transforms, coverage probabilities and ergodic rates of the
terrestrial-aerial (T-A) and aerial-satellite (A-S) links
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special, stats

from . import config
from . import utils
from .channel import SrPower, alzer_eta, nakagami_power_mgf_term, sr_cdf_weights, sr_mgf
from .core_model import require_valid
from .errors import DomainError, QuadratureError
from .quadrature import DEFAULT_QUAD, adaptive_quad, panel_rule
from .schemas import CoverageCurve, QuadratureSpec, ScenarioConfig
from .spatial import (DistanceLaw, distance_law_for, distance_pdf, interferer_success_prob,
                      mhcpp_density, projection_distance_pdf)

LAPLACE_METHODS = ("closed", "series")
RATE_METHODS = ("quad", "layer_cake")

# ============================ LENS DISTANCE RULE ============================

def _lens_rule(law: DistanceLaw, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes r and weights w * f_R(r | m0) on the support pieces of the distance law"""
    r, w = panel_rule(law.edges, spec.gauss_order)
    wp = w * np.asarray(distance_pdf(r, law))
    mass = wp.sum()
    if mass > 0:
        # discretized density carries unit mass, so L(0) = 1 holds to rounding
        wp = wp / mass
    return r, wp


def _ta_path_gain(r: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """(H_A^2 + r^2)^(alpha_1/2)"""
    return np.power(cfg.h_a ** 2 + r ** 2, 0.5 * cfg.alpha_1)


def _interferer_factor(s: np.ndarray, r: np.ndarray, wp: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """J(s) = E_R[(1 + s P_T / (N (H^2 + R^2)^(alpha/2)))^(-N)] for each s"""
    s_eff = s[:, None] * cfg.p_t / _ta_path_gain(r, cfg)[None, :]
    return nakagami_power_mgf_term(s_eff, cfg.n_ta) @ wp

# ============================ BINOMIAL SUMS ============================

def _binomial_closed(j: np.ndarray, p_i: float, n: int, include_zero_term: bool) -> np.ndarray:
    """sum_k C(n,k) (p J)^k (1-p)^(n-k) by the binomial theorem, in log space"""
    with np.errstate(divide="ignore"):
        full = np.exp(n * np.log1p(-p_i * (1.0 - j)))
        if include_zero_term:
            return full
        return full - math.exp(n * math.log1p(-p_i)) if p_i < 1.0 else full


def _binomial_series_one(j: float, p_i: float, n: int, include_zero_term: bool) -> float:
    """Term-by-term sum, expanded outwards from the mode until terms drop below the cutoff"""
    k0 = 0 if include_zero_term else 1
    if n < k0:
        return 0.0
    if j <= 0.0 or p_i <= 0.0:
        return (1.0 - p_i) ** n if k0 == 0 else 0.0
    if p_i >= 1.0:
        return j ** n if n >= k0 else 0.0

    log_j = math.log(j)

    def log_terms(ks: np.ndarray) -> np.ndarray:
        return stats.binom.logpmf(ks, n, p_i) + ks * log_j

    # terms are proportional to a Binomial(n, p_eff) pmf, so they are unimodal
    p_eff = p_i * j / (1.0 - p_i + p_i * j)
    start = int(min(max(math.floor((n + 1) * p_eff), k0), n))
    peak = float(log_terms(np.array([start]))[0])
    cutoff = peak + config.BINOMIAL_LOG_CUTOFF
    block = 64
    chunks: List[np.ndarray] = []

    k = start
    while k <= n:
        lt = log_terms(np.arange(k, min(k + block, n + 1)))
        chunks.append(lt)
        if lt[-1] < cutoff:
            break
        k += block
    k = start - 1
    while k >= k0:
        lt = log_terms(np.arange(max(k - block + 1, k0), k + 1))
        chunks.append(lt)
        if lt[0] < cutoff:
            break
        k -= block

    return math.fsum(np.exp(np.concatenate(chunks)))


def _laplace_it_values(s: np.ndarray, r: np.ndarray, wp: np.ndarray, p_i: float, cfg: ScenarioConfig,
                       include_zero_term: bool, method: str) -> np.ndarray:
    j = np.clip(_interferer_factor(s, r, wp, cfg), 0.0, 1.0)
    n = cfg.n_0 - 1
    if method == "closed":
        return _binomial_closed(j, p_i, n, include_zero_term)
    if method == "series":
        return np.array([_binomial_series_one(float(x), p_i, n, include_zero_term) for x in j])
    raise DomainError(f"unknown Laplace method {method!r}; expected one of {LAPLACE_METHODS}")

# ============================ T-A LINK ============================

def laplace_it(s, m0: float, cfg: ScenarioConfig, include_zero_term: bool = True,
               method: str = "closed", quad: Optional[QuadratureSpec] = None):
    """Laplace transform of the T-A interference seen by an AN whose projection is m0 from the
    user-disk center.

    With include_zero_term the interferer-free event contributes (1 - P_I)^(N_0 - 1) and the
    transform is 1 at s = 0; without it the sum starts at one interferer.
    """
    spec = quad or DEFAULT_QUAD
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0):
        raise DomainError("Laplace transform argument must be >= 0")
    law = distance_law_for(m0, cfg)
    r, wp = _lens_rule(law, spec)
    p_i = interferer_success_prob(m0, cfg)
    out = _laplace_it_values(np.atleast_1d(sa).ravel(), r, wp, p_i, cfg, include_zero_term, method)
    out = out.reshape(sa.shape)
    return float(out) if out.ndim == 0 else out


def _ta_conditional(m0: float, t_lin: float, cfg: ScenarioConfig, include_zero_term: bool,
                    spec: QuadratureSpec) -> float:
    """Coverage of the T-A link given M = m0 (inner r_m integral and Alzer sum)"""
    law = distance_law_for(m0, cfg)
    r, wp = _lens_rule(law, spec)
    p_i = interferer_success_prob(m0, cfg)

    n_ta = cfg.n_ta
    ns = np.arange(1, n_ta + 1)
    s = ns[:, None] * alzer_eta(n_ta) * t_lin * _ta_path_gain(r, cfg)[None, :] / cfg.p_t
    lap = _laplace_it_values(s.ravel(), r, wp, p_i, cfg, include_zero_term, "closed").reshape(s.shape)
    if cfg.noise_t > 0:
        lap = lap * np.exp(-s * cfg.noise_t)
    coeffs = np.where(ns % 2 == 1, 1.0, -1.0) * special.comb(n_ta, ns)
    return float(coeffs @ (lap @ wp))


def _m0_edges(cfg: ScenarioConfig) -> List[float]:
    return [0.0, cfg.r_u - cfg.r_a, cfg.r_u, cfg.r_u + cfg.r_a]


def _coverage_ta_raw(t_lin: float, cfg: ScenarioConfig, include_zero_term: bool,
                     spec: QuadratureSpec) -> float:
    def integrand(m0: float) -> float:
        return _ta_conditional(m0, t_lin, cfg, include_zero_term, spec) * \
            projection_distance_pdf(m0, cfg.r_u, cfg.r_a)

    return adaptive_quad(integrand, _m0_edges(cfg), spec, label="T-A coverage")


def coverage_ta(t_h1: float, cfg: ScenarioConfig, include_zero_term: bool = True,
                quad: Optional[QuadratureSpec] = None) -> float:
    """P(SINR_1 >= t_h1) for a linear threshold t_h1 > 0"""
    if not t_h1 > 0:
        raise DomainError("T-A threshold must be > 0 (linear)")
    require_valid(cfg)
    value = _coverage_ta_raw(float(t_h1), cfg, include_zero_term, quad or DEFAULT_QUAD)
    return utils.clamp_probability(value, config.CLAMP_SLACK, "coverage_ta")


def zero_term_gap(cfg: ScenarioConfig, quad: Optional[QuadratureSpec] = None) -> float:
    """E_M[(1 - P_I)^(N_0 - 1)]: how far the interferer-free event shifts T-A coverage.

    The shift does not depend on the threshold because the Alzer coefficients sum to one.
    """
    require_valid(cfg)
    n = cfg.n_0 - 1

    def integrand(m0: float) -> float:
        p_i = interferer_success_prob(m0, cfg)
        return math.exp(n * math.log1p(-p_i)) * projection_distance_pdf(m0, cfg.r_u, cfg.r_a)

    return adaptive_quad(integrand, _m0_edges(cfg), quad, label="zero-term gap")

# ============================ A-S LINK ============================

def laplace_ia(s_prime, cfg: ScenarioConfig):
    """exp(lambda_A pi R_C^2 (M_2 - 1)) with M_2 the sectored mixture of shadowed-Rician MGFs"""
    sa = np.asarray(s_prime, dtype=float)
    if np.any(sa < 0):
        raise DomainError("Laplace transform argument must be >= 0")
    lam_a = mhcpp_density(cfg.lambda_1, cfg.d_min)
    area = math.pi * cfg.r_c ** 2
    scale = sa * cfg.p_a * cfg.d_0 ** (-cfg.alpha_2) * cfg.g_r
    main_frac = cfg.theta / (2.0 * math.pi)
    m2 = main_frac * np.asarray(sr_mgf(scale * cfg.g_t_main, cfg.sr)) + \
        (1.0 - main_frac) * np.asarray(sr_mgf(scale * cfg.g_t_side, cfg.sr))
    out = np.exp(lam_a * area * (m2 - 1.0))
    return float(out) if out.ndim == 0 else out


def _coverage_as_raw(t_lin: float, cfg: ScenarioConfig) -> float:
    sr = SrPower(cfg.sr)
    weights = sr_cdf_weights(sr)
    rate = sr.consts.rate
    base = t_lin * cfg.d_0 ** cfg.alpha_2 / (cfg.p_m * cfg.g_t_main * cfg.g_r)
    acc = []
    for k, a_k in enumerate(weights):
        zeta = math.exp(-special.gammaln(k + 2) / (k + 1))
        ts = np.arange(k + 2)
        s = ts * zeta * rate * base
        lap = np.asarray(laplace_ia(s, cfg)) * np.exp(-s * cfg.noise_a)
        signs = np.where(ts % 2 == 0, 1.0, -1.0)
        acc.append(a_k * math.fsum(special.comb(k + 1, ts) * signs * lap))
    return 1.0 - math.fsum(acc)


def coverage_as(t_h2: float, cfg: ScenarioConfig) -> float:
    """P(SINR_2 >= t_h2) for a linear threshold t_h2 > 0"""
    if not t_h2 > 0:
        raise DomainError("A-S threshold must be > 0 (linear)")
    require_valid(cfg)
    return utils.clamp_probability(_coverage_as_raw(float(t_h2), cfg), config.CLAMP_SLACK, "coverage_as")


def coverage_joint(t_h1: float, t_h2: float, cfg: ScenarioConfig, include_zero_term: bool = True,
                   quad: Optional[QuadratureSpec] = None) -> float:
    """Product of the two hop coverages (hops treated as independent)"""
    return coverage_ta(t_h1, cfg, include_zero_term, quad) * coverage_as(t_h2, cfg)

# ============================ ERGODIC RATES ============================

def _layer_cake(cov: Callable[[float], float], spec: QuadratureSpec, method: str, label: str) -> float:
    """Integral over t >= 0 of cov(2^t - 1); the upper limit grows until the integrand is negligible"""
    t_max = config.RATE_T_STEP
    while cov(2.0 ** t_max - 1.0) >= config.RATE_TAIL_TOL:
        t_max += config.RATE_T_STEP
        if t_max > config.RATE_T_CEILING:
            raise QuadratureError(f"{label}: coverage still >= {config.RATE_TAIL_TOL:g} at t={t_max:g} bits")

    def integrand(t: float) -> float:
        return cov(2.0 ** t - 1.0)

    if method == "quad":
        return adaptive_quad(integrand, [0.0, t_max], spec, label=label)
    if method == "layer_cake":
        ts = np.linspace(0.0, t_max, config.LAYER_CAKE_POINTS)
        return float(integrate.simpson([integrand(t) for t in ts], x=ts))
    raise DomainError(f"unknown rate method {method!r}; expected one of {RATE_METHODS}")


def rate_ta(cfg: ScenarioConfig, include_zero_term: bool = True, quad: Optional[QuadratureSpec] = None,
            method: str = "quad") -> float:
    """Average ergodic rate of a terrestrial node, bit/s/Hz.

    The interferer-free event has infinite SINR, so the layer cake always runs over the
    coverage without it. With include_zero_term the result is conditioned on a finite
    SINR (divided by 1 - zero_term_gap), which is what the simulator averages; without
    it the plain sum from one interferer upward is integrated.
    """
    require_valid(cfg)
    spec = quad or DEFAULT_QUAD
    value = _layer_cake(lambda t: _coverage_ta_raw(t, cfg, False, spec), spec, method, "rate_ta")
    if include_zero_term:
        value /= 1.0 - zero_term_gap(cfg, spec)
    if config.VERBOSE:
        print(f"[analytic] rate_ta={value / cfg.k_rate:.6g} bit/s/Hz (method={method})")
    return value / cfg.k_rate


def rate_as(cfg: ScenarioConfig, quad: Optional[QuadratureSpec] = None, method: str = "quad") -> float:
    """Average ergodic rate of an aerial node, bit/s/Hz"""
    require_valid(cfg)
    value = _layer_cake(lambda t: _coverage_as_raw(t, cfg), quad or DEFAULT_QUAD, method, "rate_as")
    if config.VERBOSE:
        print(f"[analytic] rate_as={value / cfg.k_rate:.6g} bit/s/Hz (method={method})")
    return value / cfg.k_rate

# ============================ CURVES ============================

def coverage_curve(link: str, thresholds_db: Sequence[float], cfg: ScenarioConfig,
                   include_zero_term: bool = True, quad: Optional[QuadratureSpec] = None,
                   t_h2_db: float = config.DEFAULT_TH2_DB) -> CoverageCurve:
    """Analytic coverage over a dB threshold grid.

    For JOINT the grid is the T-A threshold and the A-S threshold is held at t_h2_db.
    """
    thresholds_db = [float(t) for t in thresholds_db]
    values = []
    for t_db in thresholds_db:
        t_lin = utils.db_to_linear(t_db)
        if link == "TA":
            values.append(coverage_ta(t_lin, cfg, include_zero_term, quad))
        elif link == "AS":
            values.append(coverage_as(t_lin, cfg))
        elif link == "JOINT":
            values.append(coverage_joint(t_lin, utils.db_to_linear(t_h2_db), cfg, include_zero_term, quad))
        else:
            raise DomainError(f"unknown link {link!r}")
    curve = CoverageCurve(link=link, thresholds_db=thresholds_db, values=values, method="ANALYTIC",
                          config_hash=cfg.config_hash(), zero_term=include_zero_term if link != "AS" else None)
    if not curve.is_monotone():
        raise QuadratureError(f"{link} coverage curve is not nonincreasing in threshold: {values}")
    if config.VERBOSE:
        print(f"[analytic] {link} coverage over {len(values)} thresholds, cfg={curve.config_hash}")
    return curve
