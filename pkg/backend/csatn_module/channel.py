"""
Fading models for the CSATN uplink analysis toolkit
Nakagami (normalized Gamma) power on terrestrial-aerial links, shadowed-Rician power on
aerial-satellite links, and the special functions their closed forms need
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import special

from . import config
from .core_model import SrConstants, derive_sr_constants
from .errors import DomainError, SeriesConvergenceError
from .schemas import SrParams

ArrayLike = Union[float, np.ndarray]

# ============================ SPECIAL FUNCTIONS ============================

def hyp1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric 1F1(a; b; z) by its power series"""
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"1F1 undefined for nonpositive integer b={b}")
    if a == b:
        return math.exp(z)
    if z == 0:
        return 1.0
    if z < 0:
        # Kummer's transformation turns the alternating series into a positive one
        return math.exp(z) * hyp1f1(b - a, b, -z)
    if z > 700.0:
        raise SeriesConvergenceError(f"1F1 argument z={z:g} overflows double precision")

    terms = [1.0]
    term = 1.0
    total = 1.0
    for k in range(config.HYP1F1_MAX_TERMS):
        term *= (a + k) / (b + k) * z / (k + 1)
        if term == 0.0:
            break
        terms.append(term)
        total += term
        if not math.isfinite(total):
            raise SeriesConvergenceError(f"1F1({a}; {b}; {z}) overflowed")
        if abs(term) < config.SERIES_REL_TOL * abs(total) and k + 1 > a - b:
            break
    else:
        raise SeriesConvergenceError(f"1F1({a}; {b}; {z}) did not converge in {config.HYP1F1_MAX_TERMS} terms")
    return math.fsum(terms)


def pochhammer(x: float, n: int) -> float:
    """Rising factorial (x)_n = x (x+1) ... (x+n-1); (x)_0 = 1"""
    if n < 0:
        raise DomainError("pochhammer order must be >= 0")
    return float(math.prod(x + i for i in range(n)))


def ln_gamma(x: float) -> float:
    """log|Gamma(x)|"""
    return float(special.gammaln(x))


def lower_inc_gamma(a: float, x: float) -> float:
    """Lower incomplete Gamma function, integral of t^(a-1) e^(-t) over [0, x]"""
    if a <= 0:
        raise DomainError(f"lower incomplete gamma needs a > 0, got {a}")
    if x <= 0:
        return 0.0
    p = special.gammainc(a, x)
    if p == 0.0:
        return 0.0
    return float(math.exp(math.log(p) + special.gammaln(a)))

# ============================ NAKAGAMI POWER (T-A LINK) ============================

@dataclass(frozen=True)
class NakagamiPower:
    """Unit-mean Gamma power: shape n_ta, scale 1/n_ta"""
    n_ta: int

    def __post_init__(self):
        if self.n_ta < 1:
            raise DomainError("n_ta must be >= 1")

    @property
    def eta(self) -> float:
        """Alzer constant n (n!)^(-1/n)"""
        return alzer_eta(self.n_ta)


def alzer_eta(n_ta: int) -> float:
    return n_ta * math.exp(-special.gammaln(n_ta + 1) / n_ta)


def nakagami_power_sample(n_ta: int, rng: np.random.Generator, size=None) -> ArrayLike:
    """Draw |h|^2 ~ Gamma(n_ta, 1/n_ta)"""
    return rng.gamma(shape=n_ta, scale=1.0 / n_ta, size=size)


def nakagami_power_mgf_term(s_eff: ArrayLike, n_ta: int) -> ArrayLike:
    """E[exp(-s |h|^2)] = (1 + s/n_ta)^(-n_ta)"""
    return np.power(1.0 + np.asarray(s_eff, dtype=float) / n_ta, -float(n_ta))


def nakagami_power_cdf(x: ArrayLike, n_ta: int) -> ArrayLike:
    """Exact CDF of the unit-mean Gamma power"""
    return special.gammainc(n_ta, n_ta * np.maximum(np.asarray(x, dtype=float), 0.0))


def alzer_ccdf(x: ArrayLike, n_ta: int) -> ArrayLike:
    """Alzer approximation of P(|h|^2 > x): 1 - (1 - exp(-eta x))^n_ta"""
    eta = alzer_eta(n_ta)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return 1.0 - np.power(-np.expm1(-eta * x), n_ta)

# ============================ SHADOWED-RICIAN POWER (A-S LINK) ============================

@dataclass(frozen=True)
class SrPower:
    """Shadowed-Rician power |h|^2 with its derived constants"""
    params: SrParams
    consts: SrConstants = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "consts", derive_sr_constants(self.params))

    @classmethod
    def from_params(cls, c: float, q: float, omega: float) -> "SrPower":
        return cls(SrParams(c=c, q=q, omega=omega))

    @property
    def integer_q(self) -> bool:
        return float(self.params.q).is_integer()

    @property
    def mean(self) -> float:
        return sr_power_mean(self)


def sr_power_mean(sr: SrPower) -> float:
    """E|h|^2 = 2c + Omega"""
    return 2.0 * sr.params.c + sr.params.omega


def sr_series_coefficients(sr: SrPower, k_max: Optional[int] = None) -> np.ndarray:
    """Psi(k) = (-1)^k kappa delta^k (1-q)_k / (k!)^2 for k = 0..k_max"""
    q = sr.params.q
    kappa, delta, _ = sr.consts
    if k_max is None:
        k_max = int(q) - 1 if sr.integer_q else config.SERIES_MAX_TERMS - 1
    psi = np.empty(k_max + 1)
    psi[0] = kappa
    for k in range(k_max):
        psi[k + 1] = psi[k] * (-delta) * (1.0 - q + k) / ((k + 1) ** 2)
    return psi


def sr_cdf_weights(sr: SrPower) -> np.ndarray:
    """a_k = Psi(k) k! / (beta-delta)^(k+1); the CDF is sum_k a_k P(k+1, (beta-delta) x)"""
    q = sr.params.q
    delta = sr.consts.delta
    rate = sr.consts.rate
    a0 = sr.consts.kappa / rate
    if sr.integer_q:
        n_terms = int(q)
        weights = np.empty(n_terms)
        weights[0] = a0
        for k in range(n_terms - 1):
            weights[k + 1] = weights[k] * (-delta) * (k + 1 - q) / ((k + 1) * rate)
        return weights

    ratio = delta / rate
    if ratio >= 1.0:
        raise SeriesConvergenceError(
            f"shadowed-Rician CDF series diverges for non-integer q={q}: Omega/(2cq) = {ratio:.4g} >= 1")
    weights = [a0]
    running = a0
    for k in range(config.SERIES_MAX_TERMS - 1):
        nxt = weights[-1] * (-delta) * (k + 1 - q) / ((k + 1) * rate)
        if abs(nxt) < config.SERIES_REL_TOL * abs(running):
            break
        weights.append(nxt)
        running += nxt
    else:
        raise SeriesConvergenceError(f"shadowed-Rician series not converged in {config.SERIES_MAX_TERMS} terms")
    return np.asarray(weights)


def sr_power_pdf(x: ArrayLike, sr: SrPower) -> ArrayLike:
    """kappa exp(-beta x) 1F1(q; 1; delta x), zero for x < 0"""
    kappa, delta, beta = sr.consts
    q = sr.params.q

    def _one(v: float) -> float:
        if v < 0:
            return 0.0
        if q == 1.0:
            # 1F1(1; 1; z) = e^z, so the PDF is a plain exponential
            return kappa * math.exp(-(beta - delta) * v)
        z = delta * v
        if z > 700.0:
            # far tail: 1F1(q; 1; z) ~ e^z z^(q-1) / Gamma(q)
            return kappa * math.exp(-(beta - delta) * v + (q - 1.0) * math.log(z) - special.gammaln(q))
        return kappa * math.exp(-beta * v) * hyp1f1(q, 1.0, z)

    if np.ndim(x) == 0:
        return _one(float(x))
    return np.vectorize(_one, otypes=[float])(x)


def sr_power_series_pdf(x: ArrayLike, sr: SrPower, k_max: Optional[int] = None) -> ArrayLike:
    """Kummer-transformed form sum_k Psi(k) x^k exp(-(beta-delta) x)"""
    xa = np.asarray(x, dtype=float)
    psi = sr_series_coefficients(sr, k_max)
    xs = np.maximum(xa, 0.0)
    # Horner evaluation of the polynomial part
    poly = np.zeros_like(xs)
    for coef in psi[::-1]:
        poly = poly * xs + coef
    out = np.where(xa < 0, 0.0, poly * np.exp(-sr.consts.rate * xs))
    return float(out) if out.ndim == 0 else out


def sr_power_cdf(x: ArrayLike, sr: SrPower) -> ArrayLike:
    """sum_k Psi(k)/(beta-delta)^(k+1) * lower_gamma(k+1, (beta-delta) x)"""
    xa = np.asarray(x, dtype=float)
    y = sr.consts.rate * np.maximum(xa, 0.0)
    weights = sr_cdf_weights(sr)
    ks = np.arange(1, len(weights) + 1, dtype=float)
    out = np.tensordot(weights, special.gammainc(ks[:, None], np.atleast_1d(y)[None, :]), axes=1)
    out = np.clip(out.reshape(xa.shape), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sr_power_sample(sr: SrPower, rng: np.random.Generator, size=None) -> ArrayLike:
    """|A e^{j phi} + Z|^2 with A^2 ~ Gamma(q, Omega/q) and Z circular Gaussian of per-axis variance c"""
    c, q, omega = sr.params.c, sr.params.q, sr.params.omega
    if omega > 0:
        los_amp = np.sqrt(rng.gamma(shape=q, scale=omega / q, size=size))
    else:
        los_amp = np.zeros(size) if size is not None else 0.0
    phase = rng.uniform(0.0, 2.0 * np.pi, size=size)
    scatter_std = math.sqrt(c)
    re = los_amp * np.cos(phase) + scatter_std * rng.standard_normal(size)
    im = los_amp * np.sin(phase) + scatter_std * rng.standard_normal(size)
    return re * re + im * im


def sr_mgf(x: ArrayLike, sr: Union[SrParams, SrPower]) -> ArrayLike:
    """E[exp(-x |h|^2)] = (2cq)^q (1+2cx)^(q-1) / ((2cq+Omega)(1+2cx) - Omega)^q"""
    p = sr.params if isinstance(sr, SrPower) else sr
    c, q, omega = p.c, p.q, p.omega
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("shadowed-Rician MGF is evaluated for x >= 0")
    u = 1.0 + 2.0 * c * xa
    log_m = q * math.log(2.0 * c * q) + (q - 1.0) * np.log(u) - q * np.log((2.0 * c * q + omega) * u - omega)
    out = np.exp(log_m)
    return float(out) if out.ndim == 0 else out
