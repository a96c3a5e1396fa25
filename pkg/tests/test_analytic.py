import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy import integrate

from csatn_module import analytic
from csatn_module.channel import SrPower, alzer_eta, sr_power_sample
from csatn_module.errors import DomainError
from csatn_module.schemas import CoverageCurve
from csatn_module.spatial import (Disk, distance_law_for, interferer_success_prob, lens_sample, mhcpp_density,
                                  sample_mhcpp2)
from csatn_module.utils import db_to_linear

CASE_M0 = [3000.0, 9300.0, 9700.0]

# ============================ T-A LAPLACE TRANSFORM ============================

@pytest.mark.parametrize("m0", CASE_M0)
def test_laplace_it_at_zero(m0, cfg):
    p_i = interferer_success_prob(m0, cfg)
    assert analytic.laplace_it(0.0, m0, cfg, include_zero_term=True) == pytest.approx(1.0, abs=1e-12)
    without = analytic.laplace_it(0.0, m0, cfg, include_zero_term=False)
    assert without == pytest.approx(1.0 - (1.0 - p_i) ** (cfg.n_0 - 1), abs=1e-12)


@pytest.mark.parametrize("m0", CASE_M0)
@pytest.mark.parametrize("include", [True, False])
def test_laplace_it_closed_and_series_agree(m0, include, cfg):
    s = np.array([0.0, 0.5, 5.0, 50.0, 500.0])
    closed = analytic.laplace_it(s, m0, cfg, include, method="closed")
    series = analytic.laplace_it(s, m0, cfg, include, method="series")
    npt.assert_allclose(closed, series, atol=1e-10, rtol=0)


@pytest.mark.parametrize("m0", CASE_M0)
def test_laplace_it_is_nonincreasing(m0, cfg):
    s = np.geomspace(1e-3, 1e4, 30)
    values = analytic.laplace_it(s, m0, cfg)
    assert np.all(np.diff(values) <= 1e-14)
    assert np.all((values >= 0) & (values <= 1))


def test_laplace_it_rejects_bad_arguments(cfg):
    with pytest.raises(DomainError):
        analytic.laplace_it(-1.0, 5000.0, cfg)
    with pytest.raises(DomainError):
        analytic.laplace_it(1.0, cfg.r_c + 1.0, cfg)
    with pytest.raises(DomainError):
        analytic.laplace_it(1.0, 5000.0, cfg, method="bogus")


def test_laplace_it_matches_empirical_transform(cfg):
    # s sized so the transform is of order one rather than vanishingly small
    m0, s = 5000.0, 5.0
    law = distance_law_for(m0, cfg)
    p_i = interferer_success_prob(m0, cfg)
    rng = np.random.default_rng(11)
    n_real = 100_000
    counts = rng.binomial(cfg.n_0 - 1, p_i, size=n_real)
    pts = lens_sample(int(counts.sum()), law, rng)
    r2 = (pts[:, 0] - m0) ** 2 + pts[:, 1] ** 2
    fades = rng.gamma(cfg.n_ta, 1.0 / cfg.n_ta, size=r2.size)
    owner = np.repeat(np.arange(n_real), counts)
    interference = np.bincount(owner, weights=cfg.p_t * fades / (cfg.h_a ** 2 + r2), minlength=n_real)
    empirical = np.exp(-s * interference).mean()
    assert analytic.laplace_it(s, m0, cfg) == pytest.approx(empirical, rel=0.02)

# ============================ T-A COVERAGE ============================

def test_coverage_ta_vanishing_threshold(cfg):
    assert analytic.coverage_ta(db_to_linear(-60.0), cfg, include_zero_term=True) > 0.999


def test_coverage_ta_curve_is_monotone(cfg):
    curve = analytic.coverage_curve("TA", [-10.0, -5.0, 0.0, 5.0, 10.0], cfg)
    assert isinstance(curve, CoverageCurve)
    assert curve.method == "ANALYTIC" and curve.zero_term is True
    assert np.all(np.diff(curve.values) <= 1e-6)
    assert curve.is_monotone()


def test_zero_term_shift_is_threshold_free(cfg):
    gap = analytic.zero_term_gap(cfg)
    assert 0.0 < gap < 0.05
    for t_db in (-20.0, 0.0):
        t = db_to_linear(t_db)
        diff = analytic.coverage_ta(t, cfg, True) - analytic.coverage_ta(t, cfg, False)
        assert diff == pytest.approx(gap, abs=1e-6)


def test_coverage_ta_rejects_nonpositive_threshold(cfg):
    with pytest.raises(DomainError):
        analytic.coverage_ta(0.0, cfg)


def test_coverage_ta_with_noise_is_lower(cfg):
    t = db_to_linear(-20.0)
    noisy = cfg.replace(noise_t=1e-3)
    assert analytic.coverage_ta(t, noisy) < analytic.coverage_ta(t, cfg)


def test_coverage_ta_orderings(cfg):
    for t_db in (-30.0, -25.0, -20.0):
        t = db_to_linear(t_db)
        by_height = [analytic.coverage_ta(t, cfg.replace(h_a=h)) for h in (30.0, 50.0, 80.0)]
        assert by_height[0] < by_height[1] < by_height[2]
    for t_db in (-10.0, 0.0, 10.0):
        t = db_to_linear(t_db)
        by_density = [analytic.coverage_ta(t, cfg.replace(lambda_t=lam)) for lam in (5e-5, 1e-4, 2e-4)]
        assert by_density[0] > by_density[1] > by_density[2]
        by_radius = [analytic.coverage_ta(t, cfg.replace(r_a=ra, d_min=2 * ra)) for ra in (400.0, 500.0, 600.0)]
        assert by_radius[0] > by_radius[1] > by_radius[2]
        by_user_disk = [analytic.coverage_ta(t, cfg.replace(r_u=ru)) for ru in (8500.0, 9500.0, 10500.0)]
        assert max(by_user_disk) - min(by_user_disk) < 0.01

# ============================ A-S LINK ============================

def test_laplace_ia_limits(cfg):
    assert analytic.laplace_ia(0.0, cfg) == 1.0
    s = np.geomspace(1e3, 1e9, 25)
    values = analytic.laplace_ia(s, cfg)
    assert np.all(np.diff(values) <= 0) and np.all(values > 0)
    with pytest.raises(DomainError):
        analytic.laplace_ia(-1.0, cfg)


def test_laplace_ia_all_mainlobe(cfg):
    wide = cfg.replace(theta=2 * math.pi)
    s = 2e6
    t1 = s * wide.p_a * wide.d_0 ** (-wide.alpha_2) * wide.g_t_main * wide.g_r
    m1 = 1.0 / (1.0 + 0.416 * t1)
    expected = math.exp(mhcpp_density(wide.lambda_1, wide.d_min) * math.pi * wide.r_c ** 2 * (m1 - 1.0))
    assert analytic.laplace_ia(s, wide) == pytest.approx(expected, rel=1e-12)


def test_laplace_ia_matches_empirical_transform(cfg):
    # argument of the q = 1 coverage term at -20 dB
    sr = SrPower(cfg.sr)
    s = db_to_linear(-20.0) * cfg.d_0 ** cfg.alpha_2 / (cfg.p_m * cfg.g_t_main * cfg.g_r) * sr.consts.rate
    region = Disk((0.0, 0.0), cfg.r_c)
    rng = np.random.default_rng(23)
    n_real = 10_000
    counts = np.array([len(sample_mhcpp2(cfg.lambda_1, cfg.d_min, region, rng, edge_correction=True))
                       for _ in range(n_real)])
    total = int(counts.sum())
    main = rng.uniform(size=total) < cfg.theta / (2 * math.pi)
    gains = np.where(main, cfg.g_t_main, cfg.g_t_side)
    fades = sr_power_sample(sr, rng, size=total)
    owner = np.repeat(np.arange(n_real), counts)
    power = cfg.p_a * gains * cfg.g_r * fades * cfg.d_0 ** (-cfg.alpha_2)
    interference = np.bincount(owner, weights=power, minlength=n_real)
    empirical = np.exp(-s * interference).mean()
    assert analytic.laplace_ia(s, cfg) == pytest.approx(empirical, rel=0.01)


@pytest.mark.parametrize("t_db", [-30.0, -20.0, -10.0, 0.0])
def test_coverage_as_q1_collapse(t_db, cfg):
    t = db_to_linear(t_db)
    rate = SrPower(cfg.sr).consts.rate
    s = rate * t * cfg.d_0 ** cfg.alpha_2 / (cfg.p_m * cfg.g_t_main * cfg.g_r)
    assert analytic.coverage_as(t, cfg) == pytest.approx(analytic.laplace_ia(s, cfg), abs=1e-10)


def test_coverage_as_vanishing_threshold(cfg):
    assert analytic.coverage_as(db_to_linear(-60.0), cfg) > 0.999
    with pytest.raises(DomainError):
        analytic.coverage_as(-1.0, cfg)


@pytest.mark.parametrize("sr", [{"c": 0.158, "q": 2.0, "omega": 0.1},
                                {"c": 0.126, "q": 3.0, "omega": 0.835},
                                {"c": 0.158, "q": 1.5, "omega": 0.1}])
def test_coverage_as_general_shadowing_is_a_curve(sr, cfg):
    shadowed = cfg.replace(sr=sr)
    curve = analytic.coverage_curve("AS", [-30.0, -20.0, -10.0, 0.0, 10.0], shadowed)
    assert all(0.0 <= v <= 1.0 for v in curve.values)
    assert curve.is_monotone()


def test_coverage_as_orderings(cfg):
    for t_db in (-20.0, -10.0, 0.0):
        t = db_to_linear(t_db)
        by_power = [analytic.coverage_as(t, cfg.replace(p_m=p)) for p in (10.0, 100.0, 1000.0)]
        assert by_power[0] < by_power[1] < by_power[2]
        by_repulsion = [analytic.coverage_as(t, cfg.replace(d_min=d, r_a=d / 2)) for d in (800.0, 1000.0, 1200.0)]
        assert by_repulsion[0] < by_repulsion[1] < by_repulsion[2]
        by_density = [analytic.coverage_as(t, cfg.replace(lambda_1=lam)) for lam in (2.5e-7, 5e-7, 1e-6)]
        assert by_density[0] > by_density[1] > by_density[2]
        by_area = [analytic.coverage_as(t, cfg.replace(r_u=rc - cfg.r_a)) for rc in (9000.0, 10000.0, 11000.0)]
        assert by_area[0] > by_area[1] > by_area[2]
        directive = analytic.coverage_as(t, cfg.replace(g_t_main=10.0, g_t_side=0.1))
        flat = analytic.coverage_as(t, cfg.replace(g_t_main=1.0, g_t_side=1.0))
        assert directive > flat


def test_coverage_joint_is_product(cfg):
    t1, t2 = db_to_linear(-20.0), db_to_linear(-20.0)
    joint = analytic.coverage_joint(t1, t2, cfg)
    assert joint == pytest.approx(analytic.coverage_ta(t1, cfg) * analytic.coverage_as(t2, cfg), rel=1e-12)
    assert analytic.coverage_joint(db_to_linear(-80.0), t2, cfg) == pytest.approx(
        analytic.coverage_as(t2, cfg), abs=1e-4)
    assert analytic.coverage_joint(db_to_linear(40.0), db_to_linear(40.0), cfg) < 1e-3

# ============================ RATES ============================

def test_rate_as_is_the_laplace_integral_for_q1(cfg):
    rate = SrPower(cfg.sr).consts.rate
    scale = rate * cfg.d_0 ** cfg.alpha_2 / (cfg.p_m * cfg.g_t_main * cfg.g_r)
    ref, _ = integrate.quad(lambda t: analytic.laplace_ia(scale * (2.0 ** t - 1.0), cfg), 0.0, 60.0, limit=200)
    assert analytic.rate_as(cfg) == pytest.approx(ref, rel=1e-5)


def test_rate_as_layer_cake_identity(cfg):
    assert analytic.rate_as(cfg) == pytest.approx(analytic.rate_as(cfg, method="layer_cake"), rel=1e-6)


def test_rate_prefactor(cfg):
    halved = cfg.replace(k_rate=2.0)
    assert analytic.rate_as(halved) == pytest.approx(analytic.rate_as(cfg) / 2.0, rel=1e-14)


def test_rate_ta_is_positive_and_scaled(cfg):
    rate = analytic.rate_ta(cfg)
    assert rate > 0
    assert analytic.rate_ta(cfg.replace(k_rate=2.0)) == pytest.approx(rate / 2.0, rel=1e-14)


@pytest.mark.slow
def test_rate_ta_layer_cake_identity(cfg):
    assert analytic.rate_ta(cfg) == pytest.approx(analytic.rate_ta(cfg, method="layer_cake"), rel=1e-6)


def test_unknown_rate_method(cfg):
    with pytest.raises(DomainError):
        analytic.rate_as(cfg, method="riemann")


def test_alzer_eta_enters_the_threshold_scale(cfg):
    # one fading branch: Alzer is exact and eta = 1
    single = cfg.replace(n_ta=1)
    assert alzer_eta(single.n_ta) == 1.0
    assert 0.0 < analytic.coverage_ta(1.0, single) < 1.0
