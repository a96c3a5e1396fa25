"""
Monte Carlo module for the CSATN uplink analysis toolkit
Realization-level simulator of the two-hop uplink: MHCPP aerial nodes, lens users,
Nakagami and shadowed-Rician fades, sectored beam gains
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import config
from . import utils
from .channel import SrPower, nakagami_power_sample, sr_power_sample
from .core_model import require_valid
from .errors import DomainError, ResampleBudgetError
from .schemas import EstimateWithCI, ScenarioConfig, SimulationSample
from .spatial import (Disk, PointSet2D, distance_law_for, interferer_success_prob, lens_sample,
                      sample_bpp, sample_mhcpp2)

LINKS = ("TA", "AS", "JOINT")

# ============================ REALIZATION ============================

@dataclass
class Realization:
    """One snapshot of the network seen from the target AN.

    User coordinates are lens-local: user disk centered at the origin, target AN
    projection at (m0, 0).
    """
    an_positions: PointSet2D
    target_index: int
    m0: float
    target_distance: float                 # r_m, target user to AN projection
    interferer_distances: np.ndarray
    fade_ta_target: float
    fade_ta_interferers: np.ndarray
    fade_as_target: float
    fade_as_interferers: np.ndarray        # one per non-target AN
    beam_gains: np.ndarray                 # transmit gain per non-target AN (G_t or g_t)

    @property
    def lens_users(self) -> int:
        return 1 + len(self.interferer_distances)

    @property
    def target_an(self) -> np.ndarray:
        return self.an_positions.points[self.target_index]


def _lens_users(cfg: ScenarioConfig, m0: float, rng: np.random.Generator, user_model: str,
                full_scenario: bool) -> Optional[np.ndarray]:
    """Distances from the lens users to the AN projection, target first; None if the lens is empty"""
    law = distance_law_for(m0, cfg)
    if full_scenario:
        users = sample_bpp(cfg.n_0, Disk((0.0, 0.0), cfg.r_u), rng)
        dist = users.distances_to((m0, 0.0))
        dist = dist[dist <= cfg.r_a]
        if dist.size == 0:
            return None
        target = rng.integers(dist.size)
        return np.concatenate(([dist[target]], np.delete(dist, target)))

    p_i = interferer_success_prob(m0, cfg)
    if user_model == "palm":
        count = 1 + rng.binomial(cfg.n_0 - 1, p_i)
    elif user_model == "conditioned":
        count = rng.binomial(cfg.n_0, p_i)
        if count == 0:
            return None
    else:
        raise DomainError(f"unknown user model {user_model!r}; expected one of {config.USER_MODELS}")
    pts = lens_sample(int(count), law, rng)
    return np.hypot(pts[:, 0] - m0, pts[:, 1])


def realize(cfg: ScenarioConfig, rng: np.random.Generator, user_model: str = "palm",
            full_scenario: bool = False, require_interferer: bool = False,
            edge_correction: bool = True) -> Realization:
    """Draw one realization, resampling until the AN set, the target lens and (optionally)
    the interferer set are nonempty"""
    region = Disk((0.0, 0.0), cfg.r_c)
    sr = SrPower(cfg.sr)
    main_prob = cfg.theta / (2.0 * math.pi)

    last_failure = "no retained AN"
    for _ in range(config.RESAMPLE_BUDGET):
        ans = sample_mhcpp2(cfg.lambda_1, cfg.d_min, region, rng, edge_correction=edge_correction)
        if len(ans) == 0:
            last_failure = "no retained AN"
            continue
        target = int(rng.integers(len(ans)))
        m0 = float(np.hypot(*ans.points[target]))
        if not (0.0 < m0 < cfg.r_u + cfg.r_a):
            last_failure = "target AN lens is empty"
            continue
        dist = _lens_users(cfg, m0, rng, user_model, full_scenario)
        if dist is None:
            last_failure = "no user in the target lens"
            continue
        if require_interferer and dist.size < 2:
            last_failure = "no interfering user in the target lens"
            continue

        n_int = dist.size - 1
        n_other = len(ans) - 1
        fades_ta = nakagami_power_sample(cfg.n_ta, rng, size=dist.size)
        fades_as = sr_power_sample(sr, rng, size=len(ans))
        mainlobe = rng.uniform(0.0, 1.0, n_other) < main_prob
        others = np.delete(np.arange(len(ans)), target)
        return Realization(
            an_positions=ans,
            target_index=target,
            m0=m0,
            target_distance=float(dist[0]),
            interferer_distances=dist[1:],
            fade_ta_target=float(fades_ta[0]),
            fade_ta_interferers=fades_ta[1:1 + n_int],
            fade_as_target=float(fades_as[target]),
            fade_as_interferers=fades_as[others],
            beam_gains=np.where(mainlobe, cfg.g_t_main, cfg.g_t_side),
        )
    raise ResampleBudgetError(last_failure, config.RESAMPLE_BUDGET)

# ============================ SINR ============================

def interference_ta(real: Realization, cfg: ScenarioConfig) -> float:
    """Aggregate received power of the interfering lens users at the target AN"""
    path = np.power(cfg.h_a ** 2 + real.interferer_distances ** 2, -0.5 * cfg.alpha_1)
    return math.fsum(cfg.p_t * real.fade_ta_interferers * path)


def interference_as(real: Realization, cfg: ScenarioConfig) -> float:
    """Aggregate power of the other ANs at the satellite, all at distance d_0"""
    return math.fsum(cfg.p_a * real.beam_gains * cfg.g_r * real.fade_as_interferers) * cfg.d_0 ** (-cfg.alpha_2)


def _ratio(signal: float, denom: float) -> float:
    return math.inf if denom <= 0.0 else signal / denom


def sinr_ta(real: Realization, cfg: ScenarioConfig) -> float:
    signal = cfg.p_t * real.fade_ta_target * (cfg.h_a ** 2 + real.target_distance ** 2) ** (-0.5 * cfg.alpha_1)
    return _ratio(signal, interference_ta(real, cfg) + cfg.noise_t)


def sinr_as(real: Realization, cfg: ScenarioConfig) -> float:
    signal = cfg.p_m * cfg.g_t_main * cfg.g_r * real.fade_as_target * cfg.d_0 ** (-cfg.alpha_2)
    return _ratio(signal, interference_as(real, cfg) + cfg.noise_a)

# ============================ RUN ENGINE ============================

def run_rng(master_seed: int, run: int) -> np.random.Generator:
    """Independent generator for one run, derived from (master_seed, run) only"""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(run,)))


def _simulate_chunk(cfg: ScenarioConfig, start: int, stop: int, master_seed: int,
                    options: Dict) -> Tuple[int, np.ndarray]:
    out = np.empty((stop - start, 4))
    for i, run in enumerate(range(start, stop)):
        real = realize(cfg, run_rng(master_seed, run), **options)
        out[i] = (sinr_ta(real, cfg), sinr_as(real, cfg), real.lens_users, real.m0)
    return start, out


def simulate_sinr(cfg: ScenarioConfig, runs: int = config.DEFAULT_RUNS, master_seed: int = config.DEFAULT_SEED,
                  workers: int = config.DEFAULT_WORKERS, user_model: str = "palm", full_scenario: bool = False,
                  require_interferer: bool = False, edge_correction: bool = True) -> SimulationSample:
    """SINR of both links for runs independent realizations.

    Runs are split into fixed chunks; each run seeds its own generator, so the result is
    the same for any worker count.
    """
    if runs < 1:
        raise DomainError("runs must be >= 1")
    require_valid(cfg)
    options = dict(user_model=user_model, full_scenario=full_scenario,
                   require_interferer=require_interferer, edge_correction=edge_correction)
    chunks = [(s, min(s + config.RUN_CHUNK, runs)) for s in range(0, runs, config.RUN_CHUNK)]
    table = np.empty((runs, 4))

    if config.VERBOSE:
        print(f"[mc] {runs} runs, seed={master_seed}, workers={workers}, model={user_model}"
              f"{' full-scenario' if full_scenario else ''}")
    if workers <= 1 or len(chunks) == 1:
        results = [_simulate_chunk(cfg, a, b, master_seed, options) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, cfg, a, b, master_seed, options) for a, b in chunks]
            results = [f.result() for f in futures]
    for start, block in results:
        table[start:start + block.shape[0]] = block

    return SimulationSample(sinr_ta=table[:, 0], sinr_as=table[:, 1], lens_users=table[:, 2].astype(int),
                            m0=table[:, 3], runs=runs, seed=master_seed, config_hash=cfg.config_hash(),
                            user_model=user_model)

# ============================ ESTIMATORS ============================

def interferer_free(sample: SimulationSample) -> np.ndarray:
    """Runs whose target lens holds no interfering user"""
    return sample.lens_users < 2


def covered_mask(sample: SimulationSample, link: str, threshold: float,
                 t_h2: Optional[float] = None, zero_term: bool = True) -> np.ndarray:
    """Runs whose SINR reaches the linear threshold; JOINT uses t_h2 for the A-S hop.

    Without the zero term an interferer-free run never counts as a covered T-A hop, so the
    estimate is P(covered and at least one interferer), the same event as the analytic sum
    from one interferer upward.
    """
    if link == "TA":
        mask = sample.sinr_ta >= threshold
    elif link == "AS":
        return sample.sinr_as >= threshold
    elif link == "JOINT":
        second = threshold if t_h2 is None else t_h2
        mask = (sample.sinr_ta >= threshold) & (sample.sinr_as >= second)
    else:
        raise DomainError(f"unknown link {link!r}; expected one of {LINKS}")
    return mask if zero_term else mask & ~interferer_free(sample)


def coverage_from_sample(sample: SimulationSample, link: str, threshold: float,
                         t_h2: Optional[float] = None, zero_term: bool = True) -> EstimateWithCI:
    if threshold < 0:
        raise DomainError("threshold must be >= 0 (linear)")
    n = sample.runs
    p = int(np.count_nonzero(covered_mask(sample, link, threshold, t_h2, zero_term))) / n
    small_n = n < 2
    half = 0.0 if small_n else config.CI_Z * math.sqrt(p * (1.0 - p) / n)
    return EstimateWithCI(estimate=p, half_width=half, runs=n, seed=sample.seed, small_n=small_n)


def estimate_coverage(link: str, threshold: float, cfg: ScenarioConfig, runs: int = config.DEFAULT_RUNS,
                      master_seed: int = config.DEFAULT_SEED, workers: int = config.DEFAULT_WORKERS,
                      t_h2: Optional[float] = None, zero_term: bool = True, **options) -> EstimateWithCI:
    """Fraction of runs whose SINR reaches the linear threshold, with a 95% CI"""
    sample = simulate_sinr(cfg, runs, master_seed, workers, **options)
    return coverage_from_sample(sample, link, threshold, t_h2, zero_term)


def rate_from_sample(sample: SimulationSample, link: str, k_rate: float,
                     zero_term: bool = True) -> EstimateWithCI:
    """Mean of log2(1 + SINR) / K.

    Infinite-SINR runs are left out and counted in `excluded`. For T-A the interferer-free
    runs are the ones left out: with the zero term the mean runs over the remaining runs
    (rate given at least one interferer); without it they contribute zero and the mean runs
    over all runs.
    """
    if link == "TA":
        sinr = sample.sinr_ta
        keep = np.isfinite(sinr) & ~interferer_free(sample)
    elif link == "AS":
        sinr = sample.sinr_as
        keep = np.isfinite(sinr)
    else:
        raise DomainError(f"rate is defined per link (TA or AS), got {link!r}")
    excluded = int(sinr.size - np.count_nonzero(keep))
    bits = np.log2(1.0 + sinr[keep]) / k_rate
    if link == "TA" and not zero_term:
        values = np.zeros(sinr.size)
        values[keep] = bits
    else:
        values = bits
    if values.size == 0:
        raise DomainError(f"all {sample.runs} runs had infinite {link} SINR; rate is undefined")
    mean = math.fsum(values) / values.size
    small_n = values.size < 2
    half = 0.0 if small_n else config.CI_Z * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    if excluded and config.VERBOSE:
        print(f"[mc] {link} rate: {excluded} interferer-free or infinite-SINR runs excluded")
    return EstimateWithCI(estimate=mean, half_width=half, runs=sample.runs, seed=sample.seed,
                          excluded=excluded, small_n=small_n)


def estimate_rate(link: str, cfg: ScenarioConfig, runs: int = config.DEFAULT_RUNS,
                  master_seed: int = config.DEFAULT_SEED, workers: int = config.DEFAULT_WORKERS,
                  zero_term: bool = True, **options) -> EstimateWithCI:
    sample = simulate_sinr(cfg, runs, master_seed, workers, **options)
    return rate_from_sample(sample, link, cfg.k_rate, zero_term)

# ============================ RAW DUMP ============================

def sinr_frame(sample: SimulationSample, t_h1: float = 1.0,
               t_h2: float = utils.db_to_linear(config.DEFAULT_TH2_DB)) -> pd.DataFrame:
    frames: List[pd.DataFrame] = []
    for link, sinr, threshold in (("TA", sample.sinr_ta, t_h1), ("AS", sample.sinr_as, t_h2)):
        frames.append(pd.DataFrame({
            "run_id": np.arange(sample.runs),
            "link": link,
            "sinr_db": utils.linear_to_db(sinr),
            "covered_flag": (sinr >= threshold).astype(int),
        }))
    return pd.concat(frames, ignore_index=True)


def dump_sinr_csv(sample: SimulationSample, path: str, t_h1: float = 1.0,
                  t_h2: float = utils.db_to_linear(config.DEFAULT_TH2_DB)) -> str:
    """Per-run SINR table: run_id, link, sinr_db, covered_flag"""
    sinr_frame(sample, t_h1, t_h2).to_csv(utils.ensure_parent(path), index=False, float_format="%.10g")
    if config.VERBOSE:
        print(f"[mc] raw SINR dump: {path}")
    return path
