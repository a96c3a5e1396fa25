"""
Spatial module for the CSATN uplink analysis toolkit
Point processes on bounded disks (BPP, PPP, Matern hard-core) and the distance laws of
terminals inside the lens where an AN coverage disk overlaps the user disk
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from . import config
from . import utils
from .errors import DomainError, ResampleBudgetError
from .schemas import ScenarioConfig

ArrayLike = Union[float, np.ndarray]

FULLY_INSIDE = "FULLY_INSIDE"
PARTIAL_CENTER_IN = "PARTIAL_CENTER_IN"
PARTIAL_CENTER_OUT = "PARTIAL_CENTER_OUT"

BPP, PPP, MHCPP1, MHCPP2 = "BPP", "PPP", "MHCPP1", "MHCPP2"

# ============================ DATA CLASSES ============================

@dataclass(frozen=True)
class Disk:
    """Closed disk with center (x, y) and radius in meters"""
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"disk radius must be > 0, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    def contains(self, points: np.ndarray, slack: float = 1e-9) -> np.ndarray:
        d = np.hypot(points[:, 0] - self.center[0], points[:, 1] - self.center[1])
        return d <= self.radius * (1.0 + slack)

    def dilate(self, by: float) -> "Disk":
        return Disk(self.center, self.radius + by)


@dataclass
class PointSet2D:
    """Finite planar point pattern with the region and process that produced it"""
    points: np.ndarray
    region: Disk
    process_tag: str
    marks: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def distances_to(self, xy: Tuple[float, float]) -> np.ndarray:
        return np.hypot(self.points[:, 0] - xy[0], self.points[:, 1] - xy[1])

    def min_pairwise_distance(self) -> float:
        if len(self) < 2:
            return math.inf
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].min())

    def to_frame(self) -> pd.DataFrame:
        marks = self.marks if self.marks is not None else np.full(len(self), np.nan)
        return pd.DataFrame({"x_m": self.points[:, 0], "y_m": self.points[:, 1], "mark": marks})

    def to_csv(self, path: str) -> str:
        self.to_frame().to_csv(utils.ensure_parent(path), index=False, float_format="%.9g")
        return path


@dataclass(frozen=True)
class DistanceLaw:
    """Distance from a uniform lens point to the AN projection, given M = m0"""
    m0: float
    r_u: float
    r_a: float
    case_tag: str
    support: Tuple[float, float]
    gamma: float = field(default=0.0)

    @property
    def kinks(self) -> Tuple[float, ...]:
        """Interior points where the density loses smoothness"""
        if self.case_tag == PARTIAL_CENTER_IN:
            k = self.r_u - self.m0
            if self.support[0] < k < self.support[1]:
                return (k,)
        return ()

    @property
    def edges(self) -> Tuple[float, ...]:
        return (self.support[0],) + self.kinks + (self.support[1],)

# ============================ POINT PROCESS SAMPLERS ============================

def _uniform_in_disk(n: int, region: Disk, rng: np.random.Generator) -> np.ndarray:
    radius = region.radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack((region.center[0] + radius * np.cos(angle),
                            region.center[1] + radius * np.sin(angle)))


def sample_bpp(n: int, region: Disk, rng: np.random.Generator) -> PointSet2D:
    """n i.i.d. uniform points on the disk"""
    if n < 0:
        raise DomainError("BPP point count must be >= 0")
    return PointSet2D(_uniform_in_disk(int(n), region, rng), region, BPP)


def sample_ppp(lam: float, region: Disk, rng: np.random.Generator) -> PointSet2D:
    """Homogeneous Poisson process of intensity lam restricted to the disk"""
    if lam < 0:
        raise DomainError("PPP intensity must be >= 0")
    n = rng.poisson(lam * region.area) if lam > 0 else 0
    return PointSet2D(_uniform_in_disk(int(n), region, rng), region, PPP)


def _close_pairs(points: np.ndarray, d_min: float) -> np.ndarray:
    if points.shape[0] < 2:
        return np.empty((0, 2), dtype=int)
    return cKDTree(points).query_pairs(d_min, output_type="ndarray")


def matern_type1_mask(points: np.ndarray, d_min: float) -> np.ndarray:
    """Keep candidates with no other candidate within d_min"""
    keep = np.ones(points.shape[0], dtype=bool)
    pairs = _close_pairs(points, d_min)
    keep[pairs[:, 0]] = False
    keep[pairs[:, 1]] = False
    return keep


def matern_type2_mask(points: np.ndarray, marks: np.ndarray, d_min: float) -> np.ndarray:
    """Keep candidates with no neighbor within d_min carrying a strictly smaller mark"""
    keep = np.ones(points.shape[0], dtype=bool)
    pairs = _close_pairs(points, d_min)
    if pairs.size:
        i, j = pairs[:, 0], pairs[:, 1]
        keep[i[marks[i] > marks[j]]] = False
        keep[j[marks[j] > marks[i]]] = False
    return keep


def _matern(lambda_1: float, d_min: float, region: Disk, rng: np.random.Generator,
            edge_correction: bool, type_two: bool) -> PointSet2D:
    if lambda_1 < 0 or not d_min > 0:
        raise DomainError("need lambda_1 >= 0 and d_min > 0")
    window = region.dilate(d_min) if edge_correction else region
    cand = sample_ppp(lambda_1, window, rng).points
    marks = rng.uniform(0.0, 1.0, cand.shape[0])
    keep = matern_type2_mask(cand, marks, d_min) if type_two else matern_type1_mask(cand, d_min)
    if edge_correction:
        keep &= region.contains(cand, slack=0.0)
    return PointSet2D(cand[keep], region, MHCPP2 if type_two else MHCPP1, marks[keep])


def sample_mhcpp2(lambda_1: float, d_min: float, region: Disk, rng: np.random.Generator,
                  edge_correction: bool = False) -> PointSet2D:
    """Type-II Matern thinning of a PPP: the smallest mark in every d_min neighborhood survives.

    With edge_correction the candidates are drawn on the region dilated by d_min and the
    survivors are restricted to the region, so boundary points face a full neighborhood.
    """
    return _matern(lambda_1, d_min, region, rng, edge_correction, type_two=True)


def sample_mhcpp1(lambda_1: float, d_min: float, region: Disk, rng: np.random.Generator,
                  edge_correction: bool = False) -> PointSet2D:
    """Type-I Matern thinning: every candidate with a neighbor within d_min is removed"""
    return _matern(lambda_1, d_min, region, rng, edge_correction, type_two=False)


def mhcpp_density(lambda_1: float, d_min: float) -> float:
    """lambda_A = (1 - exp(-pi d_min^2 lambda_1)) / (pi d_min^2)"""
    if not d_min > 0:
        raise DomainError("d_min must be > 0")
    area = math.pi * d_min ** 2
    return -math.expm1(-area * lambda_1) / area

# ============================ LENS GEOMETRY ============================

def _acos_clamped(x: ArrayLike) -> ArrayLike:
    return np.arccos(np.clip(x, -1.0, 1.0))


def _segment(theta: np.ndarray) -> np.ndarray:
    """theta - sin(2 theta)/2, with a Taylor branch where the difference cancels"""
    t = np.asarray(theta, dtype=float)
    series = t ** 3 * (2.0 / 3.0 - t ** 2 * (2.0 / 15.0 - t ** 2 * 4.0 / 315.0))
    return np.where(t < 1e-3, series, t - 0.5 * np.sin(2.0 * t))


def lens_area(m0: ArrayLike, r_u: float, r_a: ArrayLike) -> ArrayLike:
    """Overlap area of disks of radii r_u and r_a whose centers are m0 apart"""
    m0 = np.asarray(m0, dtype=float)
    r_a = np.asarray(r_a, dtype=float)
    m0, r_a = np.broadcast_arrays(m0, r_a)
    out = np.zeros(m0.shape)

    small = np.minimum(r_u, r_a)
    inside = m0 <= np.abs(r_u - r_a)
    out[inside] = np.pi * small[inside] ** 2

    part = (~inside) & (m0 < r_u + r_a) & (r_a > 0)
    if np.any(part):
        d, ra = m0[part], r_a[part]
        theta_2 = _acos_clamped((d ** 2 + r_u ** 2 - ra ** 2) / (2.0 * d * r_u))
        phi_2 = _acos_clamped((d ** 2 + ra ** 2 - r_u ** 2) / (2.0 * d * ra))
        out[part] = r_u ** 2 * _segment(theta_2) + ra ** 2 * _segment(phi_2)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def arc_half_angle(r: ArrayLike, m0: float, r_u: float) -> ArrayLike:
    """Half angle of the circle of radius r around the AN projection that lies in the user disk"""
    r = np.asarray(r, dtype=float)
    if m0 == 0:
        return np.where(r < r_u, np.pi, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_psi = (m0 ** 2 + r ** 2 - r_u ** 2) / (2.0 * m0 * r)
    cos_psi = np.where(r > 0, cos_psi, -1.0)
    return _acos_clamped(cos_psi)


def distance_law(m0: float, r_u: float, r_a: float) -> DistanceLaw:
    """Classify m0 into its geometric case; boundaries belong to the lower case"""
    if not (0.0 < m0 < r_u + r_a):
        raise DomainError(f"m0={m0:g} outside (0, r_u + r_a = {r_u + r_a:g})")
    if m0 <= r_u - r_a:
        case, support = FULLY_INSIDE, (0.0, r_a)
    elif m0 <= r_u:
        case, support = PARTIAL_CENTER_IN, (0.0, r_a)
    else:
        case, support = PARTIAL_CENTER_OUT, (m0 - r_u, r_a)
    return DistanceLaw(m0=m0, r_u=r_u, r_a=r_a, case_tag=case, support=support,
                       gamma=float(lens_area(m0, r_u, r_a)))


def distance_law_for(m0: float, cfg: ScenarioConfig) -> DistanceLaw:
    return distance_law(m0, cfg.r_u, cfg.r_a)


def distance_pdf(r: ArrayLike, law: DistanceLaw) -> ArrayLike:
    """2 r psi(r) / gamma on the support (2r / r_a^2 when the AN disk is fully inside)"""
    ra = np.asarray(r, dtype=float)
    lo, hi = law.support
    if law.case_tag == FULLY_INSIDE:
        dens = 2.0 * ra / law.r_a ** 2
    else:
        dens = 2.0 * ra * arc_half_angle(ra, law.m0, law.r_u) / law.gamma
    out = np.where((ra >= lo) & (ra <= hi), dens, 0.0)
    return float(out) if out.ndim == 0 else out


def distance_cdf(r: ArrayLike, law: DistanceLaw) -> ArrayLike:
    """Area of the lens within distance r of the AN projection, over gamma"""
    ra = np.clip(np.asarray(r, dtype=float), 0.0, law.r_a)
    if law.case_tag == FULLY_INSIDE:
        out = (ra / law.r_a) ** 2
    else:
        out = np.asarray(lens_area(law.m0, law.r_u, ra)) / law.gamma
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def projection_distance_pdf(m0: ArrayLike, r_u: float, r_a: float) -> ArrayLike:
    """f_M(m0) = 2 m0 / (r_a + r_u)^2 on (0, r_a + r_u]"""
    m = np.asarray(m0, dtype=float)
    r_c = r_a + r_u
    out = np.where((m > 0) & (m <= r_c), 2.0 * m / r_c ** 2, 0.0)
    return float(out) if out.ndim == 0 else out


def projection_distance_cdf(m0: ArrayLike, r_u: float, r_a: float) -> ArrayLike:
    m = np.clip(np.asarray(m0, dtype=float), 0.0, r_a + r_u)
    out = (m / (r_a + r_u)) ** 2
    return float(out) if out.ndim == 0 else out


def interferer_success_prob(m0: float, cfg: ScenarioConfig) -> float:
    """Probability that a uniform user-disk terminal falls in the lens of an AN at m0"""
    if not (0.0 < m0 < cfg.r_u + cfg.r_a):
        raise DomainError(f"m0={m0:g} outside (0, r_u + r_a)")
    if m0 < cfg.r_u - cfg.r_a:
        return (cfg.r_a / cfg.r_u) ** 2
    return float(lens_area(m0, cfg.r_u, cfg.r_a)) / (math.pi * cfg.r_u ** 2)

# ============================ LENS SAMPLING ============================

def _lens_polar(n: int, law: DistanceLaw, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF distance plus uniform angle within the arc; AN projection at (m0, 0)"""
    u = rng.uniform(0.0, 1.0, n)
    lo = np.full(n, law.support[0])
    hi = np.full(n, law.support[1])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = np.asarray(distance_cdf(mid, law)) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    r = 0.5 * (lo + hi)
    psi = arc_half_angle(r, law.m0, law.r_u) if law.case_tag != FULLY_INSIDE else np.full(n, np.pi)
    # direction from the AN projection towards the user-disk center is -x
    phi = np.pi + rng.uniform(-1.0, 1.0, n) * psi
    return np.column_stack((law.m0 + r * np.cos(phi), r * np.sin(phi)))


def lens_sample(n: int, law: DistanceLaw, rng: np.random.Generator,
                min_acceptance: float = 1e-3) -> np.ndarray:
    """n uniform points in the lens; user disk centered at the origin, AN projection at (m0, 0).

    Rejection from the AN coverage disk, falling back to polar inverse-CDF sampling when the
    lens is a sliver of that disk.
    """
    if n <= 0:
        return np.empty((0, 2))
    acceptance = law.gamma / (math.pi * law.r_a ** 2)
    if acceptance <= 0:
        raise DomainError(f"lens is empty at m0={law.m0:g}")
    if acceptance < min_acceptance:
        return _lens_polar(n, law, rng)

    an_disk = Disk((law.m0, 0.0), law.r_a)
    out = []
    have = 0
    for _ in range(config.RESAMPLE_BUDGET):
        batch = int(math.ceil((n - have) / acceptance * 1.25)) + 8
        pts = _uniform_in_disk(batch, an_disk, rng)
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= law.r_u]
        out.append(pts)
        have += pts.shape[0]
        if have >= n:
            return np.concatenate(out)[:n]
    raise ResampleBudgetError("lens rejection sampling", config.RESAMPLE_BUDGET)
