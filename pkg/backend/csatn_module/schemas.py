"""
Pydantic schemas for the CSATN uplink analysis toolkit
Defines the configuration, estimate and report models used across the system
"""

import json
import math
import warnings
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import config
from . import utils
from .errors import ConfigError

# ============================ SCENARIO SCHEMAS ============================

class SrParams(BaseModel):
    """Shadowed-Rician channel description: c (half multipath power), q (shadowing), omega (LOS power)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    c: float = config.DEFAULT_SCENARIO["sr"]["c"]
    q: float = config.DEFAULT_SCENARIO["sr"]["q"]
    omega: float = config.DEFAULT_SCENARIO["sr"]["omega"]

    @field_validator("c", "q", "omega", mode="before")
    @classmethod
    def parse_units(cls, v):
        return utils.parse_quantity(v)


class Violation(BaseModel):
    """One failed configuration rule"""
    field: str
    rule: str
    severity: Literal["error", "warning"] = "error"


class ScenarioConfig(BaseModel):
    """All physical, geometric and fading parameters of one scenario (SI units, linear gains)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    h_a: float = config.DEFAULT_SCENARIO["h_a"]
    d_0: float = config.DEFAULT_SCENARIO["d_0"]
    r_u: float = config.DEFAULT_SCENARIO["r_u"]
    r_a: float = config.DEFAULT_SCENARIO["r_a"]
    d_min: float = config.DEFAULT_SCENARIO["d_min"]
    p_t: float = config.DEFAULT_SCENARIO["p_t"]
    p_a: float = config.DEFAULT_SCENARIO["p_a"]
    p_m: float = config.DEFAULT_SCENARIO["p_m"]
    g_t_main: float = config.DEFAULT_SCENARIO["g_t_main"]
    g_t_side: float = config.DEFAULT_SCENARIO["g_t_side"]
    g_r: float = config.DEFAULT_SCENARIO["g_r"]
    theta: float = config.DEFAULT_SCENARIO["theta"]
    lambda_t: float = config.DEFAULT_SCENARIO["lambda_t"]
    lambda_1: float = config.DEFAULT_SCENARIO["lambda_1"]
    n_ta: int = config.DEFAULT_SCENARIO["n_ta"]
    sr: SrParams = Field(default_factory=SrParams)
    alpha_1: float = config.DEFAULT_SCENARIO["alpha_1"]
    alpha_2: float = config.DEFAULT_SCENARIO["alpha_2"]
    k_rate: float = config.DEFAULT_SCENARIO["k_rate"]
    noise_t: float = config.DEFAULT_SCENARIO["noise_t"]
    noise_a: float = config.DEFAULT_SCENARIO["noise_a"]

    @field_validator("h_a", "d_0", "r_u", "r_a", "d_min", "p_t", "p_a", "p_m", "g_t_main", "g_t_side",
                     "g_r", "theta", "lambda_t", "lambda_1", "alpha_1", "alpha_2", "k_rate",
                     "noise_t", "noise_a", mode="before")
    @classmethod
    def parse_units(cls, v):
        return utils.parse_quantity(v)

    @model_validator(mode="after")
    def warn_association_override(self):
        # the association policy ties the AN coverage radius to the repulsion distance
        if self.d_min > 0 and not math.isclose(self.r_a, self.d_min / 2.0, rel_tol=config.ASSOCIATION_RTOL):
            msg = f"r_a={self.r_a:g} m overrides the association constraint r_a = d_min/2 = {self.d_min / 2.0:g} m"
            warnings.warn(msg, UserWarning, stacklevel=2)
        return self

    # ---- derived quantities ----

    @property
    def r_c(self) -> float:
        """Radius of the AN deployment disk, R_A + R_U"""
        return self.r_a + self.r_u

    @property
    def n_0(self) -> int:
        """Number of terrestrial nodes in the user disk"""
        return int(round(self.lambda_t * math.pi * self.r_u ** 2))

    def replace(self, **changes) -> "ScenarioConfig":
        """Validated copy with some fields changed"""
        data = self.model_dump()
        if "sr" in changes and isinstance(changes["sr"], SrParams):
            changes = dict(changes, sr=changes["sr"].model_dump())
        data.update(changes)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if math.isclose(data["r_a"], self.r_a) and
                                  math.isclose(data["d_min"], self.d_min) else "default", UserWarning)
            return ScenarioConfig.model_validate(data)

    def config_hash(self) -> str:
        """Stable fingerprint of the full configuration"""
        return utils.stable_hash(self.model_dump())

    @classmethod
    def from_mapping(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """Build from a key/value mapping; unknown keys and bad values raise ConfigError.

        Unit-parsing failures surface through pydantic as per-field errors.
        """
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            violations = [Violation(field=".".join(str(p) for p in err["loc"]) or "<root>", rule=err["msg"])
                          for err in e.errors()]
            raise ConfigError(violations) from e

    @classmethod
    def from_file(cls, path: str) -> "ScenarioConfig":
        """Read a JSON configuration file"""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise ConfigError([Violation(field="<root>", rule="configuration must be a JSON object")])
        return cls.from_mapping(data)


class QuadratureSpec(BaseModel):
    """Tolerances shared by all nested integrals"""
    model_config = ConfigDict(frozen=True)

    abs_tol: float = config.QUAD_ABS_TOL
    rel_tol: float = config.QUAD_REL_TOL
    max_depth: int = config.QUAD_LIMIT
    gauss_order: int = config.GAUSS_ORDER

    @field_validator("abs_tol", "rel_tol")
    @classmethod
    def positive_tol(cls, v):
        if not v > 0:
            raise ValueError("tolerances must be > 0")
        return v

    @field_validator("max_depth", "gauss_order")
    @classmethod
    def positive_count(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

# ============================ ESTIMATE & CURVE SCHEMAS ============================

class EstimateWithCI(BaseModel):
    """Monte Carlo estimate with a 95% normal-approximation confidence interval"""
    estimate: float
    half_width: float
    runs: int
    seed: int
    excluded: int = 0           # runs left out of a rate average (infinite SINR)
    small_n: bool = False       # half-width is degenerate

    @property
    def low(self) -> float:
        return self.estimate - self.half_width

    @property
    def high(self) -> float:
        return self.estimate + self.half_width


class CoverageCurve(BaseModel):
    """Coverage values over a threshold grid for one link and method"""
    link: Literal["TA", "AS", "JOINT"]
    thresholds_db: List[float]
    values: List[float]
    method: Literal["ANALYTIC", "MONTE_CARLO"]
    config_hash: str
    zero_term: Optional[bool] = None

    @model_validator(mode="after")
    def check_values(self):
        if len(self.values) != len(self.thresholds_db):
            raise ValueError("thresholds and values differ in length")
        if any(v < 0.0 or v > 1.0 for v in self.values):
            raise ValueError("coverage values must lie in [0, 1]")
        return self

    def is_monotone(self, slack: float = config.CLAMP_SLACK) -> bool:
        """Nonincreasing in threshold (grid-wise, after sorting by threshold)"""
        pairs = sorted(zip(self.thresholds_db, self.values))
        return all(b[1] <= a[1] + slack for a, b in zip(pairs, pairs[1:]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "threshold_db": self.thresholds_db,
            "value": self.values,
            "method": self.method,
            "config_hash": self.config_hash,
        })

    def to_csv(self, path: str) -> str:
        self.to_frame().to_csv(utils.ensure_parent(path), index=False, float_format="%.12g")
        return path

# ============================ SWEEP & REPORT SCHEMAS ============================

class SweepSpec(BaseModel):
    """One parameter sweep: legend parameter values x threshold (or x-parameter) grid"""
    swept_param: str
    values: List[Any]
    base: ScenarioConfig = Field(default_factory=ScenarioConfig)
    thresholds_db: List[float] = Field(default_factory=lambda: list(config.DEFAULT_TH2_GRID_DB))
    links: List[Literal["TA", "AS", "JOINT"]] = Field(default_factory=lambda: ["AS"])
    metric: Literal["coverage", "rate"] = "coverage"
    x_param: str = "threshold"
    x_values: List[float] = Field(default_factory=list)
    runs: int = config.DEFAULT_RUNS
    seed: int = config.DEFAULT_SEED
    workers: int = config.DEFAULT_WORKERS
    zero_term: Literal["on", "off", "both"] = "on"
    output: str = ""
    preset: Optional[str] = None

    @field_validator("swept_param", "x_param")
    @classmethod
    def recognized_param(cls, v, info):
        allowed = set(ScenarioConfig.model_fields) | set(config.DERIVED_SWEEP_PARAMS)
        allowed.add("threshold" if info.field_name == "x_param" else "none")
        if v not in allowed:
            raise ValueError(f"{v!r} is not a recognized scenario parameter")
        return v

    @field_validator("values", "links")
    @classmethod
    def non_empty(cls, v):
        if not v:
            raise ValueError("grid cannot be empty")
        return v

    @field_validator("runs")
    @classmethod
    def positive_runs(cls, v):
        if v < 1:
            raise ValueError("runs must be >= 1")
        return v

    @model_validator(mode="after")
    def check_grids(self):
        if self.x_param == "threshold" and self.metric == "coverage" and not self.thresholds_db:
            raise ValueError("threshold grid cannot be empty")
        if self.x_param != "threshold" and not self.x_values:
            raise ValueError(f"x grid for {self.x_param!r} cannot be empty")
        if self.metric == "rate" and "JOINT" in self.links:
            raise ValueError("rates are defined per link (TA or AS)")
        return self


class CompareRow(BaseModel):
    """Analytic value against a Monte Carlo estimate at one grid point"""
    swept_value: Any
    x_value: Optional[float] = None
    threshold_db: Optional[float] = None
    link: str
    metric: str = "coverage"
    zero_term: Optional[bool] = None
    analytic: float
    mc_estimate: float
    ci_halfwidth: float
    abs_gap: float
    signed_gap: float
    inside_ci: bool


class CompareReport(BaseModel):
    """Gap table plus summary; the summary is always recomputed from rows"""
    rows: List[CompareRow] = Field(default_factory=list)
    config_hash: str = ""
    zero_term_gap: Optional[float] = None

    @property
    def max_gap(self) -> float:
        return max((r.abs_gap for r in self.rows), default=0.0)

    @property
    def fraction_inside(self) -> float:
        if not self.rows:
            return 0.0
        return sum(1 for r in self.rows if r.inside_ci) / len(self.rows)

    def signed_gaps(self) -> Dict[str, float]:
        """Largest-magnitude analytic minus MC gap per link, metric and zero-term mode"""
        out: Dict[str, float] = {}
        for r in self.rows:
            key = f"{r.link}/{r.metric}"
            if r.zero_term is not None:
                key += "/zero_term=" + ("on" if r.zero_term else "off")
            if key not in out or abs(r.signed_gap) > abs(out[key]):
                out[key] = r.signed_gap
        return out

    def summary(self) -> Dict[str, Any]:
        return {
            "rows": len(self.rows),
            "max_gap": self.max_gap,
            "fraction_inside_ci": self.fraction_inside,
            "signed_gaps": self.signed_gaps(),
            "zero_term_gap": self.zero_term_gap,
            "config_hash": self.config_hash,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.rows])

# ============================ SIMULATION SCHEMAS ============================

class SimulationSample(BaseModel):
    """Per-run SINRs of both links, indexed by run id"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sinr_ta: np.ndarray
    sinr_as: np.ndarray
    lens_users: np.ndarray      # users in the target lens, target included
    m0: np.ndarray
    runs: int
    seed: int
    config_hash: str
    user_model: str = "palm"

    @model_validator(mode="after")
    def check_lengths(self):
        for name in ("sinr_ta", "sinr_as", "lens_users", "m0"):
            if len(getattr(self, name)) != self.runs:
                raise ValueError(f"{name} has {len(getattr(self, name))} entries for {self.runs} runs")
        return self
