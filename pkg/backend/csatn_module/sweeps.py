"""
Sweep module for the CSATN uplink analysis toolkit
Figure presets, analytic/simulated sweeps, analytic-vs-simulation comparison reports,
inverse threshold search and gnuplot script emission
"""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from . import analytic
from . import config
from . import montecarlo
from . import utils
from .errors import DomainError, ThresholdSearchError, UnknownPresetError
from .schemas import CompareReport, CompareRow, ScenarioConfig, SweepSpec

KEY_COLUMNS = ["swept_value", "x_value", "link", "threshold_db", "metric", "zero_term"]

# ============================ PRESETS ============================

def list_presets() -> List[str]:
    return sorted(config.SWEEP_PRESETS, key=lambda n: int(n[3:]))


def preset_spec(name: str, base: Optional[ScenarioConfig] = None, **overrides) -> SweepSpec:
    """SweepSpec for a built-in figure preset; overrides replace spec fields"""
    if name not in config.SWEEP_PRESETS:
        raise UnknownPresetError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    p = config.SWEEP_PRESETS[name]
    if p["x"] == "threshold":
        x_values: List[float] = []
        grid = config.DEFAULT_TH1_GRID_DB if p["links"] == ["TA"] else config.DEFAULT_TH2_GRID_DB
    else:
        if "x_values_dbw" in p:
            x_values = [utils.db_to_linear(v) for v in p["x_values_dbw"]]
        else:
            x_values = list(p["x_values"])
        grid = [0.0] if p["links"] == ["TA"] else [config.DEFAULT_TH2_DB]
    fields: Dict[str, Any] = dict(
        swept_param=p["swept"], values=list(p["values"]), base=base or ScenarioConfig(),
        thresholds_db=list(grid), links=list(p["links"]), metric=p["metric"], x_param=p["x"],
        x_values=x_values, preset=name,
    )
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if p.get("placeholder") and config.VERBOSE:
        print(f"[sweep] preset {name}: legend values for {p['swept']} are placeholders")
    return SweepSpec(**fields)

# ============================ GRID EXPANSION ============================

def value_label(value: Any) -> str:
    """Canonical text of a swept value, as written to the swept_value column"""
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return "/".join(f"{float(v):.12g}" for v in value)
    return f"{float(value):.12g}"


def apply_param(cfg: ScenarioConfig, param: str, value: Any) -> ScenarioConfig:
    """Scenario with one swept parameter set.

    r_c moves r_u; gains takes a (G_t, g_t) pair in dB; r_a and d_min move together so
    the association radius stays half the repulsion distance.
    """
    if param in ("threshold", "none"):
        return cfg
    if param == "r_c":
        return cfg.replace(r_u=float(value) - cfg.r_a)
    if param == "gains":
        main_db, side_db = value
        return cfg.replace(g_t_main=utils.db_to_linear(main_db), g_t_side=utils.db_to_linear(side_db))
    if param == "r_a":
        return cfg.replace(r_a=float(value), d_min=2.0 * float(value))
    if param == "d_min":
        return cfg.replace(d_min=float(value), r_a=0.5 * float(value))
    return cfg.replace(**{param: value})


def _points(spec: SweepSpec) -> List[Tuple[Any, Optional[float], ScenarioConfig]]:
    out = []
    for v in spec.values:
        cfg_v = apply_param(spec.base, spec.swept_param, v)
        for x in (spec.x_values if spec.x_param != "threshold" else [None]):
            cfg_x = cfg_v if x is None else apply_param(cfg_v, spec.x_param, x)
            out.append((v, x, cfg_x))
    return out


def _zero_modes(spec: SweepSpec, link: str) -> List[Optional[bool]]:
    if link == "AS":
        return [None]
    return {"on": [True], "off": [False], "both": [True, False]}[spec.zero_term]


def _thresholds(spec: SweepSpec) -> List[Optional[float]]:
    return list(spec.thresholds_db) if spec.metric == "coverage" else [None]


def _row(spec: SweepSpec, v: Any, x: Optional[float], cfg: ScenarioConfig, link: str,
         t_db: Optional[float], method: str, value: float, ci: Optional[float],
         runs: Optional[int], seed: Optional[int], zero: Optional[bool]) -> Dict[str, Any]:
    return {
        "swept_value": value_label(v), "threshold_db": t_db, "link": link, "method": method,
        "value": value, "ci_halfwidth": ci, "runs": runs, "seed": seed,
        "config_hash": cfg.config_hash(), "metric": spec.metric, "swept_param": spec.swept_param,
        "x_param": spec.x_param, "x_value": x, "zero_term": zero,
    }


def _sorted_frame(rows: List[Dict[str, Any]], spec: SweepSpec) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=config.CSV_COLUMNS)
    order = {value_label(v): i for i, v in enumerate(spec.values)}
    frame["_order"] = frame["swept_value"].map(order)
    frame["_zero"] = frame["zero_term"].map({True: 0, False: 1}).fillna(-1)
    frame = frame.sort_values(["_order", "x_value", "link", "threshold_db", "method", "_zero"],
                              kind="mergesort", na_position="first")
    return frame.drop(columns=["_order", "_zero"]).reset_index(drop=True)


def write_frame(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(utils.ensure_parent(path), index=False, float_format="%.12g")
    return path

# ============================ ANALYTIC SWEEPS ============================

def _analytic_value(cfg: ScenarioConfig, link: str, metric: str, t_db: Optional[float],
                    zero: Optional[bool]) -> float:
    include = True if zero is None else zero
    if metric == "rate":
        return analytic.rate_ta(cfg, include) if link == "TA" else analytic.rate_as(cfg)
    t_lin = utils.db_to_linear(t_db)
    if link == "TA":
        return analytic.coverage_ta(t_lin, cfg, include)
    if link == "AS":
        return analytic.coverage_as(t_lin, cfg)
    return analytic.coverage_joint(t_lin, utils.db_to_linear(config.DEFAULT_TH2_DB), cfg, include)


def _analytic_task(args) -> float:
    return _analytic_value(*args)


def run_analytic(spec: SweepSpec) -> pd.DataFrame:
    """Analytic values at every sweep point, sorted deterministically"""
    tasks, meta = [], []
    for v, x, cfg in _points(spec):
        for link in spec.links:
            for t_db in _thresholds(spec):
                for zero in _zero_modes(spec, link):
                    tasks.append((cfg, link, spec.metric, t_db, zero))
                    meta.append((v, x, cfg, link, t_db, zero))
    if config.VERBOSE:
        print(f"[sweep] analytic: {len(tasks)} points ({spec.swept_param} x {spec.x_param})")
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            values = list(pool.map(_analytic_task, tasks))
    else:
        values = [_analytic_task(t) for t in tasks]

    rows = [_row(spec, v, x, cfg, link, t_db, "ANALYTIC", val, None, None, None, zero)
            for (v, x, cfg, link, t_db, zero), val in zip(meta, values)]
    return _sorted_frame(rows, spec)

# ============================ SIMULATED SWEEPS ============================

def run_simulate(spec: SweepSpec) -> pd.DataFrame:
    """Monte Carlo estimates at every sweep point; one SINR stream per scenario serves both
    zero-term modes"""
    rows = []
    t_h2 = utils.db_to_linear(config.DEFAULT_TH2_DB)
    for v, x, cfg in _points(spec):
        sample = montecarlo.simulate_sinr(cfg, spec.runs, spec.seed, spec.workers)
        for link in spec.links:
            for zero in _zero_modes(spec, link):
                include = zero is not False
                for t_db in _thresholds(spec):
                    if spec.metric == "rate":
                        est = montecarlo.rate_from_sample(sample, link, cfg.k_rate, include)
                    else:
                        est = montecarlo.coverage_from_sample(sample, link, utils.db_to_linear(t_db), t_h2,
                                                              include)
                    rows.append(_row(spec, v, x, cfg, link, t_db, "MONTE_CARLO", est.estimate,
                                     est.half_width, est.runs, est.seed, zero))
    return _sorted_frame(rows, spec)

# ============================ COMPARISON ============================

def compare_frames(analytic_frame: pd.DataFrame, mc_frame: pd.DataFrame) -> List[CompareRow]:
    keys = KEY_COLUMNS

    def keyed(frame: pd.DataFrame) -> Dict[Tuple, pd.Series]:
        return {tuple(None if pd.isna(r[k]) else r[k] for k in keys): r for _, r in frame.iterrows()}

    mc_rows = keyed(mc_frame)
    out = []
    for key, a in keyed(analytic_frame).items():
        m = mc_rows.get(key)
        if m is None:
            continue
        signed = float(a["value"]) - float(m["value"])
        hw = float(m["ci_halfwidth"])
        out.append(CompareRow(
            swept_value=a["swept_value"], x_value=key[1], threshold_db=key[3], link=a["link"],
            metric=a["metric"], zero_term=key[5], analytic=float(a["value"]), mc_estimate=float(m["value"]),
            ci_halfwidth=hw, abs_gap=abs(signed), signed_gap=signed, inside_ci=abs(signed) <= hw,
        ))
    return out


def run_compare(spec: SweepSpec) -> Tuple[CompareReport, pd.DataFrame]:
    """Analytic and Monte Carlo values side by side, plus the gap report.

    T-A rows are always reported in both zero-term modes, whatever spec.zero_term says.
    """
    gap = None
    if any(link != "AS" for link in spec.links):
        spec = spec.model_copy(update={"zero_term": "both"})
        gap = analytic.zero_term_gap(spec.base)
    a_frame = run_analytic(spec)
    m_frame = run_simulate(spec)
    report = CompareReport(rows=compare_frames(a_frame, m_frame), config_hash=spec.base.config_hash(),
                           zero_term_gap=gap)
    combined = _sorted_frame(a_frame.to_dict("records") + m_frame.to_dict("records"), spec)
    if config.VERBOSE:
        s = report.summary()
        print(f"[sweep] compare: rows={s['rows']} max_gap={s['max_gap']:.4g} "
              f"inside_ci={s['fraction_inside_ci']:.3f} zero_term_gap={gap}")
    return report, combined

# ============================ THRESHOLD SEARCH ============================

def _coverage_at_db(link: str, t_db: float, cfg: ScenarioConfig, include_zero_term: bool) -> float:
    return _analytic_value(cfg, link, "coverage", t_db, include_zero_term if link != "AS" else None)


def find_threshold(link: str, target_coverage: float, cfg: ScenarioConfig, include_zero_term: bool = True,
                   search_range_db: Tuple[float, float] = config.THRESHOLD_SEARCH_RANGE_DB,
                   tol_db: float = config.THRESHOLD_SEARCH_TOL_DB) -> float:
    """Threshold (dB) at which the analytic coverage equals target_coverage, by bisection"""
    if not 0.0 < target_coverage < 1.0:
        raise DomainError("target coverage must lie in (0, 1)")
    lo, hi = search_range_db
    f_lo = _coverage_at_db(link, lo, cfg, include_zero_term) - target_coverage
    f_hi = _coverage_at_db(link, hi, cfg, include_zero_term) - target_coverage
    if f_lo < 0 or f_hi > 0:
        raise ThresholdSearchError(
            f"{link} coverage {target_coverage} not bracketed on [{lo:g}, {hi:g}] dB "
            f"(coverage {f_lo + target_coverage:.6g} .. {f_hi + target_coverage:.6g})")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if _coverage_at_db(link, mid, cfg, include_zero_term) >= target_coverage:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

# ============================ PLOT SCRIPTS ============================

_COL = {name: i + 1 for i, name in enumerate(config.CSV_COLUMNS)}


def write_plot_script(csv_path: str, frame: pd.DataFrame, title: str = "") -> str:
    """gnuplot script plotting every (swept value, link, method, zero-term) curve of a sweep CSV"""
    if frame.empty:
        raise DomainError("nothing to plot")
    x_param = frame["x_param"].iloc[0]
    metric = frame["metric"].iloc[0]
    x_col = _COL["threshold_db"] if x_param == "threshold" else _COL["x_value"]
    x_label = "SINR threshold (dB)" if x_param == "threshold" else x_param
    y_label = "coverage probability" if metric == "coverage" else "average rate (bit/s/Hz)"

    clauses = []
    groups = frame[["swept_value", "link", "method", "zero_term"]].drop_duplicates()
    for _, g in groups.iterrows():
        zero = "" if pd.isna(g["zero_term"]) else str(bool(g["zero_term"]))
        cond = (f'strcol({_COL["swept_value"]}) eq "{g["swept_value"]}" && strcol({_COL["link"]}) eq "{g["link"]}"'
                f' && strcol({_COL["method"]}) eq "{g["method"]}" && strcol({_COL["zero_term"]}) eq "{zero}"')
        style = "lines" if g["method"] == "ANALYTIC" else "points pt 6"
        label = f'{frame["swept_param"].iloc[0]}={g["swept_value"]} {g["link"]} {g["method"].lower()}'
        if zero:
            label += f" zero_term={zero}"
        clauses.append(f'"{os.path.basename(csv_path)}" using (({cond}) ? ${x_col} : NaN):{_COL["value"]} '
                       f'with {style} title "{label}"')

    script_path = os.path.splitext(csv_path)[0] + ".gp"
    lines = [
        "set datafile separator ','",
        "set key outside right",
        f'set title "{title or os.path.basename(csv_path)}"',
        f'set xlabel "{x_label}"',
        f'set ylabel "{y_label}"',
        "set grid",
        "set terminal pngcairo size 1000,650",
        f'set output "{os.path.splitext(os.path.basename(csv_path))[0]}.png"',
        "plot " + ", \\\n     ".join(clauses),
    ]
    with open(utils.ensure_parent(script_path), "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return script_path
