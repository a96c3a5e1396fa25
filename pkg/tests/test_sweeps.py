import numpy as np
import pandas as pd
import pytest

from csatn_module import analytic
from csatn_module import config
from csatn_module import sweeps
from csatn_module.errors import DomainError, ThresholdSearchError, UnknownPresetError
from csatn_module.schemas import CompareReport, SweepSpec
from csatn_module.utils import db_to_linear

# ============================ PRESETS ============================

def test_preset_list():
    names = sweeps.list_presets()
    assert names[0] == "fig3" and names[-1] == "fig15"
    assert len(names) == 13


def test_unknown_preset():
    with pytest.raises(UnknownPresetError):
        sweeps.preset_spec("fig99")


def test_preset_shapes(cfg):
    fig3 = sweeps.preset_spec("fig3", cfg)
    assert fig3.links == ["TA"] and fig3.thresholds_db == config.DEFAULT_TH1_GRID_DB
    fig10 = sweeps.preset_spec("fig10", cfg)
    assert fig10.x_param == "p_m"
    assert fig10.x_values[0] == pytest.approx(10.0) and fig10.x_values[-1] == pytest.approx(1000.0)
    assert fig10.thresholds_db == [config.DEFAULT_TH2_DB]
    assert sweeps.preset_spec("fig14", cfg).metric == "rate"
    assert sweeps.preset_spec("fig9", cfg, runs=123).runs == 123


def test_fig9_gives_three_monotone_curves(cfg):
    frame = sweeps.run_analytic(sweeps.preset_spec("fig9", cfg))
    assert list(frame.columns) == config.CSV_COLUMNS
    assert len(frame) == 3 * len(config.DEFAULT_TH2_GRID_DB)
    curves = {v: g.sort_values("threshold_db")["value"].to_numpy() for v, g in frame.groupby("swept_value")}
    assert len(curves) == 3
    for values in curves.values():
        assert np.all(np.diff(values) <= 1e-6)
    assert set(frame["config_hash"]) == {cfg.replace(p_m=p).config_hash() for p in (10.0, 100.0, 1000.0)}
    # higher target power, higher coverage
    assert np.all(curves["10"] <= curves["100"]) and np.all(curves["100"] <= curves["1000"])


def test_fig13_analytic_ordering(cfg):
    frame = sweeps.run_analytic(sweeps.preset_spec("fig13", cfg))
    for _, g in frame.groupby("x_value"):
        by_density = g.set_index("swept_value")["value"]
        assert by_density["2.5e-07"] > by_density["5e-07"] > by_density["1e-06"]

# ============================ DETERMINISM ============================

def _small_spec(cfg, **fields):
    base = dict(swept_param="p_m", values=[10.0, 100.0], base=cfg, thresholds_db=[-20.0, -10.0], links=["AS"],
                runs=400, seed=11)
    base.update(fields)
    return SweepSpec(**base)


def test_analytic_csv_is_byte_identical(tmp_path, cfg):
    spec = _small_spec(cfg)
    a = sweeps.write_frame(sweeps.run_analytic(spec), str(tmp_path / "a.csv"))
    b = sweeps.write_frame(sweeps.run_analytic(spec), str(tmp_path / "b.csv"))
    c = sweeps.write_frame(sweeps.run_analytic(_small_spec(cfg, workers=2)), str(tmp_path / "c.csv"))
    with open(a, "rb") as fa, open(b, "rb") as fb, open(c, "rb") as fc:
        first = fa.read()
        assert first == fb.read() == fc.read()


def test_simulated_csv_is_byte_identical(tmp_path, cfg):
    a = sweeps.write_frame(sweeps.run_simulate(_small_spec(cfg)), str(tmp_path / "a.csv"))
    b = sweeps.write_frame(sweeps.run_simulate(_small_spec(cfg, workers=2)), str(tmp_path / "b.csv"))
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_rows_keep_legend_order(cfg):
    frame = sweeps.run_analytic(_small_spec(cfg, values=[1000.0, 10.0]))
    assert list(frame["swept_value"].drop_duplicates()) == ["1000", "10"]
    assert list(frame["threshold_db"][:2]) == [-20.0, -10.0]

# ============================ COMPARISON ============================

def test_compare_report_shape(cfg):
    report, combined = sweeps.run_compare(_small_spec(cfg))
    assert isinstance(report, CompareReport)
    assert len(report.rows) == 4
    assert set(combined["method"]) == {"ANALYTIC", "MONTE_CARLO"}
    for row in report.rows:
        assert row.abs_gap == pytest.approx(abs(row.signed_gap))
        assert row.inside_ci == (row.abs_gap <= row.ci_halfwidth)
    summary = report.summary()
    assert summary["rows"] == 4
    assert summary["max_gap"] == max(r.abs_gap for r in report.rows)
    assert 0.0 <= summary["fraction_inside_ci"] <= 1.0
    assert summary["zero_term_gap"] is None
    assert len(report.to_frame()) == 4


def test_compare_both_zero_term_modes(cfg):
    spec = SweepSpec(swept_param="none", values=[None], base=cfg, thresholds_db=[0.0], links=["TA"],
                     runs=300, seed=5, zero_term="both")
    report, combined = sweeps.run_compare(spec)
    assert sorted(r.zero_term for r in report.rows) == [False, True]
    assert report.zero_term_gap == pytest.approx(analytic.zero_term_gap(cfg))
    a = combined[combined["method"] == "ANALYTIC"].set_index("zero_term")["value"]
    assert a[True] - a[False] == pytest.approx(report.zero_term_gap, abs=1e-6)


def test_compare_reports_both_zero_term_modes_by_default(cfg):
    spec = SweepSpec(swept_param="none", values=[None], base=cfg, thresholds_db=[-20.0], links=["TA"],
                     runs=300, seed=5)
    assert spec.zero_term == "on"
    report, _ = sweeps.run_compare(spec)
    assert sorted(r.zero_term for r in report.rows) == [False, True]
    gaps = report.summary()["signed_gaps"]
    assert set(gaps) == {"TA/coverage/zero_term=on", "TA/coverage/zero_term=off"}
    by_mode = {r.zero_term: r.signed_gap for r in report.rows}
    assert gaps["TA/coverage/zero_term=off"] == by_mode[False]


def test_signed_gaps_of_as_compare(cfg):
    report, _ = sweeps.run_compare(_small_spec(cfg))
    gaps = report.summary()["signed_gaps"]
    assert list(gaps) == ["AS/coverage"]
    assert abs(gaps["AS/coverage"]) == report.max_gap


@pytest.mark.slow
def test_fig13_compare_keeps_the_density_ordering(cfg):
    report, combined = sweeps.run_compare(sweeps.preset_spec("fig13", cfg, runs=20_000, workers=4))
    mc = combined[combined["method"] == "MONTE_CARLO"]
    for _, g in mc.groupby("x_value"):
        by_density = g.set_index("swept_value")["value"]
        assert by_density["2.5e-07"] > by_density["5e-07"] > by_density["1e-06"]
    assert report.max_gap <= 0.03

# ============================ THRESHOLD SEARCH ============================

def test_find_threshold_inverts_coverage(cfg):
    t_half = sweeps.find_threshold("AS", 0.5, cfg)
    assert analytic.coverage_as(db_to_linear(t_half), cfg) == pytest.approx(0.5, abs=0.002)
    assert sweeps.find_threshold("AS", 0.8, cfg) < t_half


def test_find_threshold_high_reliability(cfg):
    assert sweeps.find_threshold("AS", 0.999, cfg) < -30.0


def test_find_threshold_errors(cfg):
    with pytest.raises(ThresholdSearchError):
        sweeps.find_threshold("AS", 0.999, cfg, search_range_db=(-30.0, 0.0))
    with pytest.raises(DomainError):
        sweeps.find_threshold("AS", 1.5, cfg)

# ============================ HELPERS ============================

def test_apply_param(cfg):
    wider = sweeps.apply_param(cfg, "r_c", 11000.0)
    assert wider.r_c == pytest.approx(11000.0) and wider.r_a == cfg.r_a
    gains = sweeps.apply_param(cfg, "gains", (5.0, -5.0))
    assert gains.g_t_main == pytest.approx(db_to_linear(5.0))
    assert gains.g_t_side == pytest.approx(db_to_linear(-5.0))
    ra = sweeps.apply_param(cfg, "r_a", 600.0)
    assert ra.d_min == 1200.0
    dmin = sweeps.apply_param(cfg, "d_min", 800.0)
    assert dmin.r_a == 400.0
    assert sweeps.apply_param(cfg, "threshold", 3.0) is cfg
    assert sweeps.apply_param(cfg, "h_a", 80.0).h_a == 80.0


def test_value_label():
    assert sweeps.value_label(None) == ""
    assert sweeps.value_label(100.0) == "100"
    assert sweeps.value_label(2.5e-7) == "2.5e-07"
    assert sweeps.value_label((10.0, -10.0)) == "10/-10"


def test_spec_rejects_joint_rate(cfg):
    with pytest.raises(ValueError):
        SweepSpec(swept_param="none", values=[None], base=cfg, links=["JOINT"], metric="rate")
    with pytest.raises(ValueError):
        SweepSpec(swept_param="height", values=[1.0], base=cfg)


def test_plot_script(tmp_path, cfg):
    frame = sweeps.run_analytic(_small_spec(cfg))
    csv_path = sweeps.write_frame(frame, str(tmp_path / "fig.csv"))
    script = sweeps.write_plot_script(csv_path, frame, "p_m sweep")
    with open(script, encoding="utf-8") as f:
        text = f.read()
    assert script.endswith("fig.gp")
    assert 'set title "p_m sweep"' in text
    assert text.count('"fig.csv" using') == 2
    assert 'set output "fig.png"' in text
    with pytest.raises(DomainError):
        sweeps.write_plot_script(csv_path, pd.DataFrame(columns=config.CSV_COLUMNS))
