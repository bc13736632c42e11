import os
import pytest

from app.errors import DomainError, SeriesFormatError
from app.models import SeriesPoint, ShareSeries
from app.services.calibration import fit_replicator, load_series, model_shares, score, write_series
from app.services.replicator import integrate
from tests.conftest import write_csv

# === INGESTION ===

def test_load_percent_series(fixtures_dir):
    series = load_series(os.path.join(fixtures_dir, "rmb_swift_share_synthetic.csv"))
    assert series.label == "RMB share in SWIFT global payments (synthetic)"
    assert [p.period for p in series.points] == ["2018", "2019", "2020", "2021", "2022", "2023"]
    assert series.shares()[0] == pytest.approx(0.018)
    assert series.shares()[-1] == pytest.approx(0.034)
    assert series.offsets() == [0, 1, 2, 3, 4, 5]

def test_load_quoted_reserve_share(fixtures_dir):
    series = load_series(os.path.join(fixtures_dir, "usd_reserve_share_synthetic.csv"))
    assert series.label == "USD reserve share"
    assert len(series.points) == 24
    assert series.points[-1].period == "2023"
    assert series.points[-1].share == pytest.approx(0.584)

def test_load_quarterly_fractions(fixtures_dir):
    series = load_series(os.path.join(fixtures_dir, "ruble_export_yuan_synthetic.csv"))
    assert series.shares()[0] < 0.03
    assert series.shares()[-1] > 0.30
    assert series.offsets() == list(range(9))

def test_label_defaults_to_file_stem(tmp_path):
    path = write_csv(tmp_path, "plain.csv", "period,share\n2020,0.1\n2021,0.2\n2022,0.3\n2023,0.4\n")
    assert load_series(path).label == "plain"

def test_too_few_points(tmp_path):
    path = write_csv(tmp_path, "short.csv", "period,share\n2020,0.1\n")
    with pytest.raises(SeriesFormatError, match="too few points"):
        load_series(path)

def test_malformed_row_reports_line(tmp_path):
    text = "# label: broken\nperiod,share\n2018,0.1\n2019,abc\n2020,0.2\n2021,0.3\n"
    path = write_csv(tmp_path, "broken.csv", text)
    with pytest.raises(SeriesFormatError) as info:
        load_series(path)
    assert info.value.line == 4
    assert str(info.value).startswith("line 4:")

def test_invalid_utf8_reports_line(tmp_path):
    path = tmp_path / "bytes.csv"
    path.write_bytes(b"period,share\n2018,0.1\n2019,0.\xff2\n2020,0.3\n2021,0.4\n")
    with pytest.raises(SeriesFormatError) as info:
        load_series(str(path))
    assert info.value.line == 3
    assert "UTF-8" in str(info.value)

def test_bad_header(tmp_path):
    path = write_csv(tmp_path, "header.csv", "year,value\n2020,0.1\n2021,0.2\n2022,0.3\n2023,0.4\n")
    with pytest.raises(SeriesFormatError, match="header"):
        load_series(path)

def test_share_out_of_range(tmp_path):
    path = write_csv(tmp_path, "range.csv", "period,share,unit\n2020,10,percent\n2021,120,percent\n2022,30,percent\n2023,40,percent\n")
    with pytest.raises(SeriesFormatError) as info:
        load_series(path)
    assert info.value.line == 3

def test_mixed_periods_rejected(tmp_path):
    path = write_csv(tmp_path, "mixed.csv", "period,share\n2020,0.1\n2021-Q1,0.2\n2021-Q2,0.3\n2021-Q3,0.4\n")
    with pytest.raises(SeriesFormatError, match="mix"):
        load_series(path)

def test_periods_must_increase(tmp_path):
    path = write_csv(tmp_path, "order.csv", "period,share\n2021,0.1\n2020,0.2\n2022,0.3\n2023,0.4\n")
    with pytest.raises(SeriesFormatError, match="increasing"):
        load_series(path)

def test_write_series_reloads(tmp_path, fixtures_dir):
    series = load_series(os.path.join(fixtures_dir, "rmb_swift_share_synthetic.csv"))
    text = write_series(series)
    assert text.splitlines()[0] == "period,share"
    reloaded = load_series(write_csv(tmp_path, "rmb.csv", text))
    assert reloaded.shares() == series.shares()

# === FITTING ===

def yearly_series(label, shares):
    return ShareSeries(label=label, points=[SeriesPoint(period=str(2000 + i), share=s) for i, s in enumerate(shares)])

def test_round_trip_recovers_parameters(replicator_ref):
    truth = replicator_ref
    path = integrate(0.45, truth, t_end=29.0, dt=0.01).shares
    series = yearly_series("self-generated", [path[100 * i] for i in range(30)])
    assert score(series, truth) == 0.0

    start = truth.model_copy(update={"alpha_net": 0.3})
    bounds = {"alpha_net": (0.05, 0.36), "gamma": (1.5, 3.05)}
    result = fit_replicator(series, {"gamma", "alpha_net"}, bounds, start)
    assert result.sse < 1e-6
    assert abs(result.fitted["gamma"] - 2.0) / 2.0 < 0.1
    assert result.fitted["alpha_net"] == pytest.approx(0.2, abs=0.02)
    assert result.grid_trace == 3 * 2 * 32
    assert len(result.pass_sse) == 3
    assert all(b <= a for a, b in zip(result.pass_sse, result.pass_sse[1:]))
    assert result.fitted_path.label == "self-generated (fitted)"
    assert len(result.fitted_path.points) == 30

def test_constant_series_fits_an_equilibrium(replicator_ref):
    series = yearly_series("flat", [0.4140625] * 4)
    start = replicator_ref.model_copy(update={"alpha_net": 0.3})
    result = fit_replicator(series, {"alpha_net"}, {"alpha_net": (0.05, 0.36)}, start)
    assert result.sse < 1e-12
    assert result.fitted["alpha_net"] == pytest.approx(0.2, abs=1e-9)
    for point in result.fitted_path.points:
        assert point.share == pytest.approx(0.4140625, abs=1e-6)

def test_no_free_parameters_only_scores(fixtures_dir, replicator_ref):
    series = load_series(os.path.join(fixtures_dir, "rmb_swift_share_synthetic.csv"))
    result = fit_replicator(series, set(), {}, replicator_ref)
    assert result.grid_trace == 0
    assert result.fitted == {}
    assert result.pass_sse == []
    assert result.sse == score(series, replicator_ref)
    assert [p.share for p in result.fitted_path.points] == model_shares(series, replicator_ref)

def test_free_parameter_checks(fixtures_dir, replicator_ref):
    series = load_series(os.path.join(fixtures_dir, "rmb_swift_share_synthetic.csv"))
    with pytest.raises(DomainError, match="cannot be fitted"):
        fit_replicator(series, {"k"}, {"k": (0.5, 1.0)}, replicator_ref)
    with pytest.raises(DomainError, match="no bounds"):
        fit_replicator(series, {"gamma"}, {}, replicator_ref)
    with pytest.raises(DomainError, match="valid range"):
        fit_replicator(series, {"gamma"}, {"gamma": (0.5, 2.0)}, replicator_ref)
    with pytest.raises(DomainError, match="lo < hi"):
        fit_replicator(series, {"gamma"}, {"gamma": (2.0, 2.0)}, replicator_ref)
