import math

import numpy as np
import pytest

from jcsc_sim.phy.sweeps import qpsk_ber_theory
from jcsc_sim.series import SeriesRow, TrialSeries, from_csv, mean_ci, rmse_ci, summarize, to_csv


def test_identical_series_zero_improvement():
    s = summarize(([10, 20, 30], [5.0, 6.0, 7.0]), ([10, 20, 30], [5.0, 6.0, 7.0]))
    assert all(p.improvement_pct == 0.0 for p in s.points)


def test_nd_headline_reduction():
    s = summarize(([30], [100.0]), ([30], [68.3]))
    assert s.points[0].improvement_pct == pytest.approx(31.7)
    assert "31.7%" in s.report()


def test_shifted_ber_curves_gain():
    # synthetic oracle: the same curve shifted by exactly 30.1 dB, sampled on 2 dB grids
    snr_plain = np.arange(0.0, 14.1, 2.0)
    snr_cd = np.arange(-30.0, -15.9, 2.0)
    ber_plain = qpsk_ber_theory(snr_plain)
    ber_cd = qpsk_ber_theory(snr_cd + 30.1)
    s = summarize((snr_plain, ber_plain), (snr_cd, ber_cd), target=1e-3)
    assert s.gain_db == pytest.approx(30.1, abs=0.2)


def test_axis_mismatch_raises():
    with pytest.raises(ValueError, match="axis mismatch"):
        summarize(([1, 2], [1.0, 2.0]), ([1, 3], [1.0, 2.0]))


def test_mean_ci_single_sample_is_nan():
    m, h = mean_ci([4.0])
    assert m == 4.0 and math.isnan(h)
    m, h = mean_ci([1.0, 3.0])
    assert m == 2.0 and h > 0


def test_rmse_ci():
    r, h = rmse_ci([3.0, -3.0, 3.0, -3.0])
    assert r == 3.0 and h == 0.0


def test_row_validation():
    with pytest.raises(ValueError):
        SeriesRow(1, "a", "m", 1.0, -0.1, 2)
    with pytest.raises(ValueError):
        SeriesRow(1, "a", "m", 1.0, 0.1, 2, flag="weird")


@pytest.mark.parametrize("experiment,metric", [("ber", "ber"), ("rmse", "range_rmse"), ("nd", "mean_slots"),
                                               ("mac", "mean_delay_slots")])
def test_csv_round_trip(experiment, metric):
    rows = [SeriesRow(2, "b", metric, 0.5, 0.01, 10), SeriesRow(1, "b", metric, 0.25, math.nan, 1),
            SeriesRow(1, "a", metric, 1 / 3, 0.0, 10)]
    if experiment == "nd":
        for r in rows:
            r.extra = 0.0
    s = TrialSeries(experiment, rows)
    text = to_csv(s, "hello\nworld")
    assert text.startswith("# hello\n# world\n")
    assert ",na," in text
    back = from_csv(text)
    assert back.experiment == experiment
    assert [(r.axis, r.variant) for r in back.rows] == [(1, "a"), (1, "b"), (2, "b")]
    assert back.rows[0].mean == 1 / 3
