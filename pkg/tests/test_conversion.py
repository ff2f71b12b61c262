import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmixer.conversion import (
    DB_FLOOR,
    ModeLinewidths,
    PumpSetting,
    bandwidth_metrics,
    conversion_sparams,
    default_grid,
    pump_sweep,
    threshold_span,
)
from jmixer.errors import DomainError
from jmixer.sweep import SweepResult

from oracles import cmt_conversion, lorentzian_crossings

FIG = ModeLinewidths.from_hz(7e9, 10e9, 400e6, 900e6)


def test_linewidth_validation():
    with pytest.raises(DomainError):
        ModeLinewidths.from_hz(7e9, 7e9, 1e8, 1e8)
    with pytest.raises(DomainError):
        ModeLinewidths.from_hz(7e9, 10e9, -1e8, 1e8)
    with pytest.raises(DomainError):
        PumpSetting(-0.1)


def test_unitarity_grid():
    f = FIG.f_a + np.linspace(-3e9, 3e9, 100)
    for rho in np.linspace(0, 5, 100):
        S = conversion_sparams(FIG, PumpSetting(rho, 0.3), f)
        np.testing.assert_allclose(np.abs(S["S_aa"]) ** 2 + np.abs(S["S_ba"]) ** 2, 1, atol=1e-12)
        np.testing.assert_allclose(np.abs(S["S_bb"]) ** 2 + np.abs(S["S_ab"]) ** 2, 1, atol=1e-12)


@given(rho=st.floats(0, 20), phase=st.floats(-np.pi, np.pi), det=st.floats(-5e9, 5e9))
def test_reciprocity_magnitude(rho, phase, det):
    S = conversion_sparams(FIG, PumpSetting(rho, phase), [FIG.f_a + det])
    # equal up to the rounding of the pump phase factor
    assert abs(S["S_ab"][0]) == pytest.approx(abs(S["S_ba"][0]), rel=1e-15, abs=1e-300)
    assert abs(S["S_aa"][0]) ** 2 + abs(S["S_ba"][0]) ** 2 == pytest.approx(1, abs=1e-12)


def test_matched_pump_nulls_reflection():
    S = conversion_sparams(FIG, PumpSetting(1.0), [FIG.f_a])
    assert abs(S["S_aa"][0]) < 1e-15
    assert abs(S["S_ab"][0]) == pytest.approx(1, abs=1e-15)


def test_no_pump_is_identity():
    # total reflection; the phase is that of the bare resonator
    f = np.linspace(6e9, 8e9, 11)
    S = conversion_sparams(FIG, PumpSetting(0.0), f)
    np.testing.assert_allclose(np.abs(S["S_aa"]), 1, atol=1e-15)
    np.testing.assert_allclose(np.abs(S["S_bb"]), 1, atol=1e-15)
    assert S["S_aa"][5] == 1 and S["S_bb"][5] == 1
    np.testing.assert_array_equal(S["S_ab"], 0)
    np.testing.assert_array_equal(S["S_ba"], 0)


@pytest.mark.parametrize("rho", [0.0, 0.3, 1.0, 2.5])
def test_on_resonance_reflection_is_real(rho):
    S = conversion_sparams(FIG, PumpSetting(rho, 1.1), [FIG.f_a])
    assert S["S_aa"][0] == pytest.approx((1 - rho**2) / (1 + rho**2), abs=1e-15)
    assert S["S_aa"][0].imag == 0


@pytest.mark.parametrize("rho", [0.2, 1.0, 1.7])
def test_input_output_oracle(rho):
    f = FIG.f_a + np.linspace(-2e9, 2e9, 41)
    S = conversion_sparams(FIG, PumpSetting(rho), f)
    for i, fi in enumerate(f):
        aa, ba = cmt_conversion(FIG.gamma_a, FIG.gamma_b, rho, 2 * np.pi * (fi - FIG.f_a))
        assert abs(S["S_aa"][i]) == pytest.approx(abs(aa), abs=1e-12)
        assert abs(S["S_ba"][i]) == pytest.approx(abs(ba), abs=1e-12)


def test_threshold_span_lorentzian():
    f0, g = 7e9, 300e6

    def lor(x):
        return -10 * np.log10(1 + (2 * (x - f0) / g) ** 2)

    f = np.linspace(6e9, 8e9, 20001)
    m = threshold_span(f, lor(f), -3.0, below=False)
    lo, hi = lorentzian_crossings(lor, f0, 6e9, 8e9, -3.0)
    step = f[1] - f[0]
    assert m.defined
    assert m.f_low == pytest.approx(lo, abs=step)
    assert m.f_high == pytest.approx(hi, abs=step)


def test_threshold_span_edge_and_miss():
    f = np.linspace(0, 1, 11)
    assert not threshold_span(f, np.zeros(11), -3.0).defined
    assert not threshold_span(f, -10 * np.ones(11), -3.0).defined  # touches the grid edge


def test_contiguous_versus_hull():
    f = np.linspace(0, 10, 101)
    y = np.zeros(101)
    y[20:31] = -10
    y[60:71] = -12
    run = threshold_span(f, y, -3.0)
    hull = threshold_span(f, y, -3.0, hull=True)
    assert run.f_low > 5 and run.defined
    assert hull.f_low < 2.5 and hull.f_high == run.f_high


@pytest.mark.parametrize("rho", [0.3, 0.8, 1.0])
def test_symmetric_metric2_root_oracle(rho):
    lw = ModeLinewidths.from_hz(7e9, 10e9, 500e6, 500e6)

    def trans_db(x):
        return 20 * np.log10(abs(conversion_sparams(lw, PumpSetting(rho), [x])["S_ba"][0]))

    f = default_grid(lw)
    sw = conversion_sparams(lw, PumpSetting(rho), f)
    m2 = bandwidth_metrics(sw, 3.0).transmission_below_max
    peak = sw.db("S_ba").max()
    lo, hi = lorentzian_crossings(trans_db, lw.f_a, f[0], f[-1], peak - 3.0)
    assert m2.bandwidth == pytest.approx(hi - lo, abs=2 * (f[1] - f[0]))


def test_metric_undefined_flag():
    f = np.linspace(6.9e9, 7.1e9, 101)
    sw = conversion_sparams(FIG, PumpSetting(0.1), f)
    m = bandwidth_metrics(sw, 3.0)
    assert not m.reflection_below_level.defined
    assert m.reflection_below_level.as_dict()["bandwidth_hz"] is None
    with pytest.raises(DomainError):
        bandwidth_metrics(sw, 0.0)


def test_matched_sweep_limits():
    ps = pump_sweep(FIG, [0.0, 1.0])
    assert ps.min_reflection_db[1] <= DB_FLOOR + 1
    assert ps.max_transmission_db[1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.isnan(ps.bandwidths[0]))


@pytest.mark.parametrize("rho", [1e-3, 1e-2, 3e-2])
def test_small_pump_transmission(rho):
    ps = pump_sweep(FIG, [rho])
    assert ps.max_transmission_db[0] == pytest.approx(20 * np.log10(2 * rho), abs=0.01)


def test_metrics_monotone_below_matching():
    rho = np.linspace(0.02, 1.0, 99)
    bw = pump_sweep(FIG, rho).bandwidths
    for j in (0, 1):
        col = bw[:, j]
        ok = ~np.isnan(col)
        # once defined, stays defined
        assert np.all(ok[np.argmax(ok):])
        assert np.all(np.diff(col[ok]) >= -1e3)  # 1 kHz interpolation tolerance


def test_reflection_null_narrows_at_matching():
    bw = pump_sweep(FIG, [0.5, 0.9, 0.999]).bandwidths
    assert bw[2, 2] < 0.2 * bw[0, 2]
    assert np.all(np.diff(bw[:, 2]) < 0)
    # metrics 1 and 2 approach one another near matching
    assert abs(bw[2, 0] - bw[2, 1]) < 0.05 * bw[2, 1]


def test_sweep_metadata():
    sw = conversion_sparams(FIG, PumpSetting(0.5), [7e9])
    assert isinstance(sw, SweepResult)
    assert sw.idler_freq[0] == pytest.approx(10e9)


def test_pump_sweep_rejects_descending():
    with pytest.raises(DomainError):
        pump_sweep(FIG, [0.5, 0.2])
