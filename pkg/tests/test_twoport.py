import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmixer import twoport as tp
from jmixer.errors import DomainError, SingularNetworkError

pos = st.floats(1e-14, 1e-9)
freq = st.floats(1e8, 3e10)


def _rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


@given(pos, freq)
def test_capacitor_reciprocal(C, f):
    T = tp.abcd_series_capacitor(C, f)
    assert abs(tp.determinant(T) - 1) < 1e-12
    assert T[0, 0] == 1 and T[1, 1] == 1 and T[1, 0] == 0


def test_capacitor_limits():
    assert np.allclose(tp.abcd_series_capacitor(1e-12, 1e22), tp.identity(), atol=1e-9)
    two = tp.cascade([tp.abcd_series_capacitor(2e-12, 5e9)] * 2)
    assert _rel(two, tp.abcd_series_capacitor(1e-12, 5e9)) < 1e-14
    S = tp.abcd_to_s(tp.abcd_series_capacitor(1e-12, 1e3), 50.0)
    assert abs(S.S11) > 1 - 1e-9
    for bad in ((0.0, 1e9), (1e-12, 0.0), (-1e-12, 1e9)):
        with pytest.raises(DomainError):
            tp.abcd_series_capacitor(*bad)


@given(pos, pos, freq)
def test_parallel_lc_reciprocal(L, C, f):
    assert abs(tp.determinant(tp.abcd_parallel_lc(L, C, f)) - 1) < 1e-12


def test_parallel_lc_resonance():
    L, C = 69.62e-12, 6.1e-12
    f0 = 1 / (2 * np.pi * np.sqrt(L * C))
    assert f0 == pytest.approx(7.72e9, rel=1e-3)
    assert np.allclose(tp.abcd_parallel_lc(L, C, f0), tp.identity(), atol=1e-12)
    with pytest.raises(DomainError):
        tp.abcd_parallel_lc(-L, C, f0)


def test_inverter_conversion_determinant():
    J = tp.InverterStrength(0.02, 0.02, 0.4)
    assert abs(tp.determinant(tp.abcd_jrm_inverter(J, tp.CONVERSION))) == pytest.approx(1.0, rel=1e-14)
    f1, f2 = 7e9, 10e9
    J = tp.InverterStrength(0.02 / f1, 0.02 / f2, 0.4)
    for mode in tp.MODES:
        T = tp.abcd_jrm_inverter(J, mode)
        assert abs(tp.determinant(T)) == pytest.approx(f1 / f2, rel=1e-14)
        assert T[0, 0] == 0 and T[1, 1] == 0
    with pytest.raises(DomainError):
        tp.abcd_jrm_inverter(tp.InverterStrength(0.0, 0.01), tp.CONVERSION)
    with pytest.raises(DomainError):
        tp.abcd_jrm_inverter(J, "mixing")


@pytest.mark.parametrize("mode, sign", [(tp.CONVERSION, 1), (tp.AMPLIFICATION, -1)])
def test_pump_phase_shifts_s21(mode, sign):
    f = np.linspace(6e9, 8e9, 11)
    ph = 0.7

    def s21(phase):
        J = tp.InverterStrength(np.full(f.size, 0.01), np.full(f.size, 0.012), phase)
        T = tp.cascade([tp.abcd_parallel_lc(70e-12, 6e-12, f), tp.abcd_jrm_inverter(J, mode),
                        tp.abcd_parallel_lc(70e-12, 3e-12, f + 3e9)])
        return tp.abcd_to_s(T, 50.0).S21

    a, b = s21(0.0), s21(ph)
    assert np.allclose(np.abs(a), np.abs(b), rtol=1e-13)
    assert np.allclose(np.angle(b / a), sign * ph, atol=1e-12)


def _random_abcd(rng, n):
    return tp.abcd(*(rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4)))


def test_cascade_associative_and_inverse(rng):
    T1, T2, T3 = (_random_abcd(rng, 5) for _ in range(3))
    assert _rel(tp.cascade([tp.cascade([T1, T2]), T3]), tp.cascade([T1, tp.cascade([T2, T3])])) < 1e-12
    assert np.allclose(tp.cascade([T1, tp.inverse(T1)]), tp.identity((5,)), atol=1e-12)
    assert tp.cascade([T1]) is T1
    with pytest.raises(DomainError):
        tp.cascade([])


def test_reciprocal_product_det(rng):
    f = rng.uniform(1e9, 2e10, 20)
    T = tp.cascade([tp.abcd_series_capacitor(1e-13, f), tp.abcd_parallel_lc(1e-9, 1e-12, f),
                    tp.abcd_series_capacitor(3e-13, f)])
    assert np.allclose(tp.determinant(T), 1.0, atol=1e-12)


def test_identity_to_s():
    S = tp.abcd_to_s(tp.identity(), 50.0)
    assert S.S11 == 0 and S.S22 == 0 and S.S12 == 1 and S.S21 == 1


@given(st.lists(st.tuples(st.sampled_from(["C", "LC"]), pos, pos), min_size=1, max_size=5), freq)
def test_lossless_reciprocal_unitarity(elements, f):
    mats = [tp.abcd_series_capacitor(C, f) if kind == "C" else tp.abcd_parallel_lc(L * 1e3, C, f)
            for kind, L, C in elements]
    S = tp.abcd_to_s(tp.cascade(mats), 50.0, on_singular="flag")
    if not S.singular:
        assert abs(abs(S.S11) ** 2 + abs(S.S21) ** 2 - 1) < 1e-10


def test_s_to_abcd_roundtrip(rng):
    T = _random_abcd(rng, 50)
    back = tp.s_to_abcd(tp.abcd_to_s(T, 50.0))
    assert _rel(back, T) < 1e-10


def test_singular_denominator():
    T = tp.abcd(1.0, -50.0, 0.0, 0.0)  # A + B/Z0 = 0
    with pytest.raises(SingularNetworkError):
        tp.abcd_to_s(T, 50.0)
    S = tp.abcd_to_s(T[None], 50.0, on_singular="flag")
    assert S.singular[0] and np.isnan(S.S11[0])
    with pytest.raises(DomainError):
        tp.abcd_to_s(tp.identity(), 0.0)
