import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochbayes.bitstream import pearson, scc
from stochbayes.encoder import (DEVICE, SneUnit, Tap, correlated_pair, encode,
                                p_from_vin, p_from_vref, vin_from_p, vref_from_p)
from stochbayes.errors import InvalidInputError, OutOfRangeError

probs = st.floats(1e-6, 1 - 1e-6)


def test_fit_midpoints():
    assert p_from_vin(2.24) == 0.5
    assert p_from_vref(0.57) == 0.5


def test_fit_orientation():
    assert p_from_vin(3.0) > 0.5 > p_from_vin(1.5)
    assert p_from_vref(0.4) > 0.5 > p_from_vref(0.7)


def test_vin_for_point_nine():
    assert p_from_vin(2.857) == pytest.approx(0.9, abs=0.001)
    assert vin_from_p(0.9) == pytest.approx(2.24 + math.log(9) / 3.56, abs=1e-15)


@given(probs)
def test_round_trips(p):
    assert abs(p_from_vin(vin_from_p(p)) - p) < 1e-12
    assert abs(p_from_vref(vref_from_p(p)) - p) < 1e-12


def test_extremes_have_no_voltage():
    for f in (vin_from_p, vref_from_p):
        with pytest.raises(OutOfRangeError):
            f(0.0)
        with pytest.raises(OutOfRangeError):
            f(1.0)


def test_tap_validation():
    with pytest.raises(InvalidInputError):
        Tap(1.2)
    assert Tap(0.3, negated=True).expected == pytest.approx(0.7)


def test_shared_sne_is_comonotone():
    a, b = encode([0.6, 0.3], 100_000, rng=np.random.default_rng(1))
    assert scc(a, b) == 1.0
    assert not np.any(b.bits & ~a.bits)
    assert (a.bits & b.bits).mean() == pytest.approx(0.3, abs=0.005)


def test_negated_tap_is_anti_monotone():
    a, b = encode([0.6, (0.6, True)], 100_000, rng=np.random.default_rng(2))
    assert scc(a, b) == pytest.approx(-1.0, abs=0.02)


def test_separate_snes_are_independent():
    (a,) = encode([0.5], 100_000, rng=np.random.default_rng(3))
    (b,) = encode([0.5], 100_000, rng=np.random.default_rng(4))
    assert abs(pearson(a, b)) < 0.01


def test_constant_targets():
    z, o = encode([0.0, 1.0], 50, rng=np.random.default_rng(0))
    assert z.value == 0.0 and o.value == 1.0


def test_hold_repeats_latent():
    sne = SneUnit("s", [Tap(0.5)], hold=2)
    (s,) = sne.emit(101, np.random.default_rng(0))
    b = s.bits
    assert len(b) == 101 and np.array_equal(b[0:100:2], b[1:101:2])


def test_device_mode_tracks_targets():
    sne = SneUnit("d", [Tap(0.8), Tap(0.25)], latent_mode=DEVICE)
    sne.device.rng = np.random.default_rng(9)
    a, b = sne.emit(100_000)
    assert a.value == pytest.approx(0.8, abs=0.01)
    assert b.value == pytest.approx(0.25, abs=0.01)
    assert scc(a, b) == 1.0
    assert sne.device.state.energy_accumulated > 0


def test_ideal_mode_requires_rng():
    with pytest.raises(InvalidInputError):
        SneUnit("s", [Tap(0.5)]).emit(10)


@pytest.mark.parametrize("regime, sign", [("positive", 1), ("negative", -1)])
def test_correlated_pair_regimes(regime, sign):
    a, b = correlated_pair(0.4, 0.7, regime, 50_000, seed=1)
    assert a.value == pytest.approx(0.4, abs=0.01)
    assert b.value == pytest.approx(0.7, abs=0.01)
    assert scc(a, b) == pytest.approx(sign, abs=0.02)


def test_correlated_pair_uncorrelated_and_unknown():
    a, b = correlated_pair(0.5, 0.5, "uncorrelated", 100_000, seed=1)
    assert abs(scc(a, b)) < 0.02
    with pytest.raises(InvalidInputError):
        correlated_pair(0.5, 0.5, "sideways", 10, seed=1)


def test_correlated_pair_device_mode():
    a, b = correlated_pair(0.3, 0.6, "positive", 50_000, seed=2, mode=DEVICE)
    assert scc(a, b) == 1.0
    assert a.value == pytest.approx(0.3, abs=0.01)
