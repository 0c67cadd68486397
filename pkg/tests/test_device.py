import math

import numpy as np
import pytest

from stochbayes.device import (OU, Memristor, MemristorParams, MemristorState, OuParams,
                               dump_params, frame_latency, load_params, switch_event,
                               throughput_fps)
from stochbayes.errors import InvalidInputError


def test_defaults_match_reported_device():
    p = MemristorParams()
    assert (p.vth_mean, p.vth_std, p.vhold_mean, p.vhold_std) == (2.08, 0.28, 0.98, 0.30)
    assert p.t_switch + p.t_relax <= p.cycle_budget


def test_param_validation():
    with pytest.raises(InvalidInputError):
        MemristorParams(vth_mean=0.5)
    with pytest.raises(InvalidInputError):
        MemristorParams(t_switch=2e-6)
    with pytest.raises(InvalidInputError):
        MemristorParams(cycle_budget=1e-6)
    with pytest.raises(InvalidInputError):
        MemristorState(current_vth=2.0, mode="bogus")


def test_ou_stationary_std_formula():
    ou = OuParams(theta=0.1, mu=2.08, sigma=0.1252)
    assert ou.stationary_std == pytest.approx(0.1252 / math.sqrt(0.2))


def test_iid_is_seed_deterministic():
    a = Memristor(seed=5).sample(50)
    b = Memristor(seed=5).sample(50)
    assert np.array_equal(a, b)


def test_ou_mean_reverts_and_is_autocorrelated():
    w = Memristor(mode=OU, seed=3).sample(200_000)
    lag1 = np.corrcoef(w[:-1], w[1:])[0, 1]
    assert lag1 == pytest.approx(math.exp(-0.1), abs=0.01)


def test_switch_event_and_energy():
    p = MemristorParams()
    st = MemristorState(current_vth=2.0)
    out = switch_event(2.5, np.array([2.0, 3.0, 2.4]), st, p)
    assert out.tolist() == [True, False, True]
    assert st.energy_accumulated == pytest.approx(2 * p.e_switch)
    with pytest.raises(InvalidInputError):
        switch_event(-0.1, 2.0)


def test_switch_probability_at_mean_is_half():
    v = Memristor(seed=11).sample(100_000)
    assert np.mean(2.08 > v) == pytest.approx(0.5, abs=0.005)


def test_latency_and_throughput():
    assert frame_latency(100) == pytest.approx(4e-4, rel=1e-12)
    assert throughput_fps(100) == pytest.approx(2500.0, rel=1e-12)
    with pytest.raises(InvalidInputError):
        frame_latency(0)


def test_drive_voltage_inverts_marginal():
    d = Memristor()
    assert d.drive_voltage(0.5) == pytest.approx(2.08)
    assert d.drive_voltage(0.0) == -math.inf and d.drive_voltage(1.0) == math.inf


def test_param_file_round_trip(tmp_path):
    mem, ou = MemristorParams(vth_std=0.3), OuParams(theta=0.2, mu=2.0, sigma=0.1)
    f = tmp_path / "dev.ini"
    f.write_text(dump_params(mem, ou))
    assert load_params(f) == (mem, ou)


def test_param_file_unknown_key(tmp_path):
    f = tmp_path / "dev.ini"
    f.write_text("[memristor]\nvth_meen = 2\n")
    with pytest.raises(InvalidInputError):
        load_params(f)


def test_endurance_warning_logged_once(caplog):
    d = Memristor(seed=0)
    with caplog.at_level("WARNING"):
        d.sample(600_000)
        d.sample(600_000)
        d.sample(10)
    assert sum("endurance" in r.message.lower() for r in caplog.records) == 1
