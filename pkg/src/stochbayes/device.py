"""Behavioural model of a volatile threshold-switching memristor.

The device contributes one stochastic bit per pulse cycle: it switches on
when the applied pulse exceeds that cycle's threshold voltage and resets on
its own before the next cycle. Thresholds are drawn either i.i.d. Gaussian
or from an Ornstein-Uhlenbeck drift process with unit time step per cycle.
"""

from __future__ import annotations

import configparser
import io
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import signal, special

from .errors import InvalidInputError

log = logging.getLogger(__name__)

ENDURANCE_CYCLES = 10**6

IID = "iid-gaussian"
OU = "ou-process"
MODES = (IID, OU)


@dataclass(frozen=True)
class MemristorParams:
    vth_mean: float = 2.08  # V
    vth_std: float = 0.28  # V
    vhold_mean: float = 0.98  # V
    vhold_std: float = 0.30  # V
    t_switch: float = 50e-9  # s
    t_relax: float = 1100e-9  # s
    e_switch: float = 0.16e-9  # J
    on_off_ratio: float = 1e5
    cycle_budget: float = 4e-6  # s per bit

    def __post_init__(self):
        if not self.vth_mean > self.vhold_mean > 0:
            raise InvalidInputError("require vth_mean > vhold_mean > 0")
        if self.vth_std < 0 or self.vhold_std < 0:
            raise InvalidInputError("standard deviations must be non-negative")
        if not self.t_switch < self.t_relax:
            raise InvalidInputError("require t_switch < t_relax")
        if self.cycle_budget < self.t_switch + self.t_relax:
            raise InvalidInputError("cycle_budget shorter than switch + relax time")


def _default_sigma(theta=0.1, std=0.28):
    return std * math.sqrt(2.0 * theta)


@dataclass(frozen=True)
class OuParams:
    theta: float = 0.1  # per cycle
    mu: float = 2.08  # V
    sigma: float = field(default_factory=_default_sigma)  # V / sqrt(cycle)

    def __post_init__(self):
        if not self.theta > 0:
            raise InvalidInputError("theta must be positive")
        if self.sigma < 0:
            raise InvalidInputError("sigma must be non-negative")

    @property
    def stationary_std(self) -> float:
        return self.sigma / math.sqrt(2.0 * self.theta)

    def step_coefficients(self) -> tuple[float, float]:
        """(decay, noise_scale) of the exact one-cycle transition."""
        decay = math.exp(-self.theta)
        scale = self.sigma * math.sqrt(-math.expm1(-2.0 * self.theta) / (2.0 * self.theta))
        return decay, scale


@dataclass
class MemristorState:
    current_vth: float
    cycle_count: int = 0
    energy_accumulated: float = 0.0
    mode: str = IID

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}")


def _count_cycles(state: MemristorState, n: int) -> None:
    before = state.cycle_count
    state.cycle_count += n
    if before <= ENDURANCE_CYCLES < state.cycle_count:
        log.warning(
            "device exceeded %d cycles; behaviour past measured endurance is extrapolated",
            ENDURANCE_CYCLES,
        )


def sample_vth(state: MemristorState, params: MemristorParams, ou: OuParams,
               rng: np.random.Generator) -> float:
    """Draw this cycle's threshold voltage and advance the cycle counter."""
    if state.mode == IID:
        v = float(rng.normal(params.vth_mean, params.vth_std))
    else:
        decay, scale = ou.step_coefficients()
        v = ou.mu + (state.current_vth - ou.mu) * decay + scale * float(rng.standard_normal())
    state.current_vth = v
    _count_cycles(state, 1)
    return v


def sample_vth_many(state: MemristorState, params: MemristorParams, ou: OuParams,
                    rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorised ``sample_vth`` over ``n`` consecutive cycles."""
    if n < 0:
        raise InvalidInputError("n must be non-negative")
    if n == 0:
        return np.empty(0)
    if state.mode == IID:
        v = rng.normal(params.vth_mean, params.vth_std, size=n)
    else:
        decay, scale = ou.step_coefficients()
        # deviation x[t] = decay * x[t-1] + scale * eps[t], seeded from the current state
        eps = scale * rng.standard_normal(n)
        x0 = state.current_vth - ou.mu
        dev, _ = signal.lfilter([1.0], [1.0, -decay], eps, zi=[decay * x0])
        v = ou.mu + dev
    state.current_vth = float(v[-1])
    _count_cycles(state, n)
    return v


def switch_event(vin, vth_sample, state: MemristorState | None = None,
                 params: MemristorParams | None = None):
    """True where the pulse exceeds the threshold; books switching energy.

    Accepts scalars or arrays. Energy is added only when both ``state`` and
    ``params`` are given.
    """
    if np.any(np.asarray(vin) < 0):
        raise InvalidInputError("vin must be non-negative")
    on = np.greater(vin, vth_sample)
    if state is not None and params is not None:
        state.energy_accumulated += params.e_switch * int(np.count_nonzero(on))
    return bool(on) if np.ndim(on) == 0 else on


def frame_latency(bit_length: int, params: MemristorParams | None = None) -> float:
    """Simulated hardware time for one frame of ``bit_length`` bits."""
    if bit_length < 1:
        raise InvalidInputError("bit_length must be >= 1")
    params = params or MemristorParams()
    return bit_length * params.cycle_budget


def throughput_fps(bit_length: int, params: MemristorParams | None = None) -> float:
    return 1.0 / frame_latency(bit_length, params)


class Memristor:
    """A single device: parameters, mutable state and its own random source."""

    def __init__(self, params: MemristorParams | None = None, ou: OuParams | None = None,
                 mode: str = IID, seed=None, rng: np.random.Generator | None = None):
        self.params = params or MemristorParams()
        self.ou = ou or OuParams(mu=self.params.vth_mean,
                                 sigma=_default_sigma(0.1, self.params.vth_std))
        start = self.ou.mu if mode == OU else self.params.vth_mean
        self.state = MemristorState(current_vth=start, mode=mode)
        self.rng = rng if rng is not None else np.random.default_rng(seed)

    @property
    def mode(self) -> str:
        return self.state.mode

    def sample(self, n: int | None = None):
        if n is None:
            return sample_vth(self.state, self.params, self.ou, self.rng)
        return sample_vth_many(self.state, self.params, self.ou, self.rng, n)

    def marginal(self) -> tuple[float, float]:
        """Mean and std of the threshold distribution the device settles into."""
        if self.mode == OU:
            return self.ou.mu, self.ou.stationary_std
        return self.params.vth_mean, self.params.vth_std

    def drive_voltage(self, p: float) -> float:
        """Pulse amplitude that switches the device with probability ``p``.

        Uses the device's own threshold distribution, so ``p`` in {0, 1}
        maps to -inf/+inf (never/always switch).
        """
        mean, std = self.marginal()
        if std == 0:
            return -math.inf if p <= 0 else (math.inf if p >= 1 else mean)
        return float(mean + std * special.ndtri(p))

    def pulse(self, vin, n: int):
        """Apply ``n`` pulse cycles at ``vin``; returns (switched, thresholds)."""
        vth = self.sample(n)
        drive = np.clip(vin, 0.0, None) if np.isfinite(vin) else vin
        on = np.greater(drive, vth)
        self.state.energy_accumulated += self.params.e_switch * int(np.count_nonzero(on))
        return on, vth


# -- parameter files -------------------------------------------------------

def load_params(path) -> tuple[MemristorParams, OuParams]:
    """Read ``[memristor]`` and ``[ou]`` sections of an INI-style key = value file."""
    cp = configparser.ConfigParser()
    text = Path(path).read_text()
    cp.read_string(text)
    known = {f.name for f in fields(MemristorParams)}
    mem_kw, ou_kw = {}, {}
    if cp.has_section("memristor"):
        for k, v in cp.items("memristor"):
            if k not in known:
                raise InvalidInputError(f"unknown memristor parameter {k!r}")
            mem_kw[k] = float(v)
    mem = MemristorParams(**mem_kw)
    if cp.has_section("ou"):
        for k, v in cp.items("ou"):
            if k not in ("theta", "mu", "sigma"):
                raise InvalidInputError(f"unknown ou parameter {k!r}")
            ou_kw[k] = float(v)
    ou_kw.setdefault("mu", mem.vth_mean)
    ou_kw.setdefault("sigma", _default_sigma(ou_kw.get("theta", 0.1), mem.vth_std))
    return mem, OuParams(**ou_kw)


def dump_params(mem: MemristorParams, ou: OuParams) -> str:
    cp = configparser.ConfigParser()
    cp["memristor"] = {k: repr(v) for k, v in asdict(mem).items()}
    cp["ou"] = {k: repr(v) for k, v in asdict(ou).items()}
    buf = io.StringIO()
    buf.write("# SI units: volts, seconds, joules\n")
    cp.write(buf)
    return buf.getvalue()
