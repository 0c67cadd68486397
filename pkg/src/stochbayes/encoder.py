"""Stochastic number encoders (SNEs).

An SNE is one memristor plus a bank of comparator taps. Every tap of one
SNE reads the same per-cycle latent, so taps are comonotone (or
anti-monotone when negated); separate SNEs draw separate latents and are
independent. ``ideal`` mode draws the latent as a uniform number;
``device`` mode derives it from a sampled threshold voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bitstream import StochasticNumber
from .device import Memristor, switch_event
from .errors import InvalidInputError, OutOfRangeError
from .rng import substream

IDEAL = "ideal"
DEVICE = "device"

RISING = "rising"
FALLING = "falling"


@dataclass(frozen=True)
class SigmoidFit:
    slope: float  # 1/V
    midpoint: float  # V
    orientation: str = RISING

    def __post_init__(self):
        if not self.slope > 0:
            raise InvalidInputError("sigmoid slope must be positive")
        if self.orientation not in (RISING, FALLING):
            raise InvalidInputError(f"orientation must be {RISING!r} or {FALLING!r}")

    def probability(self, v: float) -> float:
        z = self.slope * (v - self.midpoint)
        if self.orientation == FALLING:
            z = -z
        # overflow-safe logistic
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)

    def voltage(self, p: float) -> float:
        if not 0.0 < p < 1.0:
            raise OutOfRangeError(f"probability {p!r} has no finite voltage (need 0 < p < 1)")
        logit = math.log(p) - math.log1p(-p)
        if self.orientation == FALLING:
            logit = -logit
        return self.midpoint + logit / self.slope


VIN_FIT = SigmoidFit(3.56, 2.24, RISING)
VREF_FIT = SigmoidFit(11.5, 0.57, FALLING)


def p_from_vin(vin: float, fit: SigmoidFit = VIN_FIT) -> float:
    return fit.probability(vin)


def vin_from_p(p: float, fit: SigmoidFit = VIN_FIT) -> float:
    return fit.voltage(p)


def p_from_vref(vref: float, fit: SigmoidFit = VREF_FIT) -> float:
    return fit.probability(vref)


def vref_from_p(p: float, fit: SigmoidFit = VREF_FIT) -> float:
    return fit.voltage(p)


def _maybe_voltage(fit: SigmoidFit, p: float):
    return fit.voltage(p) if 0.0 < p < 1.0 else None


@dataclass(frozen=True)
class Tap:
    """One comparator output. ``p`` is the comparator's target; a negated
    tap emits the complement, so its stream converges to ``1 - p``."""

    p: float
    negated: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError(f"tap probability {self.p!r} outside [0, 1]")

    @property
    def expected(self) -> float:
        return 1.0 - self.p if self.negated else self.p

    @property
    def vref(self):
        return _maybe_voltage(VREF_FIT, self.p)


@dataclass
class SneUnit:
    sne_id: str
    taps: list = field(default_factory=list)
    latent_mode: str = IDEAL
    device: Memristor | None = None
    hold: int = 1  # cycles per latent draw; 2 mimics a half-rate select

    def __post_init__(self):
        if self.latent_mode not in (IDEAL, DEVICE):
            raise InvalidInputError(f"latent_mode must be {IDEAL!r} or {DEVICE!r}")
        if self.hold < 1:
            raise InvalidInputError("hold must be >= 1")
        self.taps = [t if isinstance(t, Tap) else Tap(*t) for t in self.taps]
        if self.latent_mode == DEVICE and self.device is None:
            self.device = Memristor()

    @property
    def vin(self):
        """Pulse amplitude per the input fit for the largest tap target."""
        if not self.taps:
            return None
        return _maybe_voltage(VIN_FIT, max(t.p for t in self.taps))

    def _latent_count(self, length: int) -> int:
        return -(-length // self.hold)

    def _expand(self, arr: np.ndarray, length: int) -> np.ndarray:
        if self.hold == 1:
            return arr
        return np.repeat(arr, self.hold)[:length]

    def draw_latent(self, length: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform latent in [0, 1) per cycle (ideal mode only)."""
        return self._expand(rng.random(self._latent_count(length)), length)

    def emit(self, length: int, rng: np.random.Generator | None = None) -> list[StochasticNumber]:
        """One stream per tap, all driven by the same per-cycle latent."""
        if length < 1:
            raise InvalidInputError("length must be >= 1")
        if not self.taps:
            raise InvalidInputError(f"SNE {self.sne_id!r} has no taps")
        if self.latent_mode == IDEAL:
            if rng is None:
                raise InvalidInputError("ideal mode needs a random generator")
            u = self.draw_latent(length, rng)
            raw = [u < t.p for t in self.taps]
        else:
            dev = self.device
            vth = self._expand(dev.sample(self._latent_count(length)), length)
            # one pulse at the largest drive; each comparator then cuts the shared response
            top = max(t.p for t in self.taps)
            vmax = dev.drive_voltage(top)
            if math.isfinite(vmax):
                switch_event(max(vmax, 0.0), vth, dev.state, dev.params)
            raw = [np.greater(dev.drive_voltage(t.p), vth) for t in self.taps]
        out = []
        for t, bits in zip(self.taps, raw):
            bits = np.asarray(bits, dtype=np.bool_)
            if t.negated:
                bits = ~bits
            out.append(StochasticNumber._wrap(bits))
        return out


def encode(targets: Sequence, length: int, sne: SneUnit | None = None,
           rng: np.random.Generator | None = None, mode: str = IDEAL) -> list[StochasticNumber]:
    """Encode ``targets`` (``(p, negated)`` pairs or bare probabilities) on one SNE."""
    taps = [Tap(t) if isinstance(t, (int, float)) else Tap(*t) for t in targets]
    if sne is None:
        sne = SneUnit("sne0", taps, latent_mode=mode)
    else:
        sne.taps = taps
    return sne.emit(length, rng)


def tap_summary(tap: Tap, stream: StochasticNumber, sne: SneUnit) -> dict:
    rec = {
        "target": tap.p,
        "negated": tap.negated,
        "expected": tap.expected,
        "measured": stream.value,
        "vin": _maybe_voltage(VIN_FIT, tap.p),
        "vref": tap.vref,
    }
    if sne.latent_mode == DEVICE:
        drive = sne.device.drive_voltage(tap.p)
        rec["device_drive"] = drive if math.isfinite(drive) else None
    return rec


def _unit(sne_id, taps, mode, seed):
    dev = Memristor(rng=substream(seed, "dev", sne_id)) if mode == DEVICE else None
    return SneUnit(sne_id, taps, latent_mode=mode, device=dev)


def correlated_pair(pa: float, pb: float, regime: str, length: int, seed: int,
                    mode: str = IDEAL) -> tuple[StochasticNumber, StochasticNumber]:
    """Two streams with targets ``pa``/``pb`` in the requested correlation regime.

    ``uncorrelated`` uses two SNEs; ``positive`` two taps of one SNE;
    ``negative`` one SNE with the second tap negated at ``1 - pb``.
    """
    if regime == "uncorrelated":
        (sa,) = _unit("a", [Tap(pa)], mode, seed).emit(length, substream(seed, "sne", "a"))
        (sb,) = _unit("b", [Tap(pb)], mode, seed).emit(length, substream(seed, "sne", "b"))
        return sa, sb
    if regime == "positive":
        taps = [Tap(pa), Tap(pb)]
    elif regime == "negative":
        taps = [Tap(pa), Tap(1.0 - pb, negated=True)]
    else:
        raise InvalidInputError(f"unknown regime {regime!r}")
    sa, sb = _unit("ab", taps, mode, seed).emit(length, substream(seed, "sne", "ab"))
    return sa, sb
