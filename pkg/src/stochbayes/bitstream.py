"""Unipolar stochastic numbers and the two correlation metrics.

A stochastic number is a finite bitstream whose value is the fraction of
1-bits. Bits are held in a read-only ``numpy`` bool array; the public
contract is positional (index ``i`` is cycle ``i``), packing only happens
in the binary serialization.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidInputError, UndefinedCorrelationError

__all__ = [
    "StochasticNumber",
    "PairCounts",
    "estimate_probability",
    "pair_counts",
    "pearson",
    "scc",
]


class StochasticNumber:
    """Immutable unipolar bitstream."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] | np.ndarray):
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise InvalidInputError("a stochastic number is one-dimensional")
        if arr.dtype != np.bool_:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise InvalidInputError("bits must be 0 or 1")
            arr = arr.astype(np.bool_)
        else:
            arr = arr.copy() if arr.flags.writeable else arr
        arr.flags.writeable = False
        self._bits = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "StochasticNumber":
        # trusted fast path for freshly computed bool arrays
        sn = cls.__new__(cls)
        arr.flags.writeable = False
        sn._bits = arr
        return sn

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.size)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, StochasticNumber):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash((self.length, self._bits.tobytes()))

    def __repr__(self) -> str:
        head = self.to_text()[:16]
        more = "..." if self.length > 16 else ""
        return f"StochasticNumber({head}{more}, n={self.length})"

    @property
    def value(self) -> float:
        return estimate_probability(self)

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        """One line of '0'/'1' characters, no newline."""
        return (self._bits.view(np.uint8) + ord("0")).tobytes().decode("ascii")

    @classmethod
    def from_text(cls, text: str) -> "StochasticNumber":
        line = text.strip()
        if not line:
            raise InvalidInputError("empty bitstream text")
        raw = np.frombuffer(line.encode("ascii"), dtype=np.uint8)
        bits = raw - ord("0")
        if (bits > 1).any():
            raise InvalidInputError("bitstream text may contain only '0' and '1'")
        return cls._wrap(bits.astype(np.bool_))

    def to_bytes(self) -> bytes:
        """u64 little-endian length header, then bits packed LSB-first."""
        packed = np.packbits(self._bits, bitorder="little")
        return struct.pack("<Q", self.length) + packed.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StochasticNumber":
        if len(data) < 8:
            raise InvalidInputError("truncated header")
        (n,) = struct.unpack_from("<Q", data)
        body = np.frombuffer(data, dtype=np.uint8, offset=8)
        if body.size != (n + 7) // 8:
            raise InvalidInputError(
                f"payload holds {body.size} bytes, header implies {(n + 7) // 8}"
            )
        bits = np.unpackbits(body, count=n, bitorder="little").astype(np.bool_)
        return cls._wrap(bits)


def _as_bits(sn) -> np.ndarray:
    if isinstance(sn, StochasticNumber):
        return sn.bits
    return StochasticNumber(sn).bits


def estimate_probability(sn: StochasticNumber) -> float:
    """Fraction of 1-bits."""
    bits = _as_bits(sn)
    if bits.size == 0:
        raise InvalidInputError("cannot estimate the value of an empty stream")
    return np.count_nonzero(bits) / bits.size


class PairCounts(NamedTuple):
    n11: int
    n10: int
    n01: int
    n00: int

    @property
    def total(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00


def pair_counts(sx: StochasticNumber, sy: StochasticNumber) -> PairCounts:
    x, y = _as_bits(sx), _as_bits(sy)
    if x.size != y.size:
        raise InvalidInputError(f"length mismatch: {x.size} vs {y.size}")
    n = int(x.size)
    a = int(np.count_nonzero(x & y))
    ones_x = int(np.count_nonzero(x))
    ones_y = int(np.count_nonzero(y))
    b = ones_x - a
    c = ones_y - a
    return PairCounts(a, b, c, n - a - b - c)


def pearson(sx: StochasticNumber, sy: StochasticNumber) -> float:
    """Pearson correlation from the 2x2 pair-count table."""
    a, b, c, d = pair_counts(sx, sy)
    # python ints: the product overflows int64 for long streams
    denom = (a + b) * (a + c) * (b + d) * (c + d)
    if denom == 0:
        raise UndefinedCorrelationError("pearson undefined for a constant stream")
    return (a * d - b * c) / math.sqrt(denom)


def scc(sx: StochasticNumber, sy: StochasticNumber) -> float:
    """Stochastic-computing correlation, two-branch form (ad == bc uses the first)."""
    a, b, c, d = pair_counts(sx, sy)
    n = a + b + c + d
    num = a * d - b * c
    if num >= 0:
        denom = n * min(a + b, a + c) - (a + b) * (a + c)
    else:
        denom = (a + b) * (a + c) - n * max(a - d, 0)
    if denom == 0:
        raise UndefinedCorrelationError("scc denominator is zero")
    return num / denom


def read_text_streams(text: str) -> list[StochasticNumber]:
    """Parse several streams, one per non-blank line."""
    return [StochasticNumber.from_text(ln) for ln in text.splitlines() if ln.strip()]


@dataclass(frozen=True)
class CorrelationEntry:
    """Pairwise correlation; ``None`` where the metric is undefined."""

    x: str
    y: str
    pearson: float | None
    scc: float | None


def correlation_entry(name_x: str, sx, name_y: str, sy) -> CorrelationEntry:
    try:
        rho = pearson(sx, sy)
    except UndefinedCorrelationError:
        rho = None
    try:
        s = scc(sx, sy)
    except UndefinedCorrelationError:
        s = None
    return CorrelationEntry(name_x, name_y, rho, s)


def correlation_matrix(streams: dict) -> list[CorrelationEntry]:
    """All unordered pairs of ``streams`` in insertion order."""
    names = list(streams)
    out = []
    for i, nx in enumerate(names):
        for ny in names[i + 1:]:
            out.append(correlation_entry(nx, streams[nx], ny, streams[ny]))
    return out
