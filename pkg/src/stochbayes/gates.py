"""Stochastic-logic primitives and their probability-domain semantics."""

from __future__ import annotations

import warnings
from enum import Enum

import numpy as np

from .bitstream import StochasticNumber, _as_bits, scc
from .errors import (ContractViolation, DivisionUndefinedError, InvalidInputError,
                     UndefinedCorrelationError)


class Kind(str, Enum):
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NOT = "NOT"
    MUX2 = "MUX2"
    MUX4 = "MUX4"
    DFF = "DFF"
    CORDIV = "CORDIV"


ARITY = {
    Kind.AND: 2, Kind.OR: 2, Kind.XOR: 2, Kind.NOT: 1,
    Kind.MUX2: 3, Kind.MUX4: 6, Kind.DFF: 1, Kind.CORDIV: 2,
}

STATEFUL = frozenset({Kind.DFF, Kind.CORDIV})

UNCORRELATED = "uncorrelated"
POSITIVE = "positive"
NEGATIVE = "negative"
REGIMES = (UNCORRELATED, POSITIVE, NEGATIVE)


# -- bit-level evaluation ------------------------------------------------------
# Inputs are bool arrays of equal length; outputs are fresh bool arrays.

def mux2(sel, d0, d1):
    """``d1`` where ``sel`` is 1, else ``d0``."""
    return np.where(sel, d1, d0)


def mux4(s_hi, s_lo, d00, d01, d10, d11):
    """Data input indexed by the two-bit select ``(s_hi, s_lo)``."""
    return np.where(s_hi, np.where(s_lo, d11, d10), np.where(s_lo, d01, d00))


def dff(x, init: bool = False):
    """One-cycle delay with initial output ``init``."""
    out = np.empty_like(x)
    out[0] = init
    out[1:] = x[:-1]
    return out


def hold_mux(sel, x, init: bool = False):
    """Closed form of ``q = MUX2(sel, DFF(q), x)``: pass ``x`` when ``sel`` is 1,
    otherwise repeat the last output."""
    n = sel.size
    idx = np.where(sel, np.arange(n), -1)
    np.maximum.accumulate(idx, out=idx)
    out = np.where(idx >= 0, x[np.maximum(idx, 0)], init)
    return out.astype(np.bool_)


def cordiv_bits(num, den, init: bool = False):
    return hold_mux(den, num, init)


_COMBINATIONAL = {
    Kind.AND: np.logical_and,
    Kind.OR: np.logical_or,
    Kind.XOR: np.logical_xor,
    Kind.NOT: np.logical_not,
    Kind.MUX2: mux2,
    Kind.MUX4: mux4,
    Kind.DFF: dff,
    Kind.CORDIV: cordiv_bits,
}


def eval_bits(kind, inputs):
    """Evaluate ``kind`` over whole streams (bool arrays)."""
    kind = Kind(kind)
    if len(inputs) != ARITY[kind]:
        raise InvalidInputError(f"{kind.value} takes {ARITY[kind]} inputs, got {len(inputs)}")
    sizes = {a.size for a in inputs}
    if len(sizes) != 1:
        raise InvalidInputError("input streams differ in length")
    return np.asarray(_COMBINATIONAL[kind](*inputs), dtype=np.bool_)


def eval_gate(kind, *inputs) -> StochasticNumber:
    """Apply a gate to stochastic numbers, cycle by cycle."""
    bits = [_as_bits(x) for x in inputs]
    return StochasticNumber._wrap(eval_bits(kind, bits))


def step_gate(kind, inputs, state: bool = False):
    """Single-cycle evaluation: returns ``(output_bit, next_state)``.

    For DFF the state is the stored bit; for CORDIV it is the last quotient bit.
    Combinational kinds ignore ``state``.
    """
    kind = Kind(kind)
    if kind is Kind.AND:
        return inputs[0] and inputs[1], state
    if kind is Kind.OR:
        return inputs[0] or inputs[1], state
    if kind is Kind.XOR:
        return inputs[0] != inputs[1], state
    if kind is Kind.NOT:
        return not inputs[0], state
    if kind is Kind.MUX2:
        return (inputs[2] if inputs[0] else inputs[1]), state
    if kind is Kind.MUX4:
        return inputs[2 + 2 * bool(inputs[0]) + bool(inputs[1])], state
    if kind is Kind.DFF:
        return state, bool(inputs[0])
    out = bool(inputs[0]) if inputs[1] else state
    return out, out


# -- probability-domain semantics -------------------------------------------

def expected_probability(kind, regime: str, pa: float, pb: float, ps: float | None = None) -> float:
    """Output probability of a two-input gate under a correlation regime.

    For MUX2 the select ``ps`` must be independent of both data inputs; the
    regime then only describes how the data inputs relate, which does not
    change the result.
    """
    kind = Kind(kind)
    if regime not in REGIMES:
        raise InvalidInputError(f"regime must be one of {REGIMES}")
    if kind is Kind.MUX2:
        if ps is None:
            raise InvalidInputError("MUX2 needs a select probability")
        return (1.0 - ps) * pa + ps * pb
    if kind is Kind.AND:
        return {UNCORRELATED: pa * pb, POSITIVE: min(pa, pb),
                NEGATIVE: max(pa + pb - 1.0, 0.0)}[regime]
    if kind is Kind.OR:
        return {UNCORRELATED: pa + pb - pa * pb, POSITIVE: max(pa, pb),
                NEGATIVE: min(1.0, pa + pb)}[regime]
    if kind is Kind.XOR:
        if regime == UNCORRELATED:
            return pa + pb - 2.0 * pa * pb
        if regime == POSITIVE:
            return abs(pa - pb)
        s = pa + pb
        return s if s <= 1.0 else 2.0 - s
    raise InvalidInputError(f"no two-input probability rule for {kind.value}")


def cordiv(numerator: StochasticNumber, denominator: StochasticNumber,
           check: bool = True, min_scc: float = 0.9) -> StochasticNumber:
    """Correlated divider: quotient stream approximating P(num) / P(den).

    Emits a :class:`ContractViolation` warning when the inputs are not
    positively correlated (``scc < min_scc``).
    """
    num, den = _as_bits(numerator), _as_bits(denominator)
    if num.size != den.size:
        raise InvalidInputError("numerator and denominator differ in length")
    if not den.any():
        raise DivisionUndefinedError("denominator stream is all zeros")
    if check:
        try:
            measured = scc(num, den)
        except UndefinedCorrelationError:
            measured = None
        if measured is not None and measured < min_scc:
            warnings.warn(
                ContractViolation(f"CORDIV inputs not positively correlated (scc={measured:.4f})"),
                stacklevel=2,
            )
    return StochasticNumber._wrap(cordiv_bits(num, den))
