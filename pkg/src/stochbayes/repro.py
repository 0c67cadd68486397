"""Desk-scale reproduction runs of the worked examples.

Each runner returns rows of ``check, measured, expected, tolerance, pass``.
"""

from __future__ import annotations

import math

import numpy as np

from . import gates
from .bayes import FusionInstance, InferenceInstance, fuse, infer
from .device import (IID, OU, Memristor, MemristorParams, frame_latency,
                     throughput_fps)
from .encoder import correlated_pair, p_from_vin, p_from_vref, vin_from_p, vref_from_p
from .rng import derive_seed, substream

EXAMPLES = ("fig2-gates", "fig3-inference", "fig4-fusion", "table-s1", "device-stats")

GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
LONG = 100_000


def _row(example, check, measured, expected, tol, passed=None):
    if passed is None:
        passed = measured is not None and abs(measured - expected) <= tol
    return {"example": example, "check": check, "measured": measured,
            "expected": expected, "tolerance": tol, "pass": bool(passed)}


def gate_output(kind, regime, pa, pb, length, seed, ps=0.5, mode="ideal"):
    """Measured output probability of one gate configuration."""
    a, b = correlated_pair(pa, pb, regime, length, derive_seed(seed, "ab"), mode)
    if kind == "MUX2":
        s, _ = correlated_pair(ps, ps, "uncorrelated", length, derive_seed(seed, "s"), mode)
        out = gates.eval_gate("MUX2", s, a, b)
    else:
        out = gates.eval_gate(kind, a, b)
    return out.value


def gate_table(seed=0, length=LONG, grid=GRID):
    """One row per (gate, regime) cell; a cell passes when every grid point does."""
    tol = 3.0 * math.sqrt(0.25 / length)
    rows = []
    for kind in ("AND", "OR", "XOR", "MUX2"):
        for regime in gates.REGIMES:
            worst, worst_at = 0.0, None
            for pa in grid:
                for pb in grid:
                    s = derive_seed(seed, kind, regime, repr(pa), repr(pb))
                    got = gate_output(kind, regime, pa, pb, length, s)
                    want = gates.expected_probability(kind, regime, pa, pb, ps=0.5)
                    if abs(got - want) >= worst:
                        worst, worst_at = abs(got - want), (pa, pb)
            row = _row("table-s1", f"{kind} {regime}", worst, 0.0, tol, worst <= tol)
            row["worst_at"] = worst_at
            rows.append(row)
    return rows


def fig2_gates(seed=0, length=LONG):
    ex = "fig2-gates"
    rows = [
        _row(ex, "p_from_vin(2.24)", p_from_vin(2.24), 0.5, 0.0),
        _row(ex, "p_from_vref(0.57)", p_from_vref(0.57), 0.5, 0.0),
        _row(ex, "vin_from_p(0.9)", vin_from_p(0.9), 2.24 + math.log(9) / 3.56, 1e-12),
        _row(ex, "vref_from_p(0.9)", vref_from_p(0.9), 0.57 - math.log(9) / 11.5, 1e-12),
    ]
    cases = [("AND", "uncorrelated", 0.6, 0.5), ("AND", "positive", 0.6, 0.3),
             ("MUX2", "uncorrelated", 0.2, 0.8), ("XOR", "negative", 0.3, 0.4)]
    for kind, regime, pa, pb in cases:
        got = gate_output(kind, regime, pa, pb, length, derive_seed(seed, kind, regime))
        want = gates.expected_probability(kind, regime, pa, pb, ps=0.5)
        rows.append(_row(ex, f"{kind} {regime} ({pa}, {pb})", got, want, 0.005))
    return rows


WORKED_INFERENCE = InferenceInstance(0.57, 0.72, 0.60)


def inference_error_runs(inst=WORKED_INFERENCE, length=100, runs=1000, seed=0):
    """Absolute posterior errors over ``runs`` independently seeded runs."""
    want = inst.analytic()
    errs = np.empty(runs)
    for k in range(runs):
        rep = infer(inst, length, derive_seed(seed, "run", str(k)), correlations=False)
        errs[k] = abs(rep.posterior - want)
    return errs


def fig3_inference(seed=0):
    ex = "fig3-inference"
    inst = WORKED_INFERENCE
    short = infer(inst, 100, seed)
    long = infer(inst, LONG, seed)
    rows = [
        _row(ex, "analytic P(A|B)", inst.analytic(), 0.6140, 5e-5),
        _row(ex, "100-bit posterior (single run)", short.posterior, inst.analytic(), 0.15),
        _row(ex, "1e5-bit posterior", long.posterior, inst.analytic(), 0.02),
        _row(ex, "mean |error| over 1000 100-bit runs",
             float(inference_error_runs(seed=seed).mean()), 0.0, 0.06),
        _row(ex, "simulated latency 100 bits [s]", short.simulated_latency, 4e-4, 1e-12),
        _row(ex, "throughput [fps]", throughput_fps(100), 2500.0, 1e-6),
    ]
    for e in long.correlation_matrix:
        rows.append({"example": ex, "check": f"corr {e.x} ~ {e.y}",
                     "measured": e.scc, "expected": None, "tolerance": None,
                     "pass": True, "pearson": e.pearson})
    return rows


def fig4_fusion(seed=0):
    ex = "fig4-fusion"
    rows = []
    for ps in ((0.8, 0.6), (0.8, 0.6, 0.7)):
        inst = FusionInstance(ps)
        rep = fuse(inst, LONG, derive_seed(seed, *map(repr, ps)))
        rows.append(_row(ex, f"fuse{ps}", rep.posterior, inst.analytic(), 0.02))
    for p in (0.2, 0.9):
        rep = fuse(FusionInstance((p, 0.5)), LONG, derive_seed(seed, "id", repr(p)))
        rows.append(_row(ex, f"uninformative identity fuse({p}, 0.5)", rep.posterior, p, 0.01))
    rows.append(_row(ex, "simulated latency 100 bits [s]", frame_latency(100), 4e-4, 1e-12))
    return rows


def device_stats(seed=0, samples=LONG, ou_steps=10**6, params=None, ou=None):
    ex = "device-stats"
    params = params or MemristorParams()
    dev = Memristor(params, ou, mode=IID, rng=substream(seed, "iid"))
    v = dev.sample(samples)
    dev_ou = Memristor(params, ou, mode=OU, rng=substream(seed, "ou"))
    w = dev_ou.sample(ou_steps)
    hold = substream(seed, "hold").normal(params.vhold_mean, params.vhold_std, samples)
    return [
        _row(ex, "V_th mean [V]", float(v.mean()), params.vth_mean, 0.01),
        _row(ex, "V_th std [V]", float(v.std(ddof=1)), params.vth_std, 0.01),
        _row(ex, "OU V_th mean [V]", float(w.mean()), dev_ou.ou.mu, 0.01),
        _row(ex, "OU stationary std [V]", float(w.std(ddof=1)), dev_ou.ou.stationary_std, 0.01),
        _row(ex, "V_hold mean [V] (report only)", float(hold.mean()), params.vhold_mean, 0.01),
        _row(ex, "V_hold std [V] (report only)", float(hold.std(ddof=1)), params.vhold_std, 0.01),
        _row(ex, "cycle budget [s]", params.cycle_budget, 4e-6, 0.0,
             params.cycle_budget >= params.t_switch + params.t_relax),
        _row(ex, "frame latency 100 bits [s]", frame_latency(100, params), 4e-4, 1e-12),
        _row(ex, "switch energy [J]", params.e_switch, 0.16e-9, 0.0),
    ]


RUNNERS = {
    "fig2-gates": fig2_gates,
    "fig3-inference": fig3_inference,
    "fig4-fusion": fig4_fusion,
    "table-s1": gate_table,
    "device-stats": device_stats,
}


def run(example: str, seed: int = 0) -> list:
    if example not in RUNNERS:
        raise KeyError(example)
    return RUNNERS[example](seed=seed)
