"""Bayesian inference and multimodal fusion as stochastic-logic netlists.

Both operators share one shape: a numerator stream that is, bit for bit, a
subset of a denominator stream, fed to a CORDIV stage (MUX2 + DFF). The
subset property makes the divider's positive-correlation precondition hold
by construction.

The structure templates here are also what the network compiler emits, so a
compiled one-parent-one-child network and :func:`infer` run the same circuit.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .bitstream import StochasticNumber, correlation_matrix
from .device import IID, MemristorParams, OuParams, frame_latency
from .encoder import IDEAL
from .errors import (ContractViolation, DegenerateFusionError, DivisionUndefinedError,
                     InvalidInputError)
from .gates import NEGATIVE, POSITIVE, UNCORRELATED
from .netlist import CircuitNetlist, run_netlist

ONE_PARENT_ONE_CHILD = "one-parent-one-child"
TWO_PARENT_ONE_CHILD = "two-parent-one-child"
ONE_PARENT_TWO_CHILD = "one-parent-two-child"
STRUCTURES = (ONE_PARENT_ONE_CHILD, TWO_PARENT_ONE_CHILD, ONE_PARENT_TWO_CHILD)


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise InvalidInputError(f"{name}={p!r} outside [0, 1]")


# -- analytic oracles ---------------------------------------------------------

def bayes_posterior(prior: float, likelihood: float, likelihood_neg: float) -> float:
    """P(A|B) = P(A)P(B|A) / (P(A)P(B|A) + P(~A)P(B|~A))."""
    num = prior * likelihood
    den = num + (1.0 - prior) * likelihood_neg
    if den <= 0.0:
        raise DivisionUndefinedError("P(B) is zero; posterior undefined")
    return num / den


def fusion_terms(posteriors: Sequence[float], prior: float = 0.5) -> tuple[float, float]:
    """Unnormalised support for y and for not-y given M modal posteriors."""
    m = len(posteriors)
    target = math.prod(posteriors) / prior ** (m - 1)
    complement = math.prod(1.0 - p for p in posteriors) / (1.0 - prior) ** (m - 1)
    return target, complement


def fusion_posterior(posteriors: Sequence[float], prior: float = 0.5) -> float:
    target, complement = fusion_terms(posteriors, prior)
    if target + complement <= 0.0:
        raise DegenerateFusionError("modal posteriors contradict with certainty")
    return target / (target + complement)


# -- instances ----------------------------------------------------------------

@dataclass(frozen=True)
class InferenceInstance:
    prior: float
    likelihood: float
    likelihood_neg: float

    def __post_init__(self):
        for k in ("prior", "likelihood", "likelihood_neg"):
            _check_prob(k, getattr(self, k))

    @property
    def evidence(self) -> float:
        return self.prior * self.likelihood + (1.0 - self.prior) * self.likelihood_neg

    def analytic(self) -> float:
        return bayes_posterior(self.prior, self.likelihood, self.likelihood_neg)


@dataclass(frozen=True)
class FusionInstance:
    modal_posteriors: tuple
    prior: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "modal_posteriors", tuple(float(p) for p in self.modal_posteriors))
        if len(self.modal_posteriors) < 2:
            raise InvalidInputError("fusion needs at least two modalities")
        for i, p in enumerate(self.modal_posteriors):
            _check_prob(f"modal_posteriors[{i}]", p)
        if not 0.0 < self.prior < 1.0:
            raise InvalidInputError(f"prior={self.prior!r} must lie strictly inside (0, 1)")

    def analytic(self) -> float:
        return fusion_posterior(self.modal_posteriors, self.prior)


@dataclass
class DecisionReport:
    posterior: float
    stream: StochasticNumber
    analytic: float
    correlation_matrix: list
    simulated_latency: float
    bits: int
    seed: int
    instance: object = None
    warnings: list = field(default_factory=list)
    run: object = None

    @property
    def error(self) -> float:
        return self.posterior - self.analytic

    def record(self) -> dict:
        """Flat-ish structured record for CSV/JSON output."""
        inst = self.instance
        if isinstance(inst, InferenceInstance):
            inst_d = {"prior": inst.prior, "likelihood": inst.likelihood,
                      "likelihood_neg": inst.likelihood_neg}
        elif isinstance(inst, FusionInstance):
            inst_d = {"modal_posteriors": list(inst.modal_posteriors), "prior": inst.prior}
        else:
            inst_d = inst
        return {
            "instance": inst_d,
            "analytic": self.analytic,
            "simulated": self.posterior,
            "error": self.error,
            "bits": self.bits,
            "seed": self.seed,
            "simulated_latency": self.simulated_latency,
            "correlation": {
                f"{e.x}~{e.y}": {"pearson": e.pearson, "scc": e.scc}
                for e in self.correlation_matrix
            },
            "warnings": list(self.warnings),
        }


# -- structure templates --------------------------------------------------------

@dataclass
class BayesStructure:
    """A small Bayesian network restricted to the three supported shapes.

    ``children`` maps a child to ``(parents, table)``; the table lists
    P(child=1 | parents) in binary counting order of the parent values,
    first parent most significant, false before true. For one parent that
    is ``(P(B|~A), P(B|A))``.
    """

    kind: str
    roots: dict
    children: dict

    def __post_init__(self):
        if self.kind not in STRUCTURES:
            raise InvalidInputError(f"unknown structure {self.kind!r}")
        for name, p in self.roots.items():
            _check_prob(f"P({name})", p)
        for child, (parents, table) in self.children.items():
            if len(table) != 2 ** len(parents):
                raise InvalidInputError(
                    f"table for {child!r} needs {2 ** len(parents)} entries, got {len(table)}")
            for p in table:
                _check_prob(f"P({child}|...)", p)
        shape = (len(self.roots), sorted(len(ps) for ps, _ in self.children.values()))
        want = {ONE_PARENT_ONE_CHILD: (1, [1]), TWO_PARENT_ONE_CHILD: (2, [2]),
                ONE_PARENT_TWO_CHILD: (1, [1, 1])}[self.kind]
        if shape != want:
            raise InvalidInputError(f"tables do not describe a {self.kind} network")


def tap_name(child: str, parents: Sequence[str], values: Sequence[bool]) -> str:
    given = ",".join(p if v else f"~{p}" for p, v in zip(parents, values))
    return f"{child}|{given}"


def structure_netlist(st: BayesStructure, query=None, name: str = "bayes") -> CircuitNetlist:
    """Netlist for ``st``; ``query`` is ``(target, [evidence...])`` or None.

    One SNE per variable: a root gets one tap, a child gets one tap per
    table entry. Children select their table entry with a MUX driven by
    the parent streams. A conditional query adds AND gates for the joint
    event and a CORDIV stage (MUX2 + DFF) for the division.
    """
    net = CircuitNetlist(name)
    variables = list(st.roots) + list(st.children)
    sne = {v: f"sne{i}" for i, v in enumerate(variables)}
    taps = {}
    for root, p in st.roots.items():
        net.source(root, sne[root], p)
    for child, (parents, table) in st.children.items():
        taps[child] = []
        for values, p in zip(itertools.product((False, True), repeat=len(parents)), table):
            taps[child].append(net.source(tap_name(child, parents, values), sne[child], p))
    for child, (parents, _) in st.children.items():
        kind = "MUX2" if len(parents) == 1 else "MUX4"
        net.gate(child, kind, *parents, *taps[child])

    stage = None
    if query is None:
        for child in st.children:
            net.sink(f"P({child})", child)
    else:
        target, evidence = query
        evidence = list(evidence)
        if not evidence:
            net.sink(f"P({target})", target)
        else:
            stage = _posterior_stage(net, st, target, evidence, taps)

    roots = list(st.roots)
    for a, b in itertools.combinations(roots, 2):
        net.corr(a, b, UNCORRELATED)
    for child, (parents, _) in st.children.items():
        for par in parents:
            for t in taps[child]:
                net.corr(par, t, UNCORRELATED)
        for t0, t1 in zip(taps[child], taps[child][1:]):
            net.corr(t0, t1, POSITIVE)
    kids = list(st.children)
    for a, b in itertools.combinations(kids, 2):
        net.corr(taps[a][0], taps[b][0], UNCORRELATED)
    if stage is not None:
        net.corr(*stage, POSITIVE)
    return net


def _posterior_stage(net, st, target, evidence, taps):
    parents_of = {c: ps for c, (ps, _) in st.children.items()}
    if target in evidence:
        raise InvalidInputError("query target also appears as evidence")
    if len(evidence) == 1:
        den = evidence[0]
    else:
        den = net.gate("den", "AND", evidence[0], evidence[1])
    child = evidence[0]
    if (len(evidence) == 1 and child in parents_of and parents_of[child] == (target,)):
        # P(A|B) with B = MUX2(A; B|~A, B|A): A & B equals A & (B|A) bitwise
        num = net.gate("num", "AND", target, taps[child][1])
    else:
        num = net.gate("num", "AND", target, den)
    cordiv_stage(net, num, den)
    net.sink(f"P({target}|{','.join(evidence)})", "post")
    return num, den


def cordiv_stage(net: CircuitNetlist, num: str, den: str, out: str = "post") -> str:
    net.gate(out, "MUX2", den, f"{out}_prev", num)
    net.gate(f"{out}_prev", "DFF", out)
    return out


def inference_structure(inst: InferenceInstance, parent="A", child="B") -> BayesStructure:
    return BayesStructure(
        ONE_PARENT_ONE_CHILD,
        {parent: inst.prior},
        {child: ((parent,), (inst.likelihood_neg, inst.likelihood))},
    )


def inference_netlist(inst: InferenceInstance) -> CircuitNetlist:
    return structure_netlist(inference_structure(inst), query=("A", ["B"]), name="inference")


def fusion_netlist(inst: FusionInstance) -> CircuitNetlist:
    """Normalised fusion: products for y and not-y on complementary taps.

    Modality ``i`` has one SNE with a tap at p_i and a negated tap at p_i,
    so the target product (AND of x_i) and the complement product (AND of
    ~x_i) are mutually exclusive; their OR is an exact sum and contains
    the target bitwise. A non-uniform prior scales one side with an extra
    independent stream.
    """
    m = len(inst.modal_posteriors)
    net = CircuitNetlist("fusion")
    xs, nxs = [], []
    for i, p in enumerate(inst.modal_posteriors, 1):
        xs.append(net.source(f"x{i}", f"sne{i}", p))
        nxs.append(net.source(f"nx{i}", f"sne{i}", p, negated=True))

    def chain(prefix, ids):
        acc = ids[0]
        for k, nxt in enumerate(ids[1:], 2):
            acc = net.gate(f"{prefix}{k}" if k < len(ids) else prefix, "AND", acc, nxt)
        return acc

    target = chain("target", xs)
    complement = chain("complement", nxs)
    # relative weights 1/p(y)^(M-1) and 1/(1-p(y))^(M-1), scaled so the larger is 1
    ratio = ((1.0 - inst.prior) / inst.prior) ** (m - 1)  # weight(target)/weight(complement)
    if not math.isclose(ratio, 1.0, rel_tol=0, abs_tol=1e-15):
        if ratio < 1.0:
            net.source("w", "sne_w", ratio)
            target = net.gate("target_w", "AND", target, "w")
        else:
            net.source("w", "sne_w", 1.0 / ratio)
            complement = net.gate("complement_w", "AND", complement, "w")
    net.gate("den", "OR", target, complement)
    cordiv_stage(net, target, "den")
    net.sink("posterior", "post")
    for a, b in itertools.combinations(xs, 2):
        net.corr(a, b, UNCORRELATED)
    for x, nx_ in zip(xs, nxs):
        net.corr(x, nx_, NEGATIVE)
    net.corr(target, complement, NEGATIVE)
    net.corr(target, "den", POSITIVE)
    return net


# -- operators -------------------------------------------------------------------

def _run(net, length, seed, mode, params, ou, device_mode, key_nodes):
    run = run_netlist(net, length, seed, mode=mode, params=params, ou=ou,
                      device_mode=device_mode)
    matrix = correlation_matrix({k: run.streams[k] for k in key_nodes}) if key_nodes else []
    return run, matrix


def infer(inst: InferenceInstance, length: int = 100, seed: int = 0, mode: str = IDEAL,
          params: MemristorParams | None = None, ou: OuParams | None = None,
          device_mode: str = IID, correlations: bool = True) -> DecisionReport:
    """Posterior P(A|B) from the stochastic inference circuit."""
    analytic = inst.analytic()  # raises on a zero denominator
    net = inference_netlist(inst)
    keys = ["A", "B|A", "B|~A", "num", "B", "post"] if correlations else None
    run, matrix = _run(net, length, seed, mode, params, ou, device_mode, keys)
    stream = run.outputs["P(A|B)"]
    report = DecisionReport(stream.value, stream, analytic, matrix,
                            frame_latency(length, params), length, seed, inst,
                            list(run.report.warnings), run)
    if not run.streams["B"].bits.any():
        report.warnings.append("denominator stream has no 1-bits; posterior defaults to 0")
    for w in report.warnings:
        warnings.warn(ContractViolation(w), stacklevel=2)
    return report


def fuse(inst: FusionInstance, length: int = 100, seed: int = 0, mode: str = IDEAL,
         params: MemristorParams | None = None, ou: OuParams | None = None,
         device_mode: str = IID, correlations: bool = True) -> DecisionReport:
    """Normalised multimodal posterior p(y | x_1..x_M)."""
    analytic = inst.analytic()  # raises DegenerateFusionError
    net = fusion_netlist(inst)
    m = len(inst.modal_posteriors)
    keys = None
    if correlations:
        keys = [f"x{i}" for i in range(1, m + 1)] + ["target", "complement", "den", "post"]
    run, matrix = _run(net, length, seed, mode, params, ou, device_mode, keys)
    stream = run.outputs["posterior"]
    report = DecisionReport(stream.value, stream, analytic, matrix,
                            frame_latency(length, params), length, seed, inst,
                            list(run.report.warnings), run)
    if not run.streams["den"].bits.any():
        report.warnings.append("denominator stream has no 1-bits; posterior defaults to 0")
    for w in report.warnings:
        warnings.warn(ContractViolation(w), stacklevel=2)
    return report


# -- dependency structures ------------------------------------------------------

def structure_analytic(st: BayesStructure) -> dict:
    """Exact marginals of every child and, for one-parent shapes, P(parent | child)."""
    roots = list(st.roots)
    out = {}
    joint = []  # (assignment dict, probability)
    for vals in itertools.product((False, True), repeat=len(roots)):
        pr = math.prod(st.roots[r] if v else 1 - st.roots[r] for r, v in zip(roots, vals))
        joint.append((dict(zip(roots, vals)), pr))
    for child, (parents, table) in st.children.items():
        total = 0.0
        for assign, pr in joint:
            idx = int("".join("1" if assign[p] else "0" for p in parents), 2)
            total += pr * table[idx]
        out[f"P({child})"] = total
    if len(roots) == 1:
        (a,) = roots
        for child, (parents, table) in st.children.items():
            try:
                out[f"P({a}|{child})"] = bayes_posterior(st.roots[a], table[1], table[0])
            except DivisionUndefinedError:
                out[f"P({a}|{child})"] = None
    else:
        (child, (parents, table)), = st.children.items()
        pb = out[f"P({child})"]
        for i, a in enumerate(parents):
            num = sum(pr * table[int("".join("1" if asg[p] else "0" for p in parents), 2)]
                      for asg, pr in joint if asg[a])
            out[f"P({a}|{child})"] = num / pb if pb > 0 else None
    return out


def structure_eval(kind: str, tables: dict, length: int = 100, seed: int = 0,
                   mode: str = IDEAL, **kw) -> dict:
    """Marginals (and parent posteriors) of a supported dependency structure.

    ``tables`` keys by kind, with child tables in binary counting order
    (see :class:`BayesStructure`):

    * one-parent-one-child: ``prior``, ``child`` (2 entries)
    * two-parent-one-child: ``priors`` (2), ``child`` (4 entries)
    * one-parent-two-child: ``prior``, ``children`` (two 2-entry tables)
    """
    st = structure_from_tables(kind, tables)
    analytic = structure_analytic(st)
    sim = {}
    net = structure_netlist(st, name=kind)
    run = run_netlist(net, length, seed, mode=mode, **kw)
    sim.update(run.report.probabilities)
    for child, (parents, _) in st.children.items():
        for a in parents:
            key = f"P({a}|{child})"
            if analytic.get(key) is None:
                continue
            qnet = structure_netlist(st, query=(a, [child]), name=kind)
            sim[key] = run_netlist(qnet, length, seed, mode=mode, **kw).outputs[key].value
    return {"analytic": analytic, "simulated": sim, "netlist": net}


def structure_from_tables(kind: str, tables: dict) -> BayesStructure:
    try:
        if kind == ONE_PARENT_ONE_CHILD:
            return BayesStructure(kind, {"A": tables["prior"]}, {"B": (("A",), tuple(tables["child"]))})
        if kind == TWO_PARENT_ONE_CHILD:
            p1, p2 = tables["priors"]
            return BayesStructure(kind, {"A1": p1, "A2": p2},
                                  {"B": (("A1", "A2"), tuple(tables["child"]))})
        if kind == ONE_PARENT_TWO_CHILD:
            t1, t2 = tables["children"]
            return BayesStructure(kind, {"A": tables["prior"]},
                                  {"B1": (("A",), tuple(t1)), "B2": (("A",), tuple(t2))})
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed tables for {kind}: {exc}") from None
    raise InvalidInputError(f"unknown structure {kind!r}")
