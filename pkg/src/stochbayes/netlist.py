"""Gate netlists: data model, line-oriented text format and cycle-synchronous runner.

Text format, one record per line, tokens separated by single spaces::

    netlist <name>
    sne <sne_id> hold <k>                  # optional, only when k != 1
    source <stream_id> <sne_id> <p> [neg]
    <node_id> <KIND> <input_id> ...
    sink <name> <node_id>
    corr <id> <id> uncorrelated|positive|negative

MUX2 inputs are ``select d0 d1`` (select 1 routes ``d1``); MUX4 inputs are
``s_hi s_lo d00 d01 d10 d11``. Blank lines and ``#`` comments are accepted
on input and never emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import gates
from .bitstream import StochasticNumber, correlation_entry, correlation_matrix
from .device import IID, Memristor, MemristorParams, OuParams
from .encoder import DEVICE, IDEAL, SneUnit, Tap
from .errors import InvalidInputError, NetlistError
from .gates import ARITY, REGIMES, Kind
from .rng import substream

RESERVED = frozenset({"netlist", "sne", "source", "sink", "corr"})


@dataclass(frozen=True)
class Source:
    stream_id: str
    sne_id: str
    p: float
    negated: bool = False


@dataclass(frozen=True)
class GateNode:
    id: str
    kind: Kind
    inputs: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass(frozen=True)
class Annotation:
    x: str
    y: str
    regime: str


@dataclass
class CircuitNetlist:
    name: str = "netlist"
    sources: list = field(default_factory=list)
    nodes: list = field(default_factory=list)
    sinks: list = field(default_factory=list)  # (name, node_id)
    annotations: list = field(default_factory=list)
    sne_hold: dict = field(default_factory=dict)

    # -- construction helpers ---------------------------------------------

    def source(self, stream_id, sne_id, p, negated=False):
        self.sources.append(Source(stream_id, sne_id, float(p), bool(negated)))
        return stream_id

    def gate(self, node_id, kind, *inputs):
        self.nodes.append(GateNode(node_id, Kind(kind), inputs))
        return node_id

    def sink(self, name, node_id):
        self.sinks.append((name, node_id))

    def corr(self, x, y, regime):
        self.annotations.append(Annotation(x, y, regime))

    # -- queries ----------------------------------------------------------

    @property
    def ids(self) -> list:
        return [s.stream_id for s in self.sources] + [n.id for n in self.nodes]

    def sne_ids(self) -> list:
        seen = []
        for s in self.sources:
            if s.sne_id not in seen:
                seen.append(s.sne_id)
        return seen

    def kind_counts(self) -> dict:
        out = {}
        for n in self.nodes:
            out[n.kind.value] = out.get(n.kind.value, 0) + 1
        return out

    def sne_of(self, stream_id):
        for s in self.sources:
            if s.stream_id == stream_id:
                return s.sne_id
        return None

    def validate(self) -> None:
        seen = set()
        for ident in self.ids:
            if ident in RESERVED:
                raise NetlistError(f"identifier {ident!r} is reserved")
            if ident in seen:
                raise NetlistError(f"duplicate identifier {ident!r}")
            seen.add(ident)
        for s in self.sources:
            if not 0.0 <= s.p <= 1.0:
                raise NetlistError(f"source {s.stream_id!r}: probability {s.p!r} outside [0, 1]")
        for n in self.nodes:
            if len(n.inputs) != ARITY[n.kind]:
                raise NetlistError(
                    f"node {n.id!r}: {n.kind.value} takes {ARITY[n.kind]} inputs, got {len(n.inputs)}")
            for i in n.inputs:
                if i not in seen:
                    raise NetlistError(f"node {n.id!r}: unknown input {i!r}")
        for name, node in self.sinks:
            if node not in seen:
                raise NetlistError(f"sink {name!r}: unknown node {node!r}")
        for a in self.annotations:
            if a.regime not in REGIMES:
                raise NetlistError(f"unknown correlation regime {a.regime!r}")
            for i in (a.x, a.y):
                if i not in seen:
                    raise NetlistError(f"corr: unknown stream {i!r}")
        for sne, k in self.sne_hold.items():
            if k < 1:
                raise NetlistError(f"sne {sne!r}: hold must be >= 1")
        comb = self._graph(combinational=True)
        if not nx.is_directed_acyclic_graph(comb):
            cycle = nx.find_cycle(comb)
            path = " -> ".join([u for u, _ in cycle] + [cycle[-1][1]])
            raise NetlistError(f"combinational cycle: {path}")

    def _graph(self, combinational: bool = False) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.ids)
        for n in self.nodes:
            if combinational and n.kind is Kind.DFF:
                continue
            for i in n.inputs:
                g.add_edge(i, n.id)
        return g

    # -- text format --------------------------------------------------------

    def emit(self) -> str:
        lines = [f"netlist {self.name}"]
        for sne, k in self.sne_hold.items():
            if k != 1:
                lines.append(f"sne {sne} hold {k}")
        for s in self.sources:
            tail = " neg" if s.negated else ""
            lines.append(f"source {s.stream_id} {s.sne_id} {s.p!r}{tail}")
        for n in self.nodes:
            lines.append(" ".join([n.id, n.kind.value, *n.inputs]))
        for name, node in self.sinks:
            lines.append(f"sink {name} {node}")
        for a in self.annotations:
            lines.append(f"corr {a.x} {a.y} {a.regime}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "CircuitNetlist":
        net = cls()
        defined = {}
        refs = []  # (lineno, id) checked once everything is declared
        got_header = False
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            head = tok[0]
            try:
                if head == "netlist":
                    if got_header or len(tok) != 2:
                        raise NetlistError("expected a single 'netlist <name>' header", lineno)
                    net.name = tok[1]
                    got_header = True
                elif head == "sne":
                    if len(tok) != 4 or tok[2] != "hold":
                        raise NetlistError("expected 'sne <id> hold <k>'", lineno)
                    net.sne_hold[tok[1]] = int(tok[3])
                elif head == "source":
                    if len(tok) not in (4, 5) or (len(tok) == 5 and tok[4] != "neg"):
                        raise NetlistError("expected 'source <id> <sne> <p> [neg]'", lineno)
                    p = float(tok[3])
                    if not 0.0 <= p <= 1.0 or math.isnan(p):
                        raise NetlistError(f"probability {tok[3]} outside [0, 1]", lineno)
                    _define(defined, tok[1], lineno)
                    net.source(tok[1], tok[2], p, len(tok) == 5)
                elif head == "sink":
                    if len(tok) != 3:
                        raise NetlistError("expected 'sink <name> <node>'", lineno)
                    refs.append((lineno, tok[2]))
                    net.sink(tok[1], tok[2])
                elif head == "corr":
                    if len(tok) != 4 or tok[3] not in REGIMES:
                        raise NetlistError(f"expected 'corr <id> <id> {'|'.join(REGIMES)}'", lineno)
                    refs += [(lineno, tok[1]), (lineno, tok[2])]
                    net.corr(tok[1], tok[2], tok[3])
                else:
                    if len(tok) < 2:
                        raise NetlistError(f"malformed line {line!r}", lineno)
                    try:
                        kind = Kind(tok[1])
                    except ValueError:
                        raise NetlistError(f"unknown gate kind {tok[1]!r}", lineno) from None
                    ins = tok[2:]
                    if len(ins) != ARITY[kind]:
                        raise NetlistError(
                            f"{kind.value} takes {ARITY[kind]} inputs, got {len(ins)}", lineno)
                    _define(defined, head, lineno)
                    refs += [(lineno, i) for i in ins]
                    net.gate(head, kind, *ins)
            except ValueError as exc:
                if isinstance(exc, NetlistError):
                    raise
                raise NetlistError(str(exc), lineno) from None
        if not got_header:
            raise NetlistError("missing 'netlist <name>' header")
        for lineno, ident in refs:
            if ident not in defined:
                raise NetlistError(f"dangling reference to undefined id {ident!r}", lineno)
        net.validate()
        return net


def _define(defined, ident, lineno):
    if ident in RESERVED:
        raise NetlistError(f"identifier {ident!r} is reserved", lineno)
    if ident in defined:
        raise NetlistError(f"duplicate identifier {ident!r} (first defined on line {defined[ident]})",
                           lineno)
    defined[ident] = lineno


# -- execution ----------------------------------------------------------------

@dataclass
class AnnotationCheck:
    x: str
    y: str
    required: str
    pearson: float | None
    scc: float | None
    status: str  # ok | violated | undefined


@dataclass
class CorrelationReport:
    probabilities: dict
    checks: list
    warnings: list
    matrix: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c.status == "violated"]


@dataclass
class NetlistRun:
    outputs: dict  # sink name -> StochasticNumber
    streams: dict  # every id -> StochasticNumber
    report: CorrelationReport
    length: int
    seed: int
    energy: float = 0.0


# thresholds for post-run annotation checks
CORRELATED_MIN_SCC = 0.95
UNCORRELATED_MAX_SCC = 0.05
UNCORRELATED_Z = 4.5


def check_annotation(a: Annotation, sx, sy) -> AnnotationCheck:
    e = correlation_entry(a.x, sx, a.y, sy)
    if e.scc is None or e.pearson is None:
        status = "undefined"
    elif a.regime == gates.POSITIVE:
        status = "ok" if e.scc >= CORRELATED_MIN_SCC else "violated"
    elif a.regime == gates.NEGATIVE:
        status = "ok" if e.scc <= -CORRELATED_MIN_SCC else "violated"
    else:
        # either small in scc terms or statistically indistinguishable from zero
        n = len(sx)
        small = abs(e.scc) < UNCORRELATED_MAX_SCC or abs(e.pearson) * math.sqrt(n) <= UNCORRELATED_Z
        status = "ok" if small else "violated"
    return AnnotationCheck(a.x, a.y, a.regime, e.pearson, e.scc, status)


def _build_snes(net: CircuitNetlist, seed: int, mode: str, params, ou, device_mode):
    snes = {}
    for sne_id in net.sne_ids():
        taps = [Tap(s.p, s.negated) for s in net.sources if s.sne_id == sne_id]
        rng = substream(seed, "sne", sne_id)
        device = None
        if mode == DEVICE:
            device = Memristor(params, ou, mode=device_mode, rng=rng)
        snes[sne_id] = (SneUnit(sne_id, taps, latent_mode=mode, device=device,
                                hold=net.sne_hold.get(sne_id, 1)), rng)
    return snes


def _hold_pattern(net_nodes, scc_ids):
    """Match ``{m: MUX2(sel, ..f.., x), f: DFF(m)}``; returns (mux, sel, x, dff_leg_is_d1)."""
    if len(scc_ids) != 2:
        return None
    a, b = (net_nodes[i] for i in scc_ids)
    for m, f in ((a, b), (b, a)):
        if m.kind is not Kind.MUX2 or f.kind is not Kind.DFF or f.inputs[0] != m.id:
            continue
        sel, d0, d1 = m.inputs
        if sel in scc_ids:
            continue
        if d0 == f.id and d1 not in scc_ids:
            return m, f, sel, d1, False
        if d1 == f.id and d0 not in scc_ids:
            return m, f, sel, d0, True
    return None


def _run_loop(net_nodes, order, values, n):
    """Cycle-by-cycle evaluation of a strongly connected block."""
    state = {i: False for i in order}
    out = {i: np.zeros(n, dtype=np.bool_) for i in order}
    cols = {}
    for i in order:
        for src in net_nodes[i].inputs:
            if src not in order:
                cols[src] = values[src].tolist()
    # DFF outputs are known at cycle start
    for t in range(n):
        cur = {}
        for i in order:
            if net_nodes[i].kind is Kind.DFF:
                cur[i] = state[i]
        for i in order:
            node = net_nodes[i]
            if node.kind is Kind.DFF:
                continue
            ins = [cur[s] if s in cur else cols[s][t] for s in node.inputs]
            cur[i], state[i] = gates.step_gate(node.kind, ins, state[i])
        for i in order:
            node = net_nodes[i]
            if node.kind is Kind.DFF:
                src = node.inputs[0]
                state[i] = cur[src] if src in cur else cols[src][t]
            out[i][t] = cur[i]
    values.update(out)


def run_netlist(net: CircuitNetlist, length: int, seed: int, mode: str = IDEAL,
                params: MemristorParams | None = None, ou: OuParams | None = None,
                device_mode: str = IID, key_nodes=None) -> NetlistRun:
    """Execute ``net`` for ``length`` cycles.

    Per cycle every SNE draws one latent, combinational nodes settle in
    topological order and state elements latch at the cycle end. Evaluation
    is vectorised over cycles; feedback loops through a DFF fall back to a
    per-cycle loop unless they are the MUX-hold idiom used by CORDIV.
    """
    if length < 1:
        raise InvalidInputError("length must be >= 1")
    net.validate()
    snes = _build_snes(net, seed, mode, params, ou, device_mode)
    values = {}
    for sne_id, (unit, rng) in snes.items():
        streams = unit.emit(length, rng)
        ids = [s.stream_id for s in net.sources if s.sne_id == sne_id]
        for sid, st in zip(ids, streams):
            values[sid] = st.bits
    energy = sum(u.device.state.energy_accumulated for u, _ in snes.values() if u.device)

    net_nodes = {n.id: n for n in net.nodes}
    full = net._graph()
    comb = net._graph(combinational=True)
    comb_order = {v: k for k, v in enumerate(nx.topological_sort(comb))}
    cond = nx.condensation(full)
    for comp in nx.topological_sort(cond):
        members = cond.nodes[comp]["members"]
        if all(m in values for m in members):
            continue
        if len(members) == 1:
            (i,) = members
            node = net_nodes[i]
            if not full.has_edge(i, i):
                values[i] = gates.eval_bits(node.kind, [values[s] for s in node.inputs])
                continue
        pat = _hold_pattern(net_nodes, members)
        if pat is not None:
            m, f, sel, x, dff_on_d1 = pat
            s = values[sel]
            q = gates.hold_mux(~s if dff_on_d1 else s, values[x])
            values[m.id] = q
            values[f.id] = gates.dff(q)
            continue
        order = sorted(members, key=comb_order.__getitem__)
        _run_loop(net_nodes, order, values, length)

    streams = {k: StochasticNumber._wrap(v) for k, v in values.items()}
    outputs = {name: streams[node] for name, node in net.sinks}
    checks = [check_annotation(a, streams[a.x], streams[a.y]) for a in net.annotations]
    warn = [f"contract violation: {c.x} / {c.y} required {c.required}, measured scc="
            f"{c.scc:.4f}, pearson={c.pearson:.4f}" for c in checks if c.status == "violated"]
    report = CorrelationReport({k: v.value for k, v in outputs.items()}, checks, warn)
    if key_nodes:
        report.matrix = correlation_matrix({k: streams[k] for k in key_nodes})
    return NetlistRun(outputs, streams, report, length, seed, energy)
