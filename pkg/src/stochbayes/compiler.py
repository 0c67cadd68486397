"""Front end for small Bayesian-network descriptions (``.bnet``) and their
compilation to stochastic-logic netlists.

Grammar::

    program    = "network" IDENT "{" { node } query "}" ;
    node       = "node" IDENT [ "|" IDENT { "," IDENT } ] "{" { entry [ ";" ] } "}" ;
    entry      = prob "(" IDENT [ "|" literal { "," literal } ] ")" "=" NUMBER ;
    literal    = [ "~" | "!" ] IDENT ;
    query      = "query" prob "(" IDENT [ "|" IDENT { "," IDENT } ] ")" [ ";" ] ;
    prob       = "P" | "p" ;

``#`` starts a comment that runs to the end of the line. A root node gives
``P(X) = v``; a child gives one entry per combination of parent values.

Only three topologies are accepted: one parent with one child, two parents
with one shared child, and one parent with two children.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .bayes import (ONE_PARENT_ONE_CHILD, ONE_PARENT_TWO_CHILD, TWO_PARENT_ONE_CHILD,
                    BayesStructure, structure_netlist)
from .errors import DslError, InvalidInputError, UnsupportedStructureError
from .netlist import CircuitNetlist

__all__ = ["NetworkSpec", "CompilePlan", "parse", "compile_spec", "compile_text", "emit", "load",
           "classify"]


# -- lexer ----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}()|,=;~!])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, filename)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tk = "punct" if kind == "punct" else kind
            out.append(Token(tk, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# -- AST ------------------------------------------------------------------------

Span = tuple  # (line, col)


@dataclass
class Entry:
    node: str
    given: tuple  # ((parent, value), ...)
    value: float
    span: Span


@dataclass
class NodeDecl:
    name: str
    parents: tuple
    entries: list
    span: Span


@dataclass
class Query:
    target: str
    evidence: tuple
    span: Span


@dataclass
class NetworkSpec:
    name: str
    nodes: dict  # name -> NodeDecl, declaration order
    query: Query
    source_span: Span = (1, 1)
    filename: str = "<input>"

    @property
    def edges(self) -> list:
        return [(p, n.name) for n in self.nodes.values() for p in n.parents]

    def prior(self, name: str) -> float:
        (entry,) = self.nodes[name].entries
        return entry.value

    def table(self, name: str) -> tuple:
        """Child table in binary counting order of the parent values."""
        node = self.nodes[name]
        lookup = {tuple(v for _, v in e.given): e.value for e in node.entries}
        k = len(node.parents)
        order = [tuple(bool(i >> (k - 1 - j) & 1) for j in range(k)) for i in range(2 ** k)]
        return tuple(lookup[o] for o in order)


class _Parser:
    def __init__(self, tokens, filename):
        self.toks = tokens
        self.i = 0
        self.filename = filename

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return DslError(msg, tok.line, tok.col, self.filename)

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect(self, text=None, kind=None) -> Token:
        tok = self.cur
        ok = (text is None or tok.text == text) and (kind is None or tok.kind == kind)
        if not ok:
            want = repr(text) if text else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            raise self.error(f"expected {want}, found {got}")
        return self.advance()

    def accept(self, text) -> bool:
        if self.cur.text == text and self.cur.kind != "eof":
            self.advance()
            return True
        return False

    def ident(self) -> Token:
        return self.expect(kind="ident")

    def prob_head(self):
        tok = self.cur
        if tok.kind != "ident" or tok.text not in ("P", "p"):
            raise self.error(f"expected 'P(', found {tok.text!r}")
        self.advance()
        self.expect("(")
        return tok

    def program(self) -> NetworkSpec:
        start = self.expect("network")
        name = self.ident().text
        self.expect("{")
        nodes = {}
        query = None
        while self.cur.text != "}":
            if self.cur.kind == "eof":
                raise self.error("unexpected end of input; missing '}'")
            if self.cur.text == "node":
                decl = self.node()
                if decl.name in nodes:
                    raise DslError(f"duplicate node {decl.name!r}", *decl.span, self.filename)
                nodes[decl.name] = decl
            elif self.cur.text == "query":
                if query is not None:
                    raise self.error("only one query is allowed")
                query = self.query()
            else:
                raise self.error(f"expected 'node' or 'query', found {self.cur.text!r}")
        self.expect("}")
        if self.cur.kind != "eof":
            raise self.error(f"trailing input {self.cur.text!r}")
        if query is None:
            raise DslError("missing query", start.line, start.col, self.filename)
        return NetworkSpec(name, nodes, query, (start.line, start.col), self.filename)

    def node(self) -> NodeDecl:
        kw = self.expect("node")
        name = self.ident().text
        parents = []
        if self.accept("|"):
            parents.append(self.ident().text)
            while self.accept(","):
                parents.append(self.ident().text)
        self.expect("{")
        entries = []
        while not self.accept("}"):
            if self.cur.kind == "eof":
                raise self.error("unexpected end of input inside node body")
            entries.append(self.entry())
            self.accept(";")
        return NodeDecl(name, tuple(parents), entries, (kw.line, kw.col))

    def entry(self) -> Entry:
        head = self.prob_head()
        var = self.ident().text
        given = []
        if self.accept("|"):
            given.append(self.literal())
            while self.accept(","):
                given.append(self.literal())
        self.expect(")")
        self.expect("=")
        num = self.cur
        if num.kind != "number":
            raise self.error(f"expected a probability literal, found {num.text!r}")
        self.advance()
        value = float(num.text)
        if not 0.0 <= value <= 1.0:
            raise self.error(f"probability literal {num.text} outside [0, 1]", num)
        return Entry(var, tuple(given), value, (head.line, head.col))

    def literal(self):
        neg = self.accept("~") or self.accept("!")
        return (self.ident().text, not neg)

    def query(self) -> Query:
        kw = self.expect("query")
        self.prob_head()
        target = self.ident().text
        evidence = []
        if self.accept("|"):
            evidence.append(self.ident().text)
            while self.accept(","):
                evidence.append(self.ident().text)
        self.expect(")")
        self.accept(";")
        return Query(target, tuple(evidence), (kw.line, kw.col))


def parse(text: str, filename: str = "<input>") -> NetworkSpec:
    """Parse and semantically check a network description."""
    spec = _Parser(tokenize(text, filename), filename).program()
    _check(spec)
    return spec


def _check(spec: NetworkSpec) -> None:
    fn = spec.filename
    for node in spec.nodes.values():
        for p in node.parents:
            if p not in spec.nodes:
                raise DslError(f"node {node.name!r}: unknown parent {p!r}", *node.span, fn)
        if len(set(node.parents)) != len(node.parents):
            raise DslError(f"node {node.name!r}: repeated parent", *node.span, fn)
        seen = {}
        for e in node.entries:
            if e.node != node.name:
                raise DslError(f"entry for {e.node!r} inside node {node.name!r}", *e.span, fn)
            names = tuple(g for g, _ in e.given)
            if set(names) != set(node.parents) or len(names) != len(node.parents):
                want = ",".join(node.parents) or "nothing"
                raise DslError(f"entry must condition on exactly {want}", *e.span, fn)
            key = tuple(dict(e.given)[p] for p in node.parents)
            if key in seen:
                raise DslError(f"duplicate entry for {node.name!r}", *e.span, fn)
            seen[key] = e
            e.given = tuple((p, dict(e.given)[p]) for p in node.parents)
        need = 2 ** len(node.parents)
        if len(seen) != need:
            raise DslError(
                f"node {node.name!r} needs {need} probability entries, found {len(seen)}",
                *node.span, fn)
    _check_acyclic(spec)
    q = spec.query
    for v in (q.target, *q.evidence):
        if v not in spec.nodes:
            raise DslError(f"query references undeclared node {v!r}", *q.span, fn)
    if q.target in q.evidence:
        raise DslError("query target also listed as evidence", *q.span, fn)


def _check_acyclic(spec: NetworkSpec) -> None:
    state = {}

    def visit(name, trail):
        if state.get(name) == "done":
            return
        if state.get(name) == "open":
            cyc = " -> ".join(trail[trail.index(name):] + [name])
            raise DslError(f"cyclic dependency {cyc}", *spec.nodes[name].span, spec.filename)
        state[name] = "open"
        for p in spec.nodes[name].parents:
            visit(p, trail + [name])
        state[name] = "done"

    for n in spec.nodes:
        visit(n, [])


# -- compilation ----------------------------------------------------------------

@dataclass
class CompilePlan:
    netlist: CircuitNetlist
    sne_allocation: dict = field(default_factory=dict)  # variable -> {"sne": id, "taps": [...]}
    constraints: list = field(default_factory=list)
    kind: str | None = None


def classify(spec: NetworkSpec) -> str:
    roots = [n for n in spec.nodes.values() if not n.parents]
    kids = [n for n in spec.nodes.values() if n.parents]
    if len(roots) == 1 and len(kids) == 1 and kids[0].parents == (roots[0].name,):
        return ONE_PARENT_ONE_CHILD
    if (len(roots) == 2 and len(kids) == 1
            and set(kids[0].parents) == {r.name for r in roots}):
        return TWO_PARENT_ONE_CHILD
    if len(roots) == 1 and len(kids) == 2 and all(k.parents == (roots[0].name,) for k in kids):
        return ONE_PARENT_TWO_CHILD
    edges = ", ".join(f"{a}->{b}" for a, b in spec.edges) or "no edges"
    first = next(iter(spec.nodes.values()), None)
    line, col = first.span if first else spec.source_span
    raise UnsupportedStructureError(
        f"unsupported structure with edges {{{edges}}}; expected one-parent-one-child, "
        f"two-parent-one-child or one-parent-two-child", line, col, spec.filename)


def compile_spec(spec: NetworkSpec) -> CompilePlan:
    """Lower a checked network to a netlist plus its SNE allocation."""
    kind = classify(spec)
    roots = {n.name: spec.prior(n.name) for n in spec.nodes.values() if not n.parents}
    children = {n.name: (n.parents, spec.table(n.name))
                for n in spec.nodes.values() if n.parents}
    try:
        st = BayesStructure(kind, roots, children)
        q = spec.query
        net = structure_netlist(st, query=(q.target, list(q.evidence)), name=spec.name)
    except InvalidInputError as exc:
        raise DslError(str(exc), *spec.query.span, spec.filename) from None
    return _plan_from_netlist(net, kind)


def _plan_from_netlist(net: CircuitNetlist, kind=None) -> CompilePlan:
    alloc = {}
    for s in net.sources:
        var = s.stream_id.split("|", 1)[0]
        slot = alloc.setdefault(var, {"sne": s.sne_id, "taps": []})
        slot["taps"].append({"stream": s.stream_id, "p": s.p, "negated": s.negated})
    return CompilePlan(net, alloc, list(net.annotations), kind)


def emit(plan: CompilePlan) -> str:
    return plan.netlist.emit()


def load(text: str) -> CompilePlan:
    return _plan_from_netlist(CircuitNetlist.load(text))


def compile_text(text: str, filename: str = "<input>") -> CompilePlan:
    return compile_spec(parse(text, filename))
