"""Command-line entry point.

Exit codes: 0 on success, 1 on a usage or validation error, 2 when a run
finished but a correlation precondition of the circuit was violated.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, gates, repro
from .batch import fuse_batch, read_detections
from .bayes import FusionInstance, InferenceInstance, fuse, infer
from .bitstream import correlation_entry
from .compiler import compile_text, emit
from .device import IID, MODES, OU, Memristor, MemristorParams, frame_latency, load_params
from .encoder import DEVICE, IDEAL, SneUnit, Tap, correlated_pair, tap_summary
from .errors import (ContractViolation, DslError, NetlistError, StochasticError)
from .netlist import CircuitNetlist, run_netlist
from .reports import render, to_csv, to_json
from .rng import derive_seed, fresh_seed, substream

EXIT_OK, EXIT_INVALID, EXIT_CONTRACT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_globals(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="master seed (u64); drawn if omitted")
    p.add_argument("--bits", type=int, default=d(100), help="bitstream length (default 100)")
    p.add_argument("--mode", choices=(IDEAL, DEVICE), default=d(IDEAL))
    p.add_argument("--out", default=d(None), help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--params", default=d(None), help="INI file with [memristor]/[ou] sections")
    p.add_argument("--device-mode", choices=MODES, default=d(IID))


def _prob(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability {text} outside [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stochbayes", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    _add_globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        return p

    p = cmd("encode", "encode probabilities as taps of one SNE")
    p.add_argument("probs", nargs="+", type=_prob)
    p.add_argument("--negate", type=int, nargs="*", default=[], metavar="I",
                   help="0-based indices of taps to negate")
    p.add_argument("--streams", action="store_true", help="include the raw bit strings")

    p = cmd("gate", "evaluate one gate on generated inputs")
    p.add_argument("kind", choices=[k.value for k in gates.Kind if k.value not in ("NOT", "DFF", "MUX4")])
    p.add_argument("pa", type=_prob)
    p.add_argument("pb", type=_prob)
    p.add_argument("--regime", choices=gates.REGIMES, default=gates.UNCORRELATED)
    p.add_argument("--select", type=_prob, default=0.5, help="MUX2 select probability")

    p = cmd("infer", "posterior P(A|B) of the inference operator")
    p.add_argument("--prior", type=_prob, required=True)
    p.add_argument("--likelihood", type=_prob, required=True, help="P(B|A)")
    p.add_argument("--likelihood-neg", type=_prob, required=True, help="P(B|~A)")

    p = cmd("fuse", "fuse single-modality posteriors")
    p.add_argument("posteriors", nargs="+", type=_prob)
    p.add_argument("--prior", type=_prob, default=0.5)

    p = cmd("fuse-batch", "fuse a detection-confidence CSV; writes CSV and JSON")
    p.add_argument("input")
    p.add_argument("--threshold", type=_prob, default=0.5)
    p.add_argument("--jobs", type=int, default=1)

    p = cmd("compile", "compile a .bnet network description to a netlist")
    p.add_argument("source")
    p.add_argument("--run", action="store_true", help="also simulate the compiled netlist")

    p = cmd("run", "simulate a netlist file")
    p.add_argument("netlist")

    p = cmd("device-stats", "threshold-voltage statistics of the device model")
    p.add_argument("--samples", type=int, default=100_000)

    p = cmd("repro", "re-run one worked example and write a pass/fail table")
    p.add_argument("example", choices=repro.EXAMPLES)
    return ap


# -- helpers --------------------------------------------------------------------

class _Ctx:
    def __init__(self, args):
        self.args = args
        self.violations = []
        if args.bits < 1:
            raise UsageError("--bits must be >= 1")
        if args.seed is None:
            args.seed = fresh_seed()
            print(f"seed: {args.seed}", file=sys.stderr)
        elif not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        self.params = self.ou = None
        if args.params:
            self.params, self.ou = load_params(args.params)

    def device_kw(self):
        return {"params": self.params, "ou": self.ou, "device_mode": self.args.device_mode}

    def output(self, records, **extra):
        text = render(records, self.args.format, **extra)
        if self.args.out:
            Path(self.args.out).parent.mkdir(parents=True, exist_ok=True)
            Path(self.args.out).write_text(text)
        else:
            sys.stdout.write(text)


def _run_record(run):
    rec = {"sinks": {k: v.value for k, v in run.outputs.items()},
           "bits": run.length, "seed": run.seed,
           "simulated_latency": frame_latency(run.length),
           "energy": run.energy}
    rec["checks"] = [{"x": c.x, "y": c.y, "required": c.required, "pearson": c.pearson,
                      "scc": c.scc, "status": c.status} for c in run.report.checks]
    return rec


# -- commands -------------------------------------------------------------------

def cmd_encode(ctx):
    a = ctx.args
    bad = [i for i in a.negate if not 0 <= i < len(a.probs)]
    if bad:
        raise UsageError(f"--negate index {bad[0]} out of range")
    taps = [Tap(p, i in a.negate) for i, p in enumerate(a.probs)]
    dev = None
    if a.mode == DEVICE:
        dev = Memristor(ctx.params, ctx.ou, mode=a.device_mode, rng=substream(a.seed, "dev", "sne0"))
    sne = SneUnit("sne0", taps, latent_mode=a.mode, device=dev)
    streams = sne.emit(a.bits, substream(a.seed, "sne", "sne0"))
    recs = []
    for i, (t, s) in enumerate(zip(taps, streams)):
        r = {"tap": i, **tap_summary(t, s, sne)}
        if a.streams:
            r["bits"] = s.to_text()
        recs.append(r)
    ctx.output(recs, seed=a.seed, bits=a.bits, mode=a.mode)


def cmd_gate(ctx):
    a = ctx.args
    regime = gates.POSITIVE if a.kind == "CORDIV" else a.regime
    x, y = correlated_pair(a.pa, a.pb, regime, a.bits, derive_seed(a.seed, "ab"), a.mode)
    rec = {"gate": a.kind, "regime": regime, "pa": a.pa, "pb": a.pb,
           "measured_a": x.value, "measured_b": y.value}
    if a.kind == "MUX2":
        (s,) = SneUnit("s", [Tap(a.select)]).emit(a.bits, substream(a.seed, "sne", "s"))
        out = gates.eval_gate("MUX2", s, x, y)
        rec["select"] = a.select
        rec["expected"] = gates.expected_probability("MUX2", regime, a.pa, a.pb, ps=a.select)
    elif a.kind == "CORDIV":
        out = gates.cordiv(x, y)
        rec["expected"] = a.pa / a.pb if a.pb > 0 and a.pa <= a.pb else None
    else:
        out = gates.eval_gate(a.kind, x, y)
        rec["expected"] = gates.expected_probability(a.kind, regime, a.pa, a.pb)
    rec["output"] = out.value
    e = correlation_entry("a", x, "b", y)
    rec["pearson"], rec["scc"] = e.pearson, e.scc
    ctx.output([rec], seed=a.seed, bits=a.bits, mode=a.mode)


def cmd_infer(ctx):
    a = ctx.args
    inst = InferenceInstance(a.prior, a.likelihood, a.likelihood_neg)
    rep = infer(inst, a.bits, a.seed, mode=a.mode, **ctx.device_kw())
    ctx.violations += rep.run.report.violations
    ctx.output([rep.record()], mode=a.mode)


def cmd_fuse(ctx):
    a = ctx.args
    inst = FusionInstance(tuple(a.posteriors), a.prior)
    rep = fuse(inst, a.bits, a.seed, mode=a.mode, **ctx.device_kw())
    ctx.violations += rep.run.report.violations
    ctx.output([rep.record()], mode=a.mode)


def cmd_fuse_batch(ctx):
    a = ctx.args
    path = Path(a.input)
    records = read_detections(path.read_text())
    rep = fuse_batch(records, a.bits, a.seed, a.mode, a.threshold, ctx.params, a.jobs)
    stem = Path(a.out) if a.out else path.with_name(path.stem + ".fused")
    stem = stem.with_suffix("") if stem.suffix in (".csv", ".json") else stem
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = Path(f"{stem}.csv"), Path(f"{stem}.json")
    csv_path.write_text(to_csv(rep.objects))
    json_path.write_text(to_json(rep.objects, frames=rep.frames, summary=rep.summary,
                                 metadata=rep.metadata))
    for r in rep.flagged:
        print(f"{path}: flagged {r['frame_id']}/{r['object_id']}: {r['flag']}", file=sys.stderr)
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)


def cmd_compile(ctx):
    a = ctx.args
    plan = compile_text(Path(a.source).read_text(encoding="utf-8"), a.source)
    text = emit(plan)
    if a.run:
        run = run_netlist(plan.netlist, a.bits, a.seed, mode=a.mode, **ctx.device_kw())
        ctx.violations += run.report.violations
        rec = _run_record(run)
        rec["kind"] = plan.kind
        rec["sne_allocation"] = plan.sne_allocation
        ctx.output([rec], mode=a.mode)
        return
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(ctx):
    a = ctx.args
    path = Path(a.netlist)
    try:
        net = CircuitNetlist.load(path.read_text(encoding="utf-8"))
    except NetlistError as exc:
        msg = str(exc).split(": ", 1)[1] if exc.line is not None else str(exc)
        raise DslError(msg, exc.line, 1 if exc.line is not None else None, str(path)) from None
    run = run_netlist(net, a.bits, a.seed, mode=a.mode, **ctx.device_kw())
    ctx.violations += run.report.violations
    ctx.output([_run_record(run)], mode=a.mode)


def cmd_device_stats(ctx):
    a = ctx.args
    if a.samples < 2:
        raise UsageError("--samples must be >= 2")
    recs = []
    for mode in (IID, OU):
        dev = Memristor(ctx.params, ctx.ou, mode=mode, rng=substream(a.seed, "stats", mode))
        v = dev.sample(a.samples)
        mean, std = dev.marginal()
        recs.append({"mode": mode, "samples": a.samples,
                     "vth_mean": float(np.mean(v)), "vth_std": float(np.std(v, ddof=1)),
                     "expected_mean": mean, "expected_std": std})
    p = ctx.params or MemristorParams()
    hold = substream(a.seed, "hold").normal(p.vhold_mean, p.vhold_std, a.samples)
    recs.append({"mode": "vhold", "samples": a.samples, "vth_mean": float(hold.mean()),
                 "vth_std": float(hold.std(ddof=1)), "expected_mean": p.vhold_mean,
                 "expected_std": p.vhold_std})
    ctx.output(recs, seed=a.seed, frame_latency=frame_latency(a.bits, p),
               t_switch=p.t_switch, t_relax=p.t_relax, e_switch=p.e_switch)


def cmd_repro(ctx):
    a = ctx.args
    rows = repro.run(a.example, seed=a.seed)
    ctx.output(rows, example=a.example, seed=a.seed)
    passed = sum(r["pass"] for r in rows)
    print(f"{a.example}: {passed}/{len(rows)} checks pass", file=sys.stderr)
    for r in rows:
        if not r["pass"]:
            print(f"  FAIL {r['check']}: measured {r['measured']} expected {r['expected']} "
                  f"tolerance {r['tolerance']}", file=sys.stderr)


COMMANDS = {
    "encode": cmd_encode, "gate": cmd_gate, "infer": cmd_infer, "fuse": cmd_fuse,
    "fuse-batch": cmd_fuse_batch, "compile": cmd_compile, "run": cmd_run,
    "device-stats": cmd_device_stats, "repro": cmd_repro,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        ctx = _Ctx(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ContractViolation)
            COMMANDS[args.command](ctx)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except DslError as exc:
        print(exc.format(), file=sys.stderr)
        return EXIT_INVALID
    except (StochasticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    contract = [w for w in caught if issubclass(w.category, ContractViolation)]
    for w in contract:
        print(f"contract violation: {w.message}", file=sys.stderr)
    for c in ctx.violations:
        print(f"contract violation: {c.x} ~ {c.y} required {c.required} "
              f"(scc={c.scc})", file=sys.stderr)
    return EXIT_CONTRACT if contract or ctx.violations else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
