"""Batch fusion over per-frame detection confidences.

Input is CSV with the header ``frame_id,modality,object_id,confidence``.
Each object is fused over the modalities present in the file; a modality
missing for an object contributes 0.5, which leaves the posterior unchanged.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .bayes import FusionInstance, fuse
from .device import MemristorParams, frame_latency
from .encoder import IDEAL
from .errors import InvalidInputError
from .rng import derive_seed

HEADER = ("frame_id", "modality", "object_id", "confidence")
UNINFORMATIVE = 0.5


@dataclass(frozen=True)
class DetectionRecord:
    frame_id: str
    modality: str
    object_id: str
    confidence: float


class IngestError(InvalidInputError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def read_detections(text: str) -> list[DetectionRecord]:
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise IngestError("empty input", 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise IngestError(f"header must be {','.join(HEADER)}", 1)
    out, seen = [], set()
    for lineno, row in enumerate(rows, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise IngestError(f"expected 4 fields, found {len(row)}", lineno)
        frame, modality, obj, conf = (c.strip() for c in row)
        if not frame or not modality or not obj:
            raise IngestError("empty identifier field", lineno)
        try:
            value = float(conf)
        except ValueError:
            raise IngestError(f"confidence {conf!r} is not a number", lineno) from None
        if not 0.0 <= value <= 1.0 or math.isnan(value):
            raise IngestError(f"confidence {conf} outside [0, 1]", lineno)
        key = (frame, modality, obj)
        if key in seen:
            raise IngestError(f"duplicate record for {key}", lineno)
        seen.add(key)
        out.append(DetectionRecord(frame, modality, obj, value))
    return out


@dataclass
class FusionBatchReport:
    objects: list  # per-object dicts, canonical order
    frames: list  # per-frame dicts
    summary: dict
    metadata: dict
    flagged: list = field(default_factory=list)

    def records(self) -> list:
        return self.objects


def _fuse_one(key, confs, modalities, bits, seed, mode, threshold, params):
    frame, obj = key
    probs = [confs.get(m, UNINFORMATIVE) for m in modalities]
    row = {"frame_id": frame, "object_id": obj}
    for m in modalities:
        row[m] = confs.get(m)
    for m in modalities:
        row[f"{m}_detected"] = confs.get(m, 0.0) >= threshold
    obj_seed = derive_seed(seed, frame, obj)
    try:
        if len(probs) == 1:
            probs = probs + [UNINFORMATIVE]
        rep = fuse(FusionInstance(probs), bits, obj_seed, mode=mode, params=params,
                   correlations=False)
    except ArithmeticError as exc:
        row.update(fused=None, analytic=None, detected=False, flag=str(exc))
        return row
    row.update(fused=rep.posterior, analytic=rep.analytic,
               detected=rep.posterior >= threshold, flag="")
    return row


def fuse_batch(records: list[DetectionRecord], bits: int = 100, seed: int = 0,
               mode: str = IDEAL, threshold: float = 0.5,
               params: MemristorParams | None = None, jobs: int = 1) -> FusionBatchReport:
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInputError("threshold must lie in [0, 1]")
    modalities = sorted({r.modality for r in records})
    grouped = {}
    for r in records:
        grouped.setdefault((r.frame_id, r.object_id), {})[r.modality] = r.confidence
    keys = sorted(grouped)
    args = [(k, grouped[k], modalities, bits, seed, mode, threshold, params) for k in keys]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            rows = list(pool.map(lambda a: _fuse_one(*a), args))
    else:
        rows = [_fuse_one(*a) for a in args]

    latency = frame_latency(bits, params)
    frames = []
    for fid in sorted({k[0] for k in keys}):
        frows = [r for r in rows if r["frame_id"] == fid]
        frames.append({"frame_id": fid, "objects": len(frows),
                       "detected": sum(bool(r["detected"]) for r in frows),
                       "simulated_latency": latency})
    summary = {"objects": len(rows), "fused_detections": sum(bool(r["detected"]) for r in rows),
               "records_in": len(records),
               "records_out": sum(r[m] is not None for r in rows for m in modalities)}
    for m in modalities:
        n = sum(bool(r.get(f"{m}_detected")) for r in rows)
        summary[f"{m}_detections"] = n
        summary[f"delta_vs_{m}"] = summary["fused_detections"] - n
    flagged = [r for r in rows if r["flag"]]
    meta = {"seed": seed, "bits": bits, "mode": mode, "threshold": threshold,
            "modalities": modalities}
    return FusionBatchReport(rows, frames, summary, meta, flagged)
