"""Intrusive intelligibility scoring: similarity between reference and processed
hidden-representation sequences, averaged along a DTW alignment."""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np

from .interchange import RepresentationSequence, read_repr
from .signal_core import PathLike

_NORM_EPS = 1e-12

PAIRING_HEADER = ["utterance_id", "ref_repr_path", "proc_repr_path"]
PREDICTIONS_HEADER = ["utterance_id", "score"]


@dataclass(frozen=True)
class AlignmentPath:
    """Monotone alignment between two frame sequences.

    Starts at (0, 0); consecutive deltas are (1,0), (0,1) or (1,1).
    """

    steps: tuple[tuple[int, int], ...]

    def __post_init__(self):
        steps = tuple((int(i), int(j)) for i, j in self.steps)
        if not steps:
            raise ValueError("alignment path is empty")
        if steps[0] != (0, 0):
            raise ValueError(f"alignment path must start at (0, 0), got {steps[0]}")
        for (i0, j0), (i1, j1) in zip(steps, steps[1:]):
            if (i1 - i0, j1 - j0) not in ((1, 0), (0, 1), (1, 1)):
                raise ValueError(
                    f"illegal alignment step ({i0},{j0}) -> ({i1},{j1})"
                )
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return len(self.steps)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between u and v; 0 when either norm is below 1e-12."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < _NORM_EPS or nv < _NORM_EPS:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _unit_rows(values: np.ndarray) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    out = np.zeros_like(x)
    keep = norms[:, 0] >= _NORM_EPS
    out[keep] = x[keep] / norms[keep]
    return out


def similarity_matrix(ref: RepresentationSequence, proc: RepresentationSequence) -> np.ndarray:
    """T_ref x T_proc matrix of frame cosine similarities (zero rows score 0)."""
    if ref.dim != proc.dim:
        raise ValueError(f"dimension mismatch: ref dim {ref.dim} vs proc dim {proc.dim}")
    return _unit_rows(ref.values) @ _unit_rows(proc.values).T


def dtw_align(
    ref: RepresentationSequence,
    proc: RepresentationSequence,
    band: Optional[int] = None,
) -> AlignmentPath:
    """Minimum-cost monotone alignment under cost 1 - cosine per visited cell.

    Step set {(1,0), (0,1), (1,1)}; backtrace ties prefer (1,1), then (1,0),
    then (0,1). ``band`` is an optional Sakoe-Chiba half-width on |i - j|
    (must admit the corner-to-corner path); None runs the full table.
    """
    return _align_cost_matrix(1.0 - similarity_matrix(ref, proc), band)


def _align_cost_matrix(cost: np.ndarray, band: Optional[int]) -> AlignmentPath:
    t_ref, t_proc = cost.shape
    if band is not None:
        if band < abs(t_ref - t_proc):
            raise ValueError(
                f"band half-width {band} cannot reach the corner for "
                f"lengths {t_ref} x {t_proc}"
            )
        i_idx = np.arange(t_ref)[:, None]
        j_idx = np.arange(t_proc)[None, :]
        cost = np.where(np.abs(i_idx - j_idx) <= band, cost, np.inf)

    acc = np.full((t_ref, t_proc), np.inf)
    acc[0, 0] = cost[0, 0]
    for j in range(1, t_proc):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, t_ref):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
        row_up = acc[i - 1]
        row = acc[i]
        for j in range(1, t_proc):
            row[j] = cost[i, j] + min(row_up[j - 1], row_up[j], row[j - 1])

    steps = [(t_ref - 1, t_proc - 1)]
    i, j = t_ref - 1, t_proc - 1
    while (i, j) != (0, 0):
        if i == 0:
            i, j = 0, j - 1
        elif j == 0:
            i, j = i - 1, 0
        else:
            best = min(acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1])
            if acc[i - 1, j - 1] == best:
                i, j = i - 1, j - 1
            elif acc[i - 1, j] == best:
                i, j = i - 1, j
            else:
                i, j = i, j - 1
        steps.append((i, j))
    steps.reverse()
    return AlignmentPath(steps=tuple(steps))


def path_cost(ref: RepresentationSequence, proc: RepresentationSequence,
              path: AlignmentPath) -> float:
    """Total 1 - cosine cost accumulated along a path, summed in path order."""
    sim = similarity_matrix(ref, proc)
    total = 0.0
    for i, j in path.steps:
        total += 1.0 - sim[i, j]
    return total


def intrusive_score(
    ref: RepresentationSequence,
    proc: RepresentationSequence,
    band: Optional[int] = None,
) -> float:
    """Mean frame cosine similarity along the DTW alignment; in [-1, 1]."""
    if ref.layer != proc.layer:
        warnings.warn(
            f"layer tags differ: ref {ref.layer!r} vs proc {proc.layer!r}",
            stacklevel=2,
        )
    sim = similarity_matrix(ref, proc)
    path = _align_cost_matrix(1.0 - sim, band)
    total = 0.0
    for i, j in path.steps:
        total += sim[i, j]
    return total / len(path)


def _score_pair(band: Optional[int], row: tuple[str, str, str]) -> tuple[str, float]:
    utterance_id, ref_path, proc_path = row
    score = intrusive_score(read_repr(ref_path), read_repr(proc_path), band=band)
    return utterance_id, score


def score_pairing_csv(
    pairing_csv: PathLike,
    out_csv: PathLike,
    band: Optional[int] = None,
    jobs: int = 1,
) -> int:
    """Batch mode: pairing CSV (utterance_id,ref_repr_path,proc_repr_path) in,
    predictions CSV (utterance_id,score) out. Returns the row count."""
    with open(pairing_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PAIRING_HEADER:
            raise ValueError(
                f"{pairing_csv}: expected header {PAIRING_HEADER}, got {header}"
            )
        rows = [(r[0], r[1], r[2]) for r in reader if r]
    if jobs <= 1:
        results = [_score_pair(band, row) for row in rows]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(partial(_score_pair, band), rows))
    write_predictions_csv(results, out_csv)
    return len(results)


def write_predictions_csv(rows: list[tuple[str, float]], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTIONS_HEADER)
        for utterance_id, score in rows:
            writer.writerow([utterance_id, format(score, ".6f")])


def read_predictions_csv(path: PathLike) -> list[tuple[str, float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PREDICTIONS_HEADER:
            raise ValueError(f"{path}: expected header {PREDICTIONS_HEADER}, got {header}")
        return [(r[0], float(r[1])) for r in reader if r]
