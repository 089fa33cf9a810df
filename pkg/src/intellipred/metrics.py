"""Evaluation metrics between predicted and measured intelligibility:
RMSE, normalized cross-correlation (Pearson), and Kendall's tau-b."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .signal_core import PathLike

EVAL_INPUT_HEADER = ["subset", "utterance_id", "pred", "truth"]
REPORT_HEADER = ["subset", "rmse", "ncc", "kt", "n"]


@dataclass(frozen=True)
class EvalReport:
    subset_id: str
    rmse: float
    ncc: float
    kt: float
    n: int


def rmse(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Root mean square error."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size == 0:
        raise ValueError("rmse of empty lists")
    d = p - t
    return float(np.sqrt(np.mean(d * d)))


def ncc(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Normalized cross-correlation: the Pearson correlation coefficient."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size < 2:
        raise ValueError("ncc needs at least 2 pairs")
    pc = p - p.mean()
    tc = t - t.mean()
    ss_p = float(np.dot(pc, pc))
    ss_t = float(np.dot(tc, tc))
    if ss_p == 0.0 or ss_t == 0.0:
        raise ValueError("undefined correlation: zero variance")
    return float(np.dot(pc, tc) / math.sqrt(ss_p * ss_t))


def kendall_tau(pred: Sequence[float], truth: Sequence[float]) -> float:
    """Kendall's tau-b: (C - D) / sqrt((C+D+T_p) * (C+D+T_t)).

    C and D count concordant/discordant pairs; T_p and T_t count pairs tied
    only in pred / only in truth (both-tied pairs enter neither factor).
    Counts are exact integers, so any faster implementation must match this
    value bit for bit.
    """
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    n = p.size
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 pairs")
    if np.unique(p).size < 2:
        raise ValueError("all values tied in pred")
    if np.unique(t).size < 2:
        raise ValueError("all values tied in truth")

    concordant = discordant = tied_pred_only = tied_truth_only = 0
    for i in range(n - 1):
        dp = np.sign(p[i] - p[i + 1:])
        dt = np.sign(t[i] - t[i + 1:])
        prod = dp * dt
        concordant += int(np.count_nonzero(prod > 0))
        discordant += int(np.count_nonzero(prod < 0))
        tied_pred_only += int(np.count_nonzero((dp == 0) & (dt != 0)))
        tied_truth_only += int(np.count_nonzero((dp != 0) & (dt == 0)))

    denom_p = concordant + discordant + tied_pred_only
    denom_t = concordant + discordant + tied_truth_only
    return (concordant - discordant) / math.sqrt(denom_p * denom_t)


def evaluate(rows: Sequence[tuple[str, str, float, float]]) -> list[EvalReport]:
    """One EvalReport per subset, in subset-id order.

    Rows are (subset, utterance_id, pred, truth); each subset needs at least
    2 pairs. Metric errors are re-raised annotated with the subset id.
    """
    by_subset: dict[str, list[tuple[float, float]]] = {}
    for subset, _, pred, truth in rows:
        by_subset.setdefault(str(subset), []).append((float(pred), float(truth)))
    reports = []
    for subset in sorted(by_subset):
        pairs = by_subset[subset]
        preds = [p for p, _ in pairs]
        truths = [t for _, t in pairs]
        try:
            reports.append(
                EvalReport(
                    subset_id=subset,
                    rmse=rmse(preds, truths),
                    ncc=ncc(preds, truths),
                    kt=kendall_tau(preds, truths),
                    n=len(pairs),
                )
            )
        except ValueError as e:
            raise ValueError(f"subset {subset}: {e}") from e
    return reports


def read_eval_rows(path: PathLike) -> list[tuple[str, str, float, float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVAL_INPUT_HEADER:
            raise ValueError(f"{path}: expected header {EVAL_INPUT_HEADER}, got {header}")
        return [(r[0], r[1], float(r[2]), float(r[3])) for r in reader if r]


def write_report_csv(reports: Sequence[EvalReport], path: PathLike) -> None:
    """Report CSV with the three metrics at 3 fractional digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER)
        for r in reports:
            writer.writerow(
                [r.subset_id, format(r.rmse, ".3f"), format(r.ncc, ".3f"),
                 format(r.kt, ".3f"), r.n]
            )


def format_report_table(groups: Sequence[tuple[str, Sequence[EvalReport]]]) -> str:
    """Aligned plain-text table; one caption row per group of subset rows."""
    header = ["Subset", "RMSE", "NCC", "KT", "n"]
    body: list[list[str]] = []
    for _, reports in groups:
        for r in reports:
            body.append(
                [r.subset_id, format(r.rmse, ".3f"), format(r.ncc, ".3f"),
                 format(r.kt, ".3f"), str(r.n)]
            )
    widths = [
        max(len(header[c]), *(len(row[c]) for row in body)) if body else len(header[c])
        for c in range(len(header))
    ]
    total = sum(widths) + 2 * (len(header) - 1)

    def fmt_row(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    lines = [fmt_row(header), "-" * total]
    k = 0
    for label, reports in groups:
        lines.append(f"[ {label} ]".center(total).rstrip())
        for _ in reports:
            lines.append(fmt_row(body[k]))
            k += 1
    return "\n".join(lines) + "\n"
