"""Two-parameter logistic re-scaling of raw predictor scores to intelligibility.

The mapping is f(x) = 1 / (1 + exp(a*x + b)). Fitting minimizes mean squared
error against measured intelligibility in [0, 1]: a coarse grid search over
(a, b) followed by damped Gauss-Newton from the best grid point. The procedure
is deterministic and never returns a worse MSE than the best grid point.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .signal_core import PathLike

# Grid searched before the local refinement.
GRID_A = (-50.0, 50.0, 0.5)
GRID_B = (-20.0, 20.0, 0.5)
_MAX_ITERATIONS = 200
_STEP_TOL = 1e-10
# exp argument clamp: keeps exp() finite while preserving strictly
# positive/sub-unity outputs (exp(-745) is still a positive subnormal).
_Z_CLAMP = 745.0
_ONE_MINUS = 1.0 - 2.0 ** -53

FIT_CSV_HEADER = ["utterance_id", "score", "intelligibility"]


@dataclass(frozen=True)
class MappingParams:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"mapping parameters must be finite, got ({self.a}, {self.b})")


def logistic_apply(p: MappingParams, x: float) -> float:
    """f(x) = 1 / (1 + exp(a*x + b)), overflow-safe, always in (0, 1)."""
    if not math.isfinite(x):
        raise ValueError(f"logistic_apply: non-finite input {x}")
    z = p.a * x + p.b
    if z >= 0.0:
        e = math.exp(-min(z, _Z_CLAMP))
        return e / (1.0 + e)
    e = math.exp(max(z, -_Z_CLAMP))
    return min(1.0 / (1.0 + e), _ONE_MINUS)


def _logistic_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    z = np.clip(a * x + b, -709.0, 709.0)
    return 1.0 / (1.0 + np.exp(z))


def _mse(a: float, b: float, x: np.ndarray, y: np.ndarray) -> float:
    r = _logistic_vec(a, b, x) - y
    return float(np.mean(r * r))


def fit_logistic(pairs: Sequence[tuple[float, float]]) -> MappingParams:
    """Fit (a, b) to (score, intelligibility) pairs by least squares.

    Requires at least 2 pairs with at least 2 distinct scores and
    intelligibility in [0, 1].
    """
    if len(pairs) < 2:
        raise ValueError(f"insufficient data: need at least 2 pairs, got {len(pairs)}")
    x = np.array([p[0] for p in pairs], dtype=np.float64)
    y = np.array([p[1] for p in pairs], dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in fit data")
    if np.unique(x).size < 2:
        raise ValueError("all scores identical; mapping is unidentifiable")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("intelligibility values must lie in [0, 1]")

    a_lo, a_hi, a_step = GRID_A
    b_lo, b_hi, b_step = GRID_B
    a_grid = np.arange(a_lo, a_hi + a_step / 2, a_step)
    b_grid = np.arange(b_lo, b_hi + b_step / 2, b_step)
    best_a, best_b, best_mse = 0.0, 0.0, np.inf
    # Chunked over a to bound memory at len(b_grid) * len(x) per step.
    for a in a_grid:
        z = np.clip(a * x[None, :] + b_grid[:, None], -709.0, 709.0)
        r = 1.0 / (1.0 + np.exp(z)) - y[None, :]
        mses = np.mean(r * r, axis=1)
        k = int(np.argmin(mses))
        if mses[k] < best_mse:
            best_a, best_b, best_mse = float(a), float(b_grid[k]), float(mses[k])

    a, b = _gauss_newton(best_a, best_b, x, y)
    return MappingParams(a=a, b=b)


def _gauss_newton(a: float, b: float, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Damped Gauss-Newton refinement; accepts only improving steps, so the
    returned MSE never exceeds the starting point's."""
    lam = 1e-3
    err = _mse(a, b, x, y)
    for _ in range(_MAX_ITERATIONS):
        f = _logistic_vec(a, b, x)
        r = f - y
        w = f * (1.0 - f)
        j_a = -w * x
        j_b = -w
        jtj = np.array(
            [[np.dot(j_a, j_a), np.dot(j_a, j_b)], [np.dot(j_a, j_b), np.dot(j_b, j_b)]]
        )
        jtr = np.array([np.dot(j_a, r), np.dot(j_b, r)])
        try:
            delta = np.linalg.solve(jtj + lam * np.eye(2), -jtr)
        except np.linalg.LinAlgError:
            break
        cand_a, cand_b = a + float(delta[0]), b + float(delta[1])
        cand_err = _mse(cand_a, cand_b, x, y)
        if cand_err < err:
            a, b, err = cand_a, cand_b, cand_err
            lam = max(lam / 10.0, 1e-12)
            if float(np.linalg.norm(delta)) < _STEP_TOL:
                break
        else:
            if float(np.linalg.norm(delta)) < _STEP_TOL:
                break
            lam *= 10.0
            if lam > 1e12:
                break
    return a, b


def save_params(p: MappingParams, path: PathLike) -> None:
    """JSON {"a":...,"b":...} with 17 significant digits (exact round-trip)."""
    text = '{"a":%s,"b":%s}' % (format(p.a, ".17g"), format(p.b, ".17g"))
    Path(path).write_text(text, encoding="utf-8")


def load_params(path: PathLike) -> MappingParams:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: malformed params JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: params document must be a JSON object")
    for key in ("a", "b"):
        if key not in doc:
            raise ValueError(f"{path}: missing parameter {key!r}")
    return MappingParams(a=float(doc["a"]), b=float(doc["b"]))


def save_params_map(params: dict[str, MappingParams], path: PathLike) -> None:
    """Per-subset parameter file: JSON {subset: {"a":...,"b":...}}."""
    parts = []
    for subset in sorted(params):
        p = params[subset]
        parts.append(
            '%s:{"a":%s,"b":%s}'
            % (json.dumps(subset), format(p.a, ".17g"), format(p.b, ".17g"))
        )
    Path(path).write_text("{" + ",".join(parts) + "}", encoding="utf-8")


def load_params_map(path: PathLike) -> dict[str, MappingParams]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: malformed params JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: params document must be a JSON object")
    out = {}
    for subset, entry in doc.items():
        if not isinstance(entry, dict) or "a" not in entry or "b" not in entry:
            raise ValueError(f"{path}: subset {subset!r} entry needs 'a' and 'b'")
        out[subset] = MappingParams(a=float(entry["a"]), b=float(entry["b"]))
    return out


def is_params_map(path: PathLike) -> bool:
    """True when the file holds per-subset parameters rather than a single (a, b)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return isinstance(doc, dict) and not ("a" in doc and "b" in doc)


def read_fit_csv(path: PathLike) -> list[tuple[str, float, float]]:
    """Rows of the fit input CSV (utterance_id,score,intelligibility)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FIT_CSV_HEADER:
            raise ValueError(f"{path}: expected header {FIT_CSV_HEADER}, got {header}")
        return [(r[0], float(r[1]), float(r[2])) for r in reader if r]
