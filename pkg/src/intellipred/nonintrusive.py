"""Non-intrusive intelligibility scoring: negative entropy of the decoding beam.

The beam's hypothesis log scores are softmax-normalized into a posterior; the
score is minus its Shannon entropy in nats. 0 means a fully confident beam
(predicting high intelligibility); the floor for an N-hypothesis beam is
-ln(N), reached when the posterior is uniform.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .interchange import BeamSet, read_beam
from .intrusive import PREDICTIONS_HEADER, write_predictions_csv
from .signal_core import PathLike

BEAM_PAIRING_HEADER = ["utterance_id", "beam_path"]


def beam_posterior(b: BeamSet, length_norm: bool = False) -> np.ndarray:
    """Softmax over hypothesis scores (max-subtracted for stability).

    With length_norm, each score is first divided by its token count
    (min 1); this changes the posterior and is off by default.
    """
    scores = b.scores()
    if length_norm:
        lengths = np.array([max(1, len(h.tokens)) for h in b.hypotheses], dtype=np.float64)
        scores = scores / lengths
    shifted = scores - scores.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def negative_entropy(b: BeamSet, length_norm: bool = False) -> float:
    """Sum of p*ln(p) over the beam posterior (0*ln 0 := 0); always <= 0, in nats."""
    p = beam_posterior(b, length_norm=length_norm)
    nonzero = p[p > 0.0]
    return float(np.sum(nonzero * np.log(nonzero)))


def _score_beam(length_norm: bool, row: tuple[str, str]) -> tuple[str, float]:
    utterance_id, beam_path = row
    return utterance_id, negative_entropy(read_beam(beam_path), length_norm=length_norm)


def score_beam_csv(
    pairing_csv: PathLike,
    out_csv: PathLike,
    length_norm: bool = False,
    jobs: int = 1,
) -> int:
    """Batch mode: pairing CSV (utterance_id,beam_path) in, predictions CSV out."""
    with open(pairing_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != BEAM_PAIRING_HEADER:
            raise ValueError(
                f"{pairing_csv}: expected header {BEAM_PAIRING_HEADER}, got {header}"
            )
        rows = [(r[0], r[1]) for r in reader if r]
    if jobs <= 1:
        results = [_score_beam(length_norm, row) for row in rows]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(partial(_score_beam, length_norm), rows))
    write_predictions_csv(results, out_csv)
    return len(results)
