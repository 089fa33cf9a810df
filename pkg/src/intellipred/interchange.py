"""Bit-exact interchange formats decoupling the toolkit from any ASR implementation.

Two formats are defined:

* representation files: magic ``ASRREPR1`` (8 ASCII bytes), a 32-bit
  little-endian unsigned header length H, H bytes of UTF-8 JSON
  ``{"utterance_id":...,"layer":...,"frames":T,"dim":D,"dtype":"f32le"}``,
  then T*D IEEE-754 binary32 little-endian values, row-major;
* beam files: a UTF-8 JSON document
  ``{"utterance_id":..., "hypotheses":[{"tokens":[...],"score":...},...]}``.

These are the sole contract with any external representation/beam producer.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .signal_core import PathLike

REPR_MAGIC = b"ASRREPR1"
REPR_DTYPE = "f32le"


class InterchangeFormatError(ValueError):
    """Raised when an interchange file violates its byte-level or schema contract."""


@dataclass(frozen=True)
class RepresentationSequence:
    """T x D matrix of hidden vectors for one utterance.

    Values are stored as float32 (the payload precision); downstream math
    promotes to float64.
    """

    utterance_id: str
    layer: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(
                f"representation values must be a T x D matrix with T,D >= 1, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("representation contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BeamHypothesis:
    tokens: tuple[int, ...]
    score: float
    token_scores: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        tokens = tuple(int(t) for t in self.tokens)
        if any(t < 0 for t in tokens):
            raise ValueError(f"token ids must be non-negative, got {tokens}")
        score = float(self.score)
        if not math.isfinite(score):
            raise ValueError(f"hypothesis score must be finite, got {score}")
        token_scores = self.token_scores
        if token_scores is not None:
            token_scores = tuple(float(s) for s in token_scores)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "score", score)
        object.__setattr__(self, "token_scores", token_scores)


@dataclass(frozen=True)
class BeamSet:
    """Decoding hypotheses for one utterance, kept sorted by score descending.

    Construction re-sorts (stable, so ties keep input order), so the order on
    disk never matters.
    """

    utterance_id: str
    hypotheses: tuple[BeamHypothesis, ...] = field(default=())

    def __post_init__(self):
        hyps = tuple(self.hypotheses)
        if not hyps:
            raise ValueError(f"beam for {self.utterance_id!r} has no hypotheses")
        if any(len(h.tokens) == 0 for h in hyps) and len(hyps) > 1:
            raise ValueError(
                f"beam for {self.utterance_id!r}: empty token sequence in a multi-hypothesis beam"
            )
        hyps = tuple(sorted(hyps, key=lambda h: -h.score))
        object.__setattr__(self, "hypotheses", hyps)

    def scores(self) -> np.ndarray:
        return np.array([h.score for h in self.hypotheses], dtype=np.float64)


def write_repr(r: RepresentationSequence, path: PathLike) -> None:
    header = json.dumps(
        {
            "utterance_id": r.utterance_id,
            "layer": r.layer,
            "frames": r.frames,
            "dim": r.dim,
            "dtype": REPR_DTYPE,
        },
        separators=(",", ":"),
    ).encode("utf-8")
    payload = np.ascontiguousarray(r.values, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(REPR_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)


def read_repr(path: PathLike) -> RepresentationSequence:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:8] != REPR_MAGIC:
        raise InterchangeFormatError(
            f"{path}: bad magic {raw[:8]!r}, expected {REPR_MAGIC!r}"
        )
    (header_len,) = struct.unpack_from("<I", raw, 8)
    header_end = 12 + header_len
    if header_end > len(raw):
        raise InterchangeFormatError(
            f"{path}: header length mismatch: header claims {header_len} bytes, "
            f"only {len(raw) - 12} present"
        )
    try:
        meta = json.loads(raw[12:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InterchangeFormatError(f"{path}: malformed header JSON: {e}") from e
    for key in ("utterance_id", "layer", "frames", "dim", "dtype"):
        if key not in meta:
            raise InterchangeFormatError(f"{path}: header missing field {key!r}")
    if meta["dtype"] != REPR_DTYPE:
        raise InterchangeFormatError(f"{path}: unknown dtype {meta['dtype']!r}")
    frames, dim = int(meta["frames"]), int(meta["dim"])
    if frames < 1 or dim < 1:
        raise InterchangeFormatError(f"{path}: invalid shape {frames} x {dim}")
    expected = frames * dim * 4
    actual = len(raw) - header_end
    if actual != expected:
        raise InterchangeFormatError(
            f"{path}: payload length mismatch: expected {expected} bytes "
            f"({frames} x {dim} float32), got {actual}"
        )
    values = np.frombuffer(raw[header_end:], dtype="<f4").reshape(frames, dim)
    if not np.all(np.isfinite(values)):
        raise InterchangeFormatError(f"{path}: payload contains non-finite values")
    return RepresentationSequence(
        utterance_id=str(meta["utterance_id"]), layer=str(meta["layer"]), values=values
    )


def write_beam(b: BeamSet, path: PathLike) -> None:
    hyps = []
    for h in b.hypotheses:
        entry = {"tokens": list(h.tokens), "score": h.score}
        if h.token_scores is not None:
            entry["token_scores"] = list(h.token_scores)
        hyps.append(entry)
    doc = {"utterance_id": b.utterance_id, "hypotheses": hyps}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")


def read_beam(path: PathLike) -> BeamSet:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InterchangeFormatError(f"{path}: malformed JSON: {e}") from e
    if not isinstance(doc, dict) or "utterance_id" not in doc or "hypotheses" not in doc:
        raise InterchangeFormatError(
            f"{path}: beam document needs 'utterance_id' and 'hypotheses'"
        )
    raw_hyps = doc["hypotheses"]
    if not isinstance(raw_hyps, list) or not raw_hyps:
        raise InterchangeFormatError(f"{path}: empty hypothesis list")
    hyps = []
    for k, entry in enumerate(raw_hyps):
        try:
            score = float(entry["score"])
        except (KeyError, TypeError, ValueError) as e:
            raise InterchangeFormatError(
                f"{path}: hypothesis {k}: missing or non-numeric score"
            ) from e
        if not math.isfinite(score):
            raise InterchangeFormatError(f"{path}: hypothesis {k}: non-finite score {score}")
        tokens = entry.get("tokens", [])
        token_scores = entry.get("token_scores")
        try:
            hyps.append(
                BeamHypothesis(
                    tokens=tuple(tokens),
                    score=score,
                    token_scores=tuple(token_scores) if token_scores is not None else None,
                )
            )
        except (TypeError, ValueError) as e:
            raise InterchangeFormatError(f"{path}: hypothesis {k}: {e}") from e
    try:
        return BeamSet(utterance_id=str(doc["utterance_id"]), hypotheses=tuple(hyps))
    except ValueError as e:
        raise InterchangeFormatError(f"{path}: {e}") from e


def validate_repr_file(path: PathLike) -> list[str]:
    """Findings for a representation file; empty list means it conforms."""
    try:
        read_repr(path)
    except (InterchangeFormatError, OSError) as e:
        return [str(e)]
    return []


def validate_beam_file(path: PathLike) -> list[str]:
    """Findings for a beam file; empty list means it conforms."""
    try:
        read_beam(path)
    except (InterchangeFormatError, OSError) as e:
        return [str(e)]
    return []


def validate_file(path: PathLike) -> list[str]:
    """Validate either format, sniffing by magic bytes; JSON files are beams."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
    except OSError as e:
        return [str(e)]
    if head == REPR_MAGIC:
        return validate_repr_file(path)
    return validate_beam_file(path)
