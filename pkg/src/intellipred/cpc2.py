"""Listener-metadata ingest: parse CPC2-style JSON records, normalize
correctness to [0, 1], and join predictions for calibration/evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .signal_core import PathLike

# Canonical record field -> source JSON key. Field names vary across metadata
# releases, so the mapping is data, not code; pass a modified copy to
# load_metadata for other schemas.
DEFAULT_FIELD_MAP = {
    "signal_id": "signal",
    "scene_id": "scene",
    "listener_id": "listener",
    "system_id": "system",
    "correctness": "correctness",
    "partition": "partition",
    "split": "split",
    "processed_path": "processed_path",
    "reference_path": "reference_path",
}

_REQUIRED = ("signal_id", "listener_id", "correctness")


class MetadataError(ValueError):
    """Raised for metadata records violating the schema."""


@dataclass(frozen=True)
class SignalRecord:
    signal_id: str
    listener_id: str
    correctness: float
    scene_id: str = ""
    system_id: str = ""
    partition: int = 1
    split: str = "train"
    processed_path: str = ""
    reference_path: Optional[str] = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= float(self.correctness) <= 100.0:
            raise MetadataError(
                f"signal {self.signal_id!r}: correctness {self.correctness} outside [0, 100]"
            )
        if int(self.partition) not in (1, 2, 3):
            raise MetadataError(
                f"signal {self.signal_id!r}: partition {self.partition} not in {{1, 2, 3}}"
            )
        if self.split not in ("train", "eval"):
            raise MetadataError(
                f"signal {self.signal_id!r}: split {self.split!r} not train/eval"
            )

    @property
    def intelligibility(self) -> float:
        """Correctness normalized to [0, 1] (exactly /100, no clipping)."""
        return self.correctness / 100.0


def load_metadata(path: PathLike, field_map: Optional[dict] = None) -> list[SignalRecord]:
    """Parse a JSON array of signal records, preserving input order.

    Requires signal id, listener id and correctness per entry; every other
    field falls back to a default. Source keys not in the field map are kept
    verbatim in the record's ``extras``.
    """
    fmap = dict(DEFAULT_FIELD_MAP if field_map is None else field_map)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise MetadataError(f"{path}: malformed JSON: {e}") from e
    if not isinstance(doc, list):
        raise MetadataError(f"{path}: metadata must be a JSON array")
    records = []
    known_keys = set(fmap.values())
    for k, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise MetadataError(f"{path}: entry at index {k} is not an object")
        for canonical in _REQUIRED:
            if fmap[canonical] not in entry:
                raise MetadataError(
                    f"{path}: field {fmap[canonical]!r} absent at index {k}"
                )
        extras = {key: value for key, value in entry.items() if key not in known_keys}

        def get(canonical, default=None):
            return entry.get(fmap[canonical], default)

        try:
            records.append(
                SignalRecord(
                    signal_id=str(get("signal_id")),
                    listener_id=str(get("listener_id")),
                    correctness=float(get("correctness")),
                    scene_id=str(get("scene_id", "")),
                    system_id=str(get("system_id", "")),
                    partition=int(get("partition", 1)),
                    split=str(get("split", "train")),
                    processed_path=str(get("processed_path", "")),
                    reference_path=(
                        str(get("reference_path"))
                        if get("reference_path") is not None
                        else None
                    ),
                    extras=extras,
                )
            )
        except MetadataError as e:
            raise MetadataError(f"{path}: index {k}: {e}") from e
    return records


def records_to_json(
    records: Sequence[SignalRecord], field_map: Optional[dict] = None
) -> list[dict]:
    """Serialize records back to source-keyed objects (inverse of load_metadata)."""
    fmap = dict(DEFAULT_FIELD_MAP if field_map is None else field_map)
    out = []
    for r in records:
        entry = {
            fmap["signal_id"]: r.signal_id,
            fmap["scene_id"]: r.scene_id,
            fmap["listener_id"]: r.listener_id,
            fmap["system_id"]: r.system_id,
            fmap["correctness"]: r.correctness,
            fmap["partition"]: r.partition,
            fmap["split"]: r.split,
            fmap["processed_path"]: r.processed_path,
        }
        if r.reference_path is not None:
            entry[fmap["reference_path"]] = r.reference_path
        entry.update(r.extras)
        out.append(entry)
    return out


def save_metadata(
    records: Sequence[SignalRecord], path: PathLike, field_map: Optional[dict] = None
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records_to_json(records, field_map), fh, indent=1)


@dataclass(frozen=True)
class JoinResult:
    """Inner join of records and predictions, plus what failed to match."""

    rows: tuple[tuple[str, str, float, float], ...]  # (subset, utterance_id, score, truth)
    unmatched_records: int
    unmatched_predictions: int


def join_predictions(
    records: Sequence[SignalRecord], predictions: Sequence[tuple[str, float]]
) -> JoinResult:
    """Join predictions to records on signal id.

    Prediction ids must be unique. Rows come out in record order as
    (subset=partition, utterance_id, score, truth=correctness/100).
    """
    by_id: dict[str, float] = {}
    for utterance_id, score in predictions:
        if utterance_id in by_id:
            raise ValueError(f"duplicate prediction id {utterance_id!r}")
        by_id[utterance_id] = float(score)
    rows = []
    matched_ids = set()
    for r in records:
        if r.signal_id in by_id:
            matched_ids.add(r.signal_id)
            rows.append(
                (str(r.partition), r.signal_id, by_id[r.signal_id], r.intelligibility)
            )
    return JoinResult(
        rows=tuple(rows),
        unmatched_records=len(records) - len(rows),
        unmatched_predictions=len(by_id) - len(matched_ids),
    )
