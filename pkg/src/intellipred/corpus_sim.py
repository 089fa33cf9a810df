"""Reproducible generation of a simulated noisy-reverberant speech corpus.

Each utterance is convolved with a randomly chosen room impulse response and
mixed with a randomly chosen noise at a speech-weighted SNR drawn uniformly
from [snr_low, snr_high]. All randomness is counter-based: the draws for
utterance i depend only on (seed, i), so generation order (or parallelism)
cannot change the output, and re-runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.random import Generator, Philox

from .signal_core import (
    PathLike,
    SampleRateMismatchError,
    Waveform,
    WeightingFilter,
    convolve,
    default_weighting,
    gain_for_snr,
    load_weighting,
    mix,
    read_wav,
    scale,
    write_wav,
)

MANIFEST_HEADER = ["utterance_id", "speech_id", "rir_id", "noise_id", "snr_db", "output_path"]


@dataclass
class SimulationSpec:
    """Everything needed to (re)generate a corpus deterministically."""

    seed: int
    speech_manifest: list[tuple[str, str]]
    rir_manifest: list[tuple[str, str]]
    noise_manifest: list[tuple[str, str]]
    output_dir: str
    snr_low: float = -6.0
    snr_high: float = 6.0
    weighting: Optional[WeightingFilter] = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.snr_low > self.snr_high:
            raise ValueError(f"snr_low {self.snr_low} > snr_high {self.snr_high}")
        for name in ("speech_manifest", "rir_manifest", "noise_manifest"):
            entries = getattr(self, name)
            ids = [e[0] for e in entries]
            if len(set(ids)) != len(ids):
                dup = sorted({i for i in ids if ids.count(i) > 1})
                raise ValueError(f"{name}: duplicate ids {dup}")


@dataclass(frozen=True)
class CorpusManifestEntry:
    utterance_id: str
    speech_id: str
    rir_id: str
    noise_id: str
    snr_db: float
    output_path: str


def _utterance_rng(seed: int, utterance_index: int) -> Generator:
    # Philox keyed on the corpus seed with the utterance index in the counter:
    # the stream for (seed, i) is independent of every other call.
    return Generator(Philox(key=seed, counter=[0, 0, 0, utterance_index]))


def _draw_condition(g: Generator, spec: SimulationSpec) -> tuple[int, int, float]:
    if not spec.rir_manifest or not spec.noise_manifest:
        raise ValueError("sample_condition: empty RIR or noise manifest")
    rir_idx = int(g.integers(len(spec.rir_manifest)))
    noise_idx = int(g.integers(len(spec.noise_manifest)))
    snr_db = float(g.uniform(spec.snr_low, spec.snr_high))
    return rir_idx, noise_idx, snr_db


def sample_condition(spec: SimulationSpec, utterance_index: int) -> tuple[str, str, float]:
    """Sampled (rir_id, noise_id, snr_db) for one utterance, determined by (seed, index)."""
    g = _utterance_rng(spec.seed, utterance_index)
    rir_idx, noise_idx, snr_db = _draw_condition(g, spec)
    return spec.rir_manifest[rir_idx][0], spec.noise_manifest[noise_idx][0], snr_db


def _noise_segment(noise: Waveform, target_len: int, g: Generator) -> Waveform:
    """Noise fitted to target_len: random-offset crop if longer, seeded circular loop if shorter."""
    n = len(noise)
    if n >= target_len:
        offset = int(g.integers(0, n - target_len + 1))
        seg = noise.samples[offset:offset + target_len]
    else:
        offset = int(g.integers(0, n))
        rolled = np.roll(noise.samples, -offset)
        reps = -(-target_len // n)
        seg = np.tile(rolled, reps)[:target_len]
    return Waveform(samples=seg, sample_rate=noise.sample_rate)


def _simulate_one(spec: SimulationSpec, channel: str, index: int) -> CorpusManifestEntry:
    speech_id, speech_path = spec.speech_manifest[index]
    g = _utterance_rng(spec.seed, index)
    rir_idx, noise_idx, snr_db = _draw_condition(g, spec)
    rir_id, rir_path = spec.rir_manifest[rir_idx]
    noise_id, noise_path = spec.noise_manifest[noise_idx]

    speech = read_wav(speech_path, channel=channel)
    rir = read_wav(rir_path, channel=channel)
    noise = read_wav(noise_path, channel=channel)
    if not (speech.sample_rate == rir.sample_rate == noise.sample_rate):
        raise SampleRateMismatchError(
            f"utterance {speech_id}: rates differ (speech {speech.sample_rate}, "
            f"rir {rir.sample_rate}, noise {noise.sample_rate}); no resampling is done"
        )

    reverberant = convolve(speech, rir)
    segment = _noise_segment(noise, len(reverberant), g)
    weighting = spec.weighting or default_weighting(speech.sample_rate)
    try:
        gain = gain_for_snr(reverberant, segment, snr_db, weighting)
    except ValueError as e:
        raise ValueError(f"utterance {speech_id}: {e}") from e
    noisy = mix(reverberant, scale(segment, gain))

    out_path = str(Path(spec.output_dir) / f"{speech_id}.wav")
    write_wav(noisy, out_path)
    return CorpusManifestEntry(
        utterance_id=speech_id,
        speech_id=speech_id,
        rir_id=rir_id,
        noise_id=noise_id,
        snr_db=snr_db,
        output_path=out_path,
    )


def simulate_corpus(
    spec: SimulationSpec, channel: str = "mean", jobs: int = 1
) -> list[CorpusManifestEntry]:
    """Generate the corpus; returns the manifest in speech-manifest order.

    Byte-identical outputs for identical spec. Per-utterance work is
    independent, so jobs > 1 parallelizes without changing any output.
    """
    if not spec.speech_manifest:
        raise ValueError("simulate_corpus: empty speech manifest")
    if not spec.rir_manifest or not spec.noise_manifest:
        raise ValueError("simulate_corpus: empty RIR or noise manifest")
    Path(spec.output_dir).mkdir(parents=True, exist_ok=True)
    indices = range(len(spec.speech_manifest))
    if jobs <= 1:
        return [_simulate_one(spec, channel, i) for i in indices]
    worker = partial(_simulate_one, spec, channel)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, indices))


def write_manifest(entries: Sequence[CorpusManifestEntry], path: PathLike) -> None:
    """Write the corpus manifest CSV (snr_db with 6 fractional digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for e in entries:
            writer.writerow(
                [e.utterance_id, e.speech_id, e.rir_id, e.noise_id,
                 format(e.snr_db, ".6f"), e.output_path]
            )


def read_manifest(path: PathLike) -> list[CorpusManifestEntry]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ValueError(f"{path}: expected header {MANIFEST_HEADER}, got {header}")
        return [
            CorpusManifestEntry(row[0], row[1], row[2], row[3], float(row[4]), row[5])
            for row in reader
        ]


def load_spec(path: PathLike) -> SimulationSpec:
    """Load a SimulationSpec from JSON; "weighting" is a filter file path or null for the default."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    required = ["seed", "speech_manifest", "rir_manifest", "noise_manifest", "output_dir"]
    for key in required:
        if key not in doc:
            raise ValueError(f"{path}: missing field {key!r}")
    weighting = None
    if doc.get("weighting"):
        weighting = load_weighting(doc["weighting"])
    return SimulationSpec(
        seed=int(doc["seed"]),
        speech_manifest=[(str(i), str(p)) for i, p in doc["speech_manifest"]],
        rir_manifest=[(str(i), str(p)) for i, p in doc["rir_manifest"]],
        noise_manifest=[(str(i), str(p)) for i, p in doc["noise_manifest"]],
        output_dir=str(doc["output_dir"]),
        snr_low=float(doc.get("snr_low", -6.0)),
        snr_high=float(doc.get("snr_high", 6.0)),
        weighting=weighting,
    )
