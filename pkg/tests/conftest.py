"""Shared fixture builders for synthetic audio and interchange content."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from intellipred.interchange import BeamHypothesis, BeamSet, RepresentationSequence
from intellipred.signal_core import Waveform


def make_pcm16_wav(path, frames, sample_rate=16000, channels=1):
    """Write a PCM 16-bit WAV from int16 frames (frames x channels)."""
    data = np.asarray(frames, dtype="<i2")
    if channels > 1:
        data = data.reshape(-1, channels)
    payload = data.tobytes()
    block_align = 2 * channels
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 4 + 24 + 8 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 1, channels, sample_rate,
                    sample_rate * block_align, block_align, 16),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    path.write_bytes(header + payload)
    return path


def make_float32_wav(path, frames, sample_rate=16000, channels=1):
    """Write an IEEE float-32 WAV from float frames (frames x channels)."""
    data = np.asarray(frames, dtype="<f4")
    if channels > 1:
        data = data.reshape(-1, channels)
    payload = data.tobytes()
    block_align = 4 * channels
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 4 + 24 + 8 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 3, channels, sample_rate,
                    sample_rate * block_align, block_align, 32),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    path.write_bytes(header + payload)
    return path


def wave(samples, rate=16000):
    return Waveform(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate)


def random_repr(rng, frames=None, dim=None, utterance_id="u", layer="decoder"):
    t = int(frames if frames is not None else rng.integers(1, 12))
    d = int(dim if dim is not None else rng.integers(1, 16))
    values = rng.normal(0.0, 1.0, size=(t, d)).astype(np.float32)
    return RepresentationSequence(utterance_id=utterance_id, layer=layer, values=values)


def random_beam(rng, utterance_id="u", max_hyps=10):
    n = int(rng.integers(1, max_hyps + 1))
    hyps = []
    for _ in range(n):
        length = int(rng.integers(1, 8))
        tokens = tuple(int(t) for t in rng.integers(0, 100, size=length))
        hyps.append(BeamHypothesis(tokens=tokens, score=float(rng.normal(-20.0, 10.0))))
    return BeamSet(utterance_id=utterance_id, hypotheses=tuple(hyps))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
