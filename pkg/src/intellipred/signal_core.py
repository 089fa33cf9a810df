"""Deterministic audio primitives: WAV I/O, convolution, speech-weighted power, SNR mixing."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.signal import fftconvolve

PathLike = Union[str, Path]

# Product-of-lengths threshold below which convolution uses the exact direct
# sum; above it, FFT convolution (still within 1e-9 absolute of the direct sum
# for unit-scale audio).
_DIRECT_CONV_LIMIT = 1 << 24

# Default speech-weighting: linear-phase windowed-sinc band-pass FIR.
DEFAULT_WEIGHTING_TAPS = 65
DEFAULT_WEIGHTING_BAND_HZ = (300.0, 5000.0)
DEFAULT_WEIGHTING_RATE = 16000

# 16-bit scaling uses the symmetric fixed-point divisor 32768 (not 32767)
# so golden files are stable.
_PCM16_SCALE = 32768.0

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003


class WavFormatError(ValueError):
    """Raised for structurally malformed RIFF/WAVE files."""


class UnsupportedWavError(ValueError):
    """Raised for well-formed WAV files using a codec/bit depth/channel count we do not read."""


class SampleRateMismatchError(ValueError):
    """Raised when an operation combines signals (or a filter) with differing sample rates."""


@dataclass(frozen=True)
class Waveform:
    """Mono PCM sample sequence with its sample rate.

    Samples are dimensionless real amplitudes (nominal range [-1, 1]) held as
    float64; all samples must be finite and the sample rate positive.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform samples must be 1-D, got shape {samples.shape}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class WeightingFilter:
    """FIR weighting filter tied to the sample rate it was designed for.

    Applying it to a signal at any other rate is an error; there is no
    implicit resampling anywhere in this package.
    """

    taps: np.ndarray
    design_sample_rate: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("weighting filter needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("weighting filter taps must be finite")
        if int(self.design_sample_rate) <= 0:
            raise ValueError(f"design_sample_rate must be positive, got {self.design_sample_rate}")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "design_sample_rate", int(self.design_sample_rate))


def identity_weighting(sample_rate: int) -> WeightingFilter:
    """Single-tap pass-through filter (no spectral weighting)."""
    return WeightingFilter(taps=np.array([1.0]), design_sample_rate=sample_rate)


def default_weighting(sample_rate: int = DEFAULT_WEIGHTING_RATE) -> WeightingFilter:
    """Default speech-weighting filter: 65-tap linear-phase band-pass FIR.

    Windowed-sinc design (Hamming window), 300-5000 Hz passband. The curve is
    a documented stand-in for "speech-weighted"; substitute an exact filter
    via ``load_weighting`` when one is mandated.
    """
    ntaps = DEFAULT_WEIGHTING_TAPS
    lo, hi = DEFAULT_WEIGHTING_BAND_HZ
    if hi >= sample_rate / 2.0:
        raise ValueError(
            f"passband edge {hi} Hz not below Nyquist for rate {sample_rate}"
        )
    mid = (ntaps - 1) / 2.0
    n = np.arange(ntaps) - mid
    h = (2.0 * hi / sample_rate) * np.sinc(2.0 * hi / sample_rate * n) - (
        2.0 * lo / sample_rate
    ) * np.sinc(2.0 * lo / sample_rate * n)
    window = 0.54 - 0.46 * np.cos(2.0 * np.pi * np.arange(ntaps) / (ntaps - 1))
    return WeightingFilter(taps=h * window, design_sample_rate=sample_rate)


def load_weighting(path: PathLike) -> WeightingFilter:
    """Read a weighting filter from text: first line ``# rate=<Hz>``, then one tap per line."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip().startswith("#"):
        raise ValueError(f"{path}: first line must be '# rate=<Hz>'")
    header = lines[0].lstrip("#").strip()
    if not header.startswith("rate="):
        raise ValueError(f"{path}: first line must be '# rate=<Hz>', got {lines[0]!r}")
    rate = int(header[len("rate="):])
    taps = [float(s) for s in (ln.strip() for ln in lines[1:]) if s]
    if not taps:
        raise ValueError(f"{path}: no filter coefficients found")
    return WeightingFilter(taps=np.array(taps), design_sample_rate=rate)


def save_weighting(f: WeightingFilter, path: PathLike) -> None:
    lines = [f"# rate={f.design_sample_rate}"]
    lines += [format(t, ".17g") for t in f.taps]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_wav(path: PathLike, channel: str = "mean") -> Waveform:
    """Read a RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit, 1 or 2 channels).

    16-bit samples are scaled by 1/32768. Stereo collapses to mono by channel
    mean unless ``channel`` selects "left" or "right".
    """
    if channel not in ("left", "right", "mean"):
        raise ValueError(f"channel must be left/right/mean, got {channel!r}")
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise WavFormatError(f"{path}: too short for a RIFF header ({len(raw)} bytes)")
    if raw[0:4] != b"RIFF":
        raise WavFormatError(f"{path}: missing RIFF magic, got {raw[0:4]!r}")
    if raw[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: missing WAVE form type, got {raw[8:12]!r}")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + chunk_size]
        if len(body) < chunk_size:
            raise WavFormatError(
                f"{path}: chunk {chunk_id!r} claims {chunk_size} bytes, "
                f"only {len(body)} present"
            )
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavFormatError(f"{path}: fmt chunk of {chunk_size} bytes (< 16)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavFormatError(f"{path}: no fmt chunk")
    if data is None:
        raise WavFormatError(f"{path}: no data chunk")

    format_tag, n_channels, sample_rate, _, _, bits = fmt
    if n_channels not in (1, 2):
        raise UnsupportedWavError(f"{path}: {n_channels} channels (only 1 or 2 supported)")
    if format_tag == _WAVE_FORMAT_PCM:
        if bits != 16:
            raise UnsupportedWavError(f"{path}: {bits}-bit PCM (only 16-bit supported)")
        frames = np.frombuffer(data, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedWavError(f"{path}: {bits}-bit float (only 32-bit supported)")
        frames = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedWavError(f"{path}: format tag 0x{format_tag:04x} (PCM/IEEE float only)")

    if n_channels == 2:
        if frames.size % 2:
            raise WavFormatError(f"{path}: stereo data chunk holds {frames.size} samples (odd)")
        frames = frames.reshape(-1, 2)
        if channel == "left":
            frames = frames[:, 0]
        elif channel == "right":
            frames = frames[:, 1]
        else:
            frames = frames.mean(axis=1)
    return Waveform(samples=frames, sample_rate=sample_rate)


def write_wav(w: Waveform, path: PathLike) -> None:
    """Write a mono IEEE float-32 WAV; read_wav(write_wav(w)) is bit-exact on f32 content."""
    if len(w) and not np.all(np.isfinite(w.samples)):
        raise ValueError("write_wav: non-finite sample; nothing written")
    payload = np.asarray(w.samples, dtype="<f4").tobytes()
    n_bytes = len(payload)
    rate = w.sample_rate
    block_align = 4
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 4 + (8 + 16) + (8 + 4) + (8 + n_bytes)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, _WAVE_FORMAT_IEEE_FLOAT, 1, rate,
                    rate * block_align, block_align, 32),
        b"fact",
        struct.pack("<II", 4, len(w)),
        b"data",
        struct.pack("<I", n_bytes),
    ])
    Path(path).write_bytes(header + payload)


def convolve(w: Waveform, rir: Waveform) -> Waveform:
    """Full linear convolution; output length len(w) + len(rir) - 1.

    Uses the exact direct sum for small inputs and FFT convolution for large
    ones; the fast path stays within 1e-9 absolute of the direct sum.
    """
    if w.sample_rate != rir.sample_rate:
        raise SampleRateMismatchError(
            f"convolve: sample rates differ ({w.sample_rate} vs {rir.sample_rate})"
        )
    if len(w) == 0 or len(rir) == 0:
        raise ValueError("convolve: empty input")
    if len(w) * len(rir) <= _DIRECT_CONV_LIMIT:
        out = np.convolve(w.samples, rir.samples, mode="full")
    else:
        out = fftconvolve(w.samples, rir.samples, mode="full")
    return Waveform(samples=out, sample_rate=w.sample_rate)


def _filter_same_length(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Trim the full convolution back to len(x), compensating the linear-phase
    # group delay of (ntaps - 1) // 2 samples.
    full = np.convolve(x, taps, mode="full")
    delay = (taps.size - 1) // 2
    return full[delay:delay + x.size]


def weighted_power(w: Waveform, f: WeightingFilter) -> float:
    """Mean power of the weighted signal: mean of squared samples after filtering."""
    if len(w) == 0:
        raise ValueError("weighted_power: empty waveform")
    if w.sample_rate != f.design_sample_rate:
        raise SampleRateMismatchError(
            f"weighted_power: signal at {w.sample_rate} Hz but filter designed "
            f"for {f.design_sample_rate} Hz"
        )
    filtered = _filter_same_length(w.samples, f.taps)
    return float(np.mean(filtered * filtered))


def gain_for_snr(speech: Waveform, noise: Waveform, snr_db: float, f: WeightingFilter) -> float:
    """Amplitude gain g such that mix(speech, g*noise) has speech-weighted SNR snr_db.

    g = sqrt(P_s / (P_n * 10^(snr_db / 10))) with P_s, P_n the weighted powers.
    """
    p_s = weighted_power(speech, f)
    p_n = weighted_power(noise, f)
    if p_s <= 0.0:
        raise ValueError("gain_for_snr: speech has zero weighted power")
    if p_n <= 0.0:
        raise ValueError("gain_for_snr: noise has zero weighted power")
    return float(np.sqrt(p_s / (p_n * 10.0 ** (snr_db / 10.0))))


def mix(a: Waveform, b: Waveform) -> Waveform:
    """Elementwise sum; the shorter signal is zero-padded at the tail."""
    if a.sample_rate != b.sample_rate:
        raise SampleRateMismatchError(
            f"mix: sample rates differ ({a.sample_rate} vs {b.sample_rate})"
        )
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=np.float64)
    out[:len(a)] += a.samples
    out[:len(b)] += b.samples
    return Waveform(samples=out, sample_rate=a.sample_rate)


def scale(w: Waveform, g: float) -> Waveform:
    """Amplitude-scaled copy of w."""
    return Waveform(samples=w.samples * g, sample_rate=w.sample_rate)
