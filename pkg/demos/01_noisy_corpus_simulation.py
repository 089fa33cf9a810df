"""
Simulating a noisy-reverberant corpus at controlled speech-weighted SNR
=======================================================================

Builds a tiny synthetic corpus (tonal "speech", a decaying random RIR, and
white noise), renders each utterance at a seeded random SNR in [-6, 6] dB,
and then re-measures the realized SNR of every output to show the mixer
hits its target.
"""

import tempfile
from pathlib import Path

import numpy as np

from intellipred import SimulationSpec, convolve, default_weighting, read_wav, simulate_corpus, weighted_power
from intellipred.signal_core import Waveform, write_wav

rate = 16000
rng = np.random.default_rng(42)
work = Path(tempfile.mkdtemp(prefix="corpus_demo_"))

# Three synthetic "utterances": tone complexes with a little texture.
speech_manifest = []
for k in range(3):
    t = np.arange(int(0.5 * rate)) / rate
    f0 = 220 + 60 * k
    sig = 0.25 * np.sin(2 * np.pi * f0 * t) + 0.1 * np.sin(2 * np.pi * 3 * f0 * t)
    sig += 0.02 * rng.normal(size=t.size)
    path = work / f"speech{k}.wav"
    write_wav(Waveform(samples=sig, sample_rate=rate), path)
    speech_manifest.append((f"utt{k}", str(path)))

# One room impulse response: direct path plus exponentially decaying tail.
h = np.zeros(400)
h[0] = 1.0
h[1:] = 0.3 * rng.normal(size=399) * np.exp(-np.arange(1, 400) / 60.0)
rir_path = work / "rir.wav"
write_wav(Waveform(samples=h, sample_rate=rate), rir_path)

# One noise bed, shorter than the utterances so the looping path is exercised.
noise = 0.2 * rng.normal(size=int(0.3 * rate))
noise_path = work / "noise.wav"
write_wav(Waveform(samples=noise, sample_rate=rate), noise_path)

spec = SimulationSpec(
    seed=7,
    speech_manifest=speech_manifest,
    rir_manifest=[("room", str(rir_path))],
    noise_manifest=[("white", str(noise_path))],
    output_dir=str(work / "out"),
)
entries = simulate_corpus(spec)

print(f"corpus written to {spec.output_dir}\n")
print("utterance   rir    noise   target dB   measured dB")
w = default_weighting(rate)
for e in entries:
    speech = read_wav(dict(speech_manifest)[e.speech_id])
    reverberant = convolve(speech, read_wav(str(rir_path)))
    out = read_wav(e.output_path)
    noise_part = Waveform(samples=out.samples - reverberant.samples, sample_rate=rate)
    measured = 10 * np.log10(weighted_power(reverberant, w) / weighted_power(noise_part, w))
    print(f"{e.utterance_id:<11} {e.rir_id:<6} {e.noise_id:<7} "
          f"{e.snr_db:>9.3f}   {measured:>11.3f}")

print("\nre-running with the same seed reproduces the files byte for byte;")
print("the per-utterance draws depend only on (seed, utterance index).")
