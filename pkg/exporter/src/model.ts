/**
 * A tiny deterministic encoder-decoder stand-in for a pretrained ASR.
 *
 * The real systems this adapter targets are black boxes with two relevant
 * behaviours: they expose per-step decoder hidden states, and their beam
 * gets flatter as the acoustics degrade. This model reproduces both from
 * first principles, with weights derived from a seed in the model
 * descriptor, so exports are bit-reproducible and need no weight files.
 *
 * Encoder: framed band-energy analysis pooled into one context vector per
 * decoding step, plus a tonality estimate derived from log spectral flatness
 * that scales the decoder logits. Harmonically structured audio has very
 * uneven band energies (flatness near 0) and yields confident, peaked
 * distributions; broadband noise floods every band (flatness near 1) and
 * flattens the beam.
 *
 * Decoder: a two-layer recurrent cell over token embeddings and the step
 * context. Either layer can be exported as the representation sequence.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface ModelConfig {
  kind: string;
  sampleRate: number;
  frameLen: number;
  hop: number;
  bands: number;
  decoderDim: number;
  vocab: number;
  maxSteps: number;
  logitScale: number;
  seed: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  kind: "toy-encdec-v1",
  sampleRate: 16000,
  frameLen: 400,
  hop: 160,
  bands: 24,
  decoderDim: 24,
  vocab: 32,
  maxSteps: 10,
  logitScale: 50.0,
  seed: 1315423911,
};

export const BOS = 0;
export const EOS = 1;

/** mulberry32: small deterministic PRNG for weight derivation. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function matrix(rand: () => number, rows: number, cols: number, scale: number): Float64Array {
  const m = new Float64Array(rows * cols);
  for (let i = 0; i < m.length; i++) {
    m[i] = (2 * rand() - 1) * scale;
  }
  return m;
}

export interface Model {
  config: ModelConfig;
  embed: Float64Array; // vocab x D
  wH: Float64Array; // D x D
  wC: Float64Array; // D x bands
  b1: Float64Array; // D
  w2: Float64Array; // D x D
  b2: Float64Array; // D
  wOut: Float64Array; // vocab x D
  bandFreqs: Float64Array;
}

export function initModelDir(dir: string, overrides: Partial<ModelConfig> = {}): ModelConfig {
  const config = { ...DEFAULT_CONFIG, ...overrides };
  fs.mkdirSync(dir, { recursive: true });
  fs.writeFileSync(path.join(dir, "model.json"), JSON.stringify(config, null, 2) + "\n");
  return config;
}

export function loadModel(dir: string): Model {
  const descriptor = path.join(dir, "model.json");
  let config: ModelConfig;
  try {
    config = { ...DEFAULT_CONFIG, ...JSON.parse(fs.readFileSync(descriptor, "utf-8")) };
  } catch (e) {
    throw new Error(`model load failure: ${descriptor}: ${(e as Error).message}`);
  }
  if (config.kind !== "toy-encdec-v1") {
    throw new Error(`model load failure: unknown model kind ${JSON.stringify(config.kind)}`);
  }
  const rand = mulberry32(config.seed);
  const d = config.decoderDim;
  const model: Model = {
    config,
    embed: matrix(rand, config.vocab, d, 1.0),
    wH: matrix(rand, d, d, 0.6 / Math.sqrt(d)),
    wC: matrix(rand, d, config.bands, 1.2 / Math.sqrt(config.bands)),
    b1: matrix(rand, d, 1, 0.1),
    w2: matrix(rand, d, d, 1.0 / Math.sqrt(d)),
    b2: matrix(rand, d, 1, 0.1),
    wOut: matrix(rand, config.vocab, d, 1.0 / Math.sqrt(d)),
    bandFreqs: logSpacedBands(config.bands),
  };
  return model;
}

function logSpacedBands(count: number): Float64Array {
  // 150 Hz .. 6 kHz, log-spaced: covers speech-ish structure at 16 kHz
  const lo = 150;
  const hi = 6000;
  const freqs = new Float64Array(count);
  for (let k = 0; k < count; k++) {
    freqs[k] = lo * Math.pow(hi / lo, k / (count - 1));
  }
  return freqs;
}

/** Goertzel power of one frequency over a frame. */
function bandPower(samples: Float64Array, start: number, len: number, freq: number, rate: number): number {
  const w = (2 * Math.PI * freq) / rate;
  const coeff = 2 * Math.cos(w);
  let s0 = 0;
  let s1 = 0;
  let s2 = 0;
  for (let i = 0; i < len; i++) {
    s0 = samples[start + i] + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  return (s1 * s1 + s2 * s2 - coeff * s1 * s2) / len;
}

export interface Encoding {
  /** One unit-norm log band-energy context per decoding step. */
  contexts: Float64Array[];
  /** Tonal structure in [0, 1]: ~1 for clean harmonic audio, ~0 for
   *  broadband noise or silence. Drives decoder confidence. */
  tonality: number;
}

export function encode(model: Model, audio: Float64Array): Encoding {
  const { frameLen, hop, bands, maxSteps, sampleRate } = model.config;
  const frameCount = Math.max(1, Math.floor((audio.length - frameLen) / hop) + 1);
  const energies: Float64Array[] = [];
  let tonalitySum = 0;
  for (let f = 0; f < frameCount; f++) {
    const start = Math.min(f * hop, Math.max(0, audio.length - frameLen));
    const len = Math.min(frameLen, audio.length - start);
    const e = new Float64Array(bands);
    let total = 0;
    let logSum = 0;
    for (let k = 0; k < bands; k++) {
      const p = len > 0 ? bandPower(audio, start, len, model.bandFreqs[k], sampleRate) : 0;
      e[k] = p;
      total += p;
      logSum += Math.log(p + 1e-12);
    }
    // log spectral flatness, compressed to [0, 1]: geomean/mean is ~1 for
    // broadband noise and collapses towards 0 for harmonic structure
    const flatness = Math.exp(logSum / bands) / (total / bands + 1e-12);
    tonalitySum += Math.min(1, Math.max(0, -Math.log(flatness + 1e-300) / 10));
    energies.push(e);
  }
  const tonality = tonalitySum / frameCount;

  // pool frames into maxSteps blocks: decoding step t reads block t
  const contexts: Float64Array[] = [];
  for (let t = 0; t < maxSteps; t++) {
    const lo = Math.floor((t * frameCount) / maxSteps);
    const hi = Math.max(lo + 1, Math.floor(((t + 1) * frameCount) / maxSteps));
    const c = new Float64Array(bands);
    for (let f = lo; f < hi; f++) {
      for (let k = 0; k < bands; k++) {
        c[k] += Math.log(energies[f][k] + 1e-12);
      }
    }
    let norm = 0;
    for (let k = 0; k < bands; k++) {
      c[k] /= hi - lo;
      norm += c[k] * c[k];
    }
    norm = Math.sqrt(norm) || 1;
    for (let k = 0; k < bands; k++) {
      c[k] /= norm;
    }
    contexts.push(c);
  }
  return { contexts, tonality };
}

/**
 * Decoder temperature for an utterance. Cubic in tonality so confidence
 * collapses fast as structure drowns in noise: halving tonality cuts the
 * scale 8x, which outweighs any lucky peak in a noisy logit pattern.
 */
export function confidenceScale(model: Model, encoding: Encoding): number {
  return model.config.logitScale * encoding.tonality ** 3;
}

export interface StepOutput {
  h1: Float64Array;
  h2: Float64Array;
  logProbs: Float64Array;
}

/** One decoder step: consume the previous token, emit next-token log probs. */
export function decoderStep(
  model: Model,
  prev: Float64Array | null,
  token: number,
  context: Float64Array,
  scale: number,
): StepOutput {
  const d = model.config.decoderDim;
  const bands = model.config.bands;
  const h1 = new Float64Array(d);
  for (let i = 0; i < d; i++) {
    let acc = model.b1[i] + model.embed[token * d + i];
    if (prev) {
      for (let j = 0; j < d; j++) {
        acc += model.wH[i * d + j] * prev[j];
      }
    }
    for (let k = 0; k < bands; k++) {
      acc += model.wC[i * bands + k] * context[k];
    }
    h1[i] = Math.tanh(acc);
  }
  const h2 = new Float64Array(d);
  for (let i = 0; i < d; i++) {
    let acc = model.b2[i];
    for (let j = 0; j < d; j++) {
      acc += model.w2[i * d + j] * h1[j];
    }
    h2[i] = Math.tanh(acc);
  }
  const vocab = model.config.vocab;
  const raw = new Float64Array(vocab);
  let mean = 0;
  for (let v = 0; v < vocab; v++) {
    let acc = 0;
    for (let j = 0; j < d; j++) {
      acc += model.wOut[v * d + j] * h2[j];
    }
    raw[v] = acc;
    mean += acc;
  }
  mean /= vocab;
  let variance = 0;
  for (let v = 0; v < vocab; v++) {
    variance += (raw[v] - mean) * (raw[v] - mean);
  }
  const std = Math.sqrt(variance / vocab) || 1e-12;
  // standardize, then cube: the expansion around the top ranks makes runner-up
  // deviations expensive when the audio is confident, so beam spread tracks
  // `scale` instead of the luck of near-tied logits
  const logits = new Float64Array(vocab);
  let max = -Infinity;
  for (let v = 0; v < vocab; v++) {
    const z = (raw[v] - mean) / std;
    logits[v] = scale * z * z * z;
    if (logits[v] > max) max = logits[v];
  }
  let sum = 0;
  for (let v = 0; v < vocab; v++) {
    sum += Math.exp(logits[v] - max);
  }
  const logZ = max + Math.log(sum);
  const logProbs = new Float64Array(vocab);
  for (let v = 0; v < vocab; v++) {
    logProbs[v] = logits[v] - logZ;
  }
  return { h1, h2, logProbs };
}
