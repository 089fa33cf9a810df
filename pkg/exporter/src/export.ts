/**
 * Export orchestration: run the model over one WAV and emit the interchange
 * files. The ASR sits behind the minimal transcribe-with-states surface
 * (encode + beamSearch), so any encoder-decoder with beam search could back
 * this; the bundled toy model is one instantiation.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { beamSearch, Hypothesis } from "./beam.js";
import { writeBeamFile, writeReprFile } from "./interchange.js";
import { BOS, Model, confidenceScale, decoderStep, encode } from "./model.js";
import { readWav } from "./wav.js";

export interface ExportJob {
  audioPath: string;
  utteranceId: string;
  /** "last", "1", or "2": which decoder layer's states to export. */
  layerSelector: string;
  beamSize: number;
  reprPath: string;
  beamPath: string;
  /** Teacher-forcing token sequence; free-running decode when absent. */
  forcedTokens?: number[];
}

export interface ExportResult {
  utteranceId: string;
  frames: number;
  dim: number;
  hypotheses: number;
  reprPath: string;
  beamPath: string;
}

function pickLayer(hyp: { states1: Float64Array[]; states2: Float64Array[] }, selector: string): Float64Array[] {
  if (selector === "last" || selector === "2") return hyp.states2;
  if (selector === "1") return hyp.states1;
  throw new Error(`unknown decoder layer selector ${JSON.stringify(selector)}`);
}

function forcedStates(model: Model, encoding: ReturnType<typeof encode>, tokens: number[]) {
  if (tokens.length < 1) {
    throw new Error("teacher forcing needs at least one token");
  }
  const scale = confidenceScale(model, encoding);
  const states1: Float64Array[] = [];
  const states2: Float64Array[] = [];
  let h: Float64Array | null = null;
  let prev = BOS;
  tokens.forEach((token, step) => {
    const context = encoding.contexts[Math.min(step, encoding.contexts.length - 1)];
    const out = decoderStep(model, h, prev, context, scale);
    states1.push(out.h1);
    states2.push(out.h2);
    h = out.h1;
    prev = token;
  });
  return { states1, states2 };
}

export function runExportJob(model: Model, job: ExportJob): ExportResult {
  let audio;
  try {
    audio = readWav(job.audioPath);
  } catch (e) {
    throw new Error(`audio decode failure: ${(e as Error).message}`);
  }
  if (audio.sampleRate !== model.config.sampleRate) {
    throw new Error(
      `audio decode failure: ${job.audioPath} is at ${audio.sampleRate} Hz, ` +
        `model expects ${model.config.sampleRate} Hz`,
    );
  }
  const encoding = encode(model, audio.samples);
  const hypotheses: Hypothesis[] = beamSearch(model, encoding, job.beamSize);

  const top = hypotheses[0];
  const states = job.forcedTokens
    ? pickLayer(forcedStates(model, encoding, job.forcedTokens), job.layerSelector)
    : pickLayer(top, job.layerSelector);
  const layerTag = `decoder:${job.layerSelector}${job.forcedTokens ? ":forced" : ""}`;
  writeReprFile(job.reprPath, job.utteranceId, layerTag, states);
  writeBeamFile(
    job.beamPath,
    job.utteranceId,
    hypotheses.map((h) => ({ tokens: h.tokens, score: h.score })),
  );
  return {
    utteranceId: job.utteranceId,
    frames: states.length,
    dim: states[0].length,
    hypotheses: hypotheses.length,
    reprPath: job.reprPath,
    beamPath: job.beamPath,
  };
}

export function defaultJob(
  audioPath: string,
  outDir: string,
  overrides: Partial<ExportJob> = {},
): ExportJob {
  const utteranceId = overrides.utteranceId ?? path.basename(audioPath).replace(/\.wav$/i, "");
  fs.mkdirSync(outDir, { recursive: true });
  return {
    audioPath,
    utteranceId,
    layerSelector: "last",
    beamSize: 8,
    reprPath: path.join(outDir, `${utteranceId}.repr`),
    beamPath: path.join(outDir, `${utteranceId}.beam.json`),
    ...overrides,
  };
}
