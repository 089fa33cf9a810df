/**
 * Writers for the two interchange formats the prediction toolkit consumes.
 * These are the sole contract between the exporter and the toolkit:
 *
 *  - representation files: "ASRREPR1" magic, uint32-LE header length, UTF-8
 *    JSON header {utterance_id, layer, frames, dim, dtype:"f32le"}, then
 *    frames*dim float32-LE values row-major;
 *  - beam files: JSON {utterance_id, hypotheses:[{tokens, score}, ...]},
 *    hypotheses sorted by score descending.
 */

import * as fs from "node:fs";

export const REPR_MAGIC = "ASRREPR1";

export function writeReprFile(
  path: string,
  utteranceId: string,
  layer: string,
  frames: Float64Array[],
): void {
  if (frames.length < 1 || frames[0].length < 1) {
    throw new Error(`representation for ${utteranceId} must be at least 1x1`);
  }
  const t = frames.length;
  const d = frames[0].length;
  const header = Buffer.from(
    JSON.stringify({ utterance_id: utteranceId, layer, frames: t, dim: d, dtype: "f32le" }),
    "utf-8",
  );
  const payload = Buffer.alloc(4 * t * d);
  for (let i = 0; i < t; i++) {
    if (frames[i].length !== d) {
      throw new Error(`ragged representation for ${utteranceId} at frame ${i}`);
    }
    for (let j = 0; j < d; j++) {
      const v = frames[i][j];
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite value at (${i}, ${j}) for ${utteranceId}`);
      }
      payload.writeFloatLE(Math.fround(v), 4 * (i * d + j));
    }
  }
  const prefix = Buffer.alloc(12);
  prefix.write(REPR_MAGIC, 0, "latin1");
  prefix.writeUInt32LE(header.length, 8);
  fs.writeFileSync(path, Buffer.concat([prefix, header, payload]));
}

export interface BeamEntry {
  tokens: number[];
  score: number;
}

export function writeBeamFile(path: string, utteranceId: string, hypotheses: BeamEntry[]): void {
  if (hypotheses.length < 1) {
    throw new Error(`beam for ${utteranceId} has no hypotheses`);
  }
  for (const h of hypotheses) {
    if (!Number.isFinite(h.score)) {
      throw new Error(`non-finite score in beam for ${utteranceId}`);
    }
  }
  const sorted = [...hypotheses].sort((a, b) => b.score - a.score);
  const doc = {
    utterance_id: utteranceId,
    hypotheses: sorted.map((h) => ({ tokens: h.tokens, score: h.score })),
  };
  fs.writeFileSync(path, JSON.stringify(doc), "utf-8");
}
