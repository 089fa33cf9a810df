#!/usr/bin/env node
/**
 * asr-export: run the bundled deterministic ASR over WAV files and emit
 * interchange files for the prediction toolkit.
 *
 *   asr-export init-model --out <dir> [--seed N] [--dim D] [--vocab V]
 *   asr-export export --model <dir> --wav <path|@list> [--wav ...]
 *              [--layer last|1|2] [--beam N] [--forced-tokens file.json]
 *              --out-dir <dir>
 *
 * Exit codes: 0 success, 1 usage/validation error, 2 model/audio failure.
 */

import * as fs from "node:fs";

import { defaultJob, runExportJob } from "./export.js";
import { initModelDir, loadModel } from "./model.js";

interface Flags {
  [key: string]: string[];
}

function parseArgs(argv: string[]): { command: string; flags: Flags } {
  const command = argv[0] ?? "";
  const flags: Flags = {};
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument ${JSON.stringify(arg)}`);
    }
    const key = arg.slice(2);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag --${key} needs a value`);
    }
    (flags[key] ??= []).push(value);
    i++;
  }
  return { command, flags };
}

function single(flags: Flags, key: string): string | undefined {
  const vals = flags[key];
  if (!vals) return undefined;
  if (vals.length > 1) throw new Error(`flag --${key} given more than once`);
  return vals[0];
}

function requireFlag(flags: Flags, key: string): string {
  const v = single(flags, key);
  if (v === undefined) throw new Error(`missing required flag --${key}`);
  return v;
}

function expandWavArgs(values: string[]): string[] {
  const out: string[] = [];
  for (const v of values) {
    if (v.startsWith("@")) {
      const listed = fs
        .readFileSync(v.slice(1), "utf-8")
        .split("\n")
        .map((s) => s.trim())
        .filter((s) => s.length > 0);
      out.push(...listed);
    } else {
      out.push(v);
    }
  }
  return out;
}

function usage(): string {
  return [
    "usage:",
    "  asr-export init-model --out <dir> [--seed N] [--dim D] [--vocab V]",
    "  asr-export export --model <dir> --wav <path|@list> [--wav ...]",
    "             [--layer last|1|2] [--beam N] [--forced-tokens file.json] --out-dir <dir>",
  ].join("\n");
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs(argv);
  } catch (e) {
    console.error(`asr-export: ${(e as Error).message}\n${usage()}`);
    return 1;
  }
  const { command, flags } = parsed;
  try {
    if (command === "init-model") {
      const out = requireFlag(flags, "out");
      const overrides: Record<string, number> = {};
      const seed = single(flags, "seed");
      const dim = single(flags, "dim");
      const vocab = single(flags, "vocab");
      if (seed !== undefined) overrides.seed = Number(seed) >>> 0;
      if (dim !== undefined) overrides.decoderDim = Number(dim);
      if (vocab !== undefined) overrides.vocab = Number(vocab);
      const config = initModelDir(out, overrides);
      console.error(`wrote ${out}/model.json (dim ${config.decoderDim}, vocab ${config.vocab})`);
      return 0;
    }
    if (command === "export") {
      const modelDir = requireFlag(flags, "model");
      const outDir = requireFlag(flags, "out-dir");
      const wavs = expandWavArgs(flags["wav"] ?? []);
      if (wavs.length === 0) throw new Error("missing required flag --wav");
      const layer = single(flags, "layer") ?? "last";
      const beam = Number(single(flags, "beam") ?? "8");
      if (!Number.isInteger(beam) || beam < 1) {
        throw new Error(`--beam must be a positive integer, got ${single(flags, "beam")}`);
      }
      const forcedFile = single(flags, "forced-tokens");
      const forcedTokens = forcedFile
        ? (JSON.parse(fs.readFileSync(forcedFile, "utf-8")) as number[])
        : undefined;

      let model;
      try {
        model = loadModel(modelDir);
      } catch (e) {
        console.error(`asr-export: ${(e as Error).message}`);
        return 2;
      }
      for (const wav of wavs) {
        const job = defaultJob(wav, outDir, { layerSelector: layer, beamSize: beam, forcedTokens });
        try {
          const result = runExportJob(model, job);
          console.error(
            `${result.utteranceId}: ${result.frames}x${result.dim} states, ` +
              `${result.hypotheses} hypotheses`,
          );
        } catch (e) {
          console.error(`asr-export: ${wav}: ${(e as Error).message}`);
          return 2;
        }
      }
      return 0;
    }
    console.error(`asr-export: unknown command ${JSON.stringify(command)}\n${usage()}`);
    return 1;
  } catch (e) {
    console.error(`asr-export: ${(e as Error).message}\n${usage()}`);
    return 1;
  }
}

import { fileURLToPath } from "node:url";

if (process.argv[1] && fileURLToPath(import.meta.url) === fs.realpathSync(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
