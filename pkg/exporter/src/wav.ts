/**
 * Minimal RIFF/WAVE I/O: reads PCM 16-bit and IEEE float-32 (1 or 2 channels,
 * stereo collapsed by channel mean), writes float-32 mono. Mirrors the
 * conventions of the consuming toolkit (16-bit scale 1/32768).
 */

import * as fs from "node:fs";

export interface Audio {
  samples: Float64Array;
  sampleRate: number;
}

const FORMAT_PCM = 0x0001;
const FORMAT_IEEE_FLOAT = 0x0003;

export function readWav(path: string): Audio {
  const raw = fs.readFileSync(path);
  if (raw.length < 12 || raw.toString("latin1", 0, 4) !== "RIFF") {
    throw new Error(`${path}: not a RIFF file`);
  }
  if (raw.toString("latin1", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a WAVE form`);
  }
  let fmt: { tag: number; channels: number; rate: number; bits: number } | null = null;
  let data: Buffer | null = null;
  let pos = 12;
  while (pos + 8 <= raw.length) {
    const chunkId = raw.toString("latin1", pos, pos + 4);
    const chunkSize = raw.readUInt32LE(pos + 4);
    const body = raw.subarray(pos + 8, pos + 8 + chunkSize);
    if (body.length < chunkSize) {
      throw new Error(`${path}: chunk ${chunkId} truncated`);
    }
    if (chunkId === "fmt ") {
      fmt = {
        tag: body.readUInt16LE(0),
        channels: body.readUInt16LE(2),
        rate: body.readUInt32LE(4),
        bits: body.readUInt16LE(14),
      };
    } else if (chunkId === "data") {
      data = body;
    }
    pos += 8 + chunkSize + (chunkSize & 1);
  }
  if (!fmt || !data) {
    throw new Error(`${path}: missing fmt or data chunk`);
  }
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw new Error(`${path}: ${fmt.channels} channels unsupported`);
  }

  let interleaved: Float64Array;
  if (fmt.tag === FORMAT_PCM && fmt.bits === 16) {
    const n = Math.floor(data.length / 2);
    interleaved = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      interleaved[i] = data.readInt16LE(2 * i) / 32768;
    }
  } else if (fmt.tag === FORMAT_IEEE_FLOAT && fmt.bits === 32) {
    const n = Math.floor(data.length / 4);
    interleaved = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      interleaved[i] = data.readFloatLE(4 * i);
    }
  } else {
    throw new Error(`${path}: unsupported codec (tag ${fmt.tag}, ${fmt.bits}-bit)`);
  }

  if (fmt.channels === 2) {
    const frames = Math.floor(interleaved.length / 2);
    const mono = new Float64Array(frames);
    for (let i = 0; i < frames; i++) {
      mono[i] = (interleaved[2 * i] + interleaved[2 * i + 1]) / 2;
    }
    return { samples: mono, sampleRate: fmt.rate };
  }
  return { samples: interleaved, sampleRate: fmt.rate };
}

export function writeWavFloat32(path: string, samples: ArrayLike<number>, sampleRate: number): void {
  const n = samples.length;
  const payload = Buffer.alloc(4 * n);
  for (let i = 0; i < n; i++) {
    payload.writeFloatLE(Math.fround(samples[i]), 4 * i);
  }
  const header = Buffer.alloc(12 + 24 + 12 + 8);
  header.write("RIFF", 0, "latin1");
  header.writeUInt32LE(4 + 24 + 12 + 8 + payload.length, 4);
  header.write("WAVE", 8, "latin1");
  header.write("fmt ", 12, "latin1");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(FORMAT_IEEE_FLOAT, 20);
  header.writeUInt16LE(1, 22);
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 4, 28);
  header.writeUInt16LE(4, 32);
  header.writeUInt16LE(32, 34);
  header.write("fact", 36, "latin1");
  header.writeUInt32LE(4, 40);
  header.writeUInt32LE(n, 44);
  header.write("data", 48, "latin1");
  header.writeUInt32LE(payload.length, 52);
  fs.writeFileSync(path, Buffer.concat([header, payload]));
}
