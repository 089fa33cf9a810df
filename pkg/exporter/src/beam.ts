/**
 * Deterministic beam search over the toy encoder-decoder. Hypotheses carry
 * the per-step decoder states of both layers so representations can be
 * exported along the decoded path.
 */

import { BOS, EOS, Encoding, Model, confidenceScale, decoderStep } from "./model.js";

export interface Hypothesis {
  tokens: number[]; // real tokens, BOS/EOS excluded
  score: number; // total log probability, includes EOS if finished
  states1: Float64Array[]; // h1 per emitted token
  states2: Float64Array[]; // h2 per emitted token
  h: Float64Array | null; // recurrent state after the last step
  finished: boolean;
}

function compareHyp(a: Hypothesis, b: Hypothesis): number {
  if (a.score !== b.score) return b.score - a.score;
  // total order for reproducibility: lexicographic on token ids
  const n = Math.min(a.tokens.length, b.tokens.length);
  for (let i = 0; i < n; i++) {
    if (a.tokens[i] !== b.tokens[i]) return a.tokens[i] - b.tokens[i];
  }
  return a.tokens.length - b.tokens.length;
}

export function beamSearch(model: Model, encoding: Encoding, beamSize: number): Hypothesis[] {
  if (beamSize < 1) {
    throw new Error(`beam size must be >= 1, got ${beamSize}`);
  }
  const scale = confidenceScale(model, encoding);
  const maxSteps = model.config.maxSteps;
  const vocab = model.config.vocab;

  let live: Hypothesis[] = [
    { tokens: [], score: 0, states1: [], states2: [], h: null, finished: false },
  ];
  const done: Hypothesis[] = [];

  for (let step = 0; step < maxSteps && live.length > 0; step++) {
    const candidates: Hypothesis[] = [];
    for (const hyp of live) {
      const prevToken = hyp.tokens.length > 0 ? hyp.tokens[hyp.tokens.length - 1] : BOS;
      const context = encoding.contexts[Math.min(step, encoding.contexts.length - 1)];
      const out = decoderStep(model, hyp.h, prevToken, context, scale);
      for (let v = 0; v < vocab; v++) {
        if (v === BOS) continue;
        if (v === EOS && step === 0) continue; // every hypothesis emits >= 1 token
        if (v === EOS) {
          candidates.push({
            tokens: hyp.tokens,
            score: hyp.score + out.logProbs[v],
            states1: hyp.states1,
            states2: hyp.states2,
            h: null,
            finished: true,
          });
        } else {
          candidates.push({
            tokens: [...hyp.tokens, v],
            score: hyp.score + out.logProbs[v],
            states1: [...hyp.states1, out.h1],
            states2: [...hyp.states2, out.h2],
            h: out.h1,
            finished: false,
          });
        }
      }
    }
    candidates.sort(compareHyp);
    const kept = candidates.slice(0, beamSize);
    live = [];
    for (const hyp of kept) {
      if (hyp.finished) {
        done.push(hyp);
      } else {
        live.push(hyp);
      }
    }
  }
  // anything still live at the step cap counts as a hypothesis too
  done.push(...live);
  done.sort(compareHyp);
  return done.slice(0, beamSize);
}
