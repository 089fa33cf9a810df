"""
Intrusive scoring: representation similarity along a DTW alignment
==================================================================

The intrusive predictor compares the hidden-representation sequence of a
processed utterance against the clean reference's. Frames are compared with
cosine similarity; unequal lengths are handled by a dynamic-time-warping
alignment, and the score is the mean similarity along the optimal path.

Here we fake "decoder states" directly: the processed sequence is the
reference plus jitter whose size plays the role of acoustic degradation.
"""

import numpy as np

from intellipred import RepresentationSequence, dtw_align, intrusive_score

rng = np.random.default_rng(3)

frames, dim = 12, 16
clean = rng.normal(size=(frames, dim)).astype(np.float32)
ref = RepresentationSequence(utterance_id="demo", layer="decoder", values=clean)

print("jitter scale -> intrusive score (mean cosine along DTW path)")
for jitter in (0.0, 0.1, 0.3, 0.6, 1.0, 2.0):
    noisy = clean + jitter * rng.normal(size=(frames, dim)).astype(np.float32)
    proc = RepresentationSequence(utterance_id="demo", layer="decoder", values=noisy)
    print(f"  {jitter:>4.1f}         {intrusive_score(ref, proc):+.4f}")

# The alignment also absorbs insertions/deletions of decoding steps: drop two
# frames from the processed side and the path simply walks around the gap.
shortened = np.delete(clean, [3, 7], axis=0)
proc = RepresentationSequence(utterance_id="demo", layer="decoder", values=shortened)
path = dtw_align(ref, proc)
print(f"\n12-frame reference vs 10-frame processed: path length {len(path)}")
print(f"score with two frames dropped: {intrusive_score(ref, proc):+.4f}")
print("identical sequences score exactly +1; orthogonal frames score 0.")
