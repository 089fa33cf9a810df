"""
Non-intrusive scoring: negative entropy of the decoding beam
============================================================

Without a reference signal, recognition confidence stands in for
intelligibility. The beam's hypothesis log scores are softmax-normalized
into a posterior; the score is minus its Shannon entropy (nats). A beam
whose top hypothesis dominates scores near 0; a beam that cannot decide
between N hypotheses scores near -ln(N).
"""

import math

from intellipred import BeamHypothesis, BeamSet, beam_posterior, negative_entropy


def beam_with_gap(gap, n=8):
    """Hypothesis scores 0, -gap, -2*gap, ...: larger gap = more confident."""
    hyps = tuple(
        BeamHypothesis(tokens=(1, 2, 3), score=-gap * k) for k in range(n)
    )
    return BeamSet(utterance_id="demo", hypotheses=hyps)


print("score gap between hypotheses -> negative entropy (8-way beam)")
for gap in (0.01, 0.1, 0.3, 1.0, 3.0, 10.0):
    b = beam_with_gap(gap)
    ne = negative_entropy(b)
    top = beam_posterior(b)[0]
    print(f"  gap {gap:>5.2f}   neg-entropy {ne:+8.4f}   p(top) {top:.3f}")

print(f"\nfloor for an 8-hypothesis beam: -ln(8) = {-math.log(8):.4f}")
single = BeamSet("demo", (BeamHypothesis(tokens=(1,), score=-2.0),))
print(f"single-hypothesis beam scores exactly {negative_entropy(single):.1f}")
print("adding any constant to all scores changes nothing (softmax shift invariance).")
