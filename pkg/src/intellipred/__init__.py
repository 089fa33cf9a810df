"""ASR-based speech intelligibility prediction toolkit.

Capabilities: simulate noisy-reverberant speech corpora at controlled
speech-weighted SNRs; score intelligibility intrusively (similarity between
reference and processed hidden-representation sequences) or non-intrusively
(negative entropy of the decoding beam); calibrate raw scores with a
two-parameter logistic mapping; and evaluate predictions with RMSE, Pearson
correlation, and Kendall's tau-b.
"""

from .calibration import MappingParams, fit_logistic, load_params, logistic_apply, save_params
from .corpus_sim import (
    CorpusManifestEntry,
    SimulationSpec,
    sample_condition,
    simulate_corpus,
)
from .cpc2 import SignalRecord, join_predictions, load_metadata
from .interchange import (
    BeamHypothesis,
    BeamSet,
    RepresentationSequence,
    read_beam,
    read_repr,
    write_beam,
    write_repr,
)
from .intrusive import AlignmentPath, cosine_similarity, dtw_align, intrusive_score
from .metrics import EvalReport, evaluate, kendall_tau, ncc, rmse
from .nonintrusive import beam_posterior, negative_entropy
from .signal_core import (
    Waveform,
    WeightingFilter,
    convolve,
    default_weighting,
    gain_for_snr,
    mix,
    read_wav,
    weighted_power,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentPath",
    "BeamHypothesis",
    "BeamSet",
    "CorpusManifestEntry",
    "EvalReport",
    "MappingParams",
    "RepresentationSequence",
    "SignalRecord",
    "SimulationSpec",
    "Waveform",
    "WeightingFilter",
    "beam_posterior",
    "convolve",
    "cosine_similarity",
    "default_weighting",
    "dtw_align",
    "evaluate",
    "fit_logistic",
    "gain_for_snr",
    "intrusive_score",
    "join_predictions",
    "kendall_tau",
    "load_metadata",
    "load_params",
    "logistic_apply",
    "mix",
    "ncc",
    "negative_entropy",
    "read_beam",
    "read_repr",
    "read_wav",
    "rmse",
    "sample_condition",
    "simulate_corpus",
    "save_params",
    "weighted_power",
    "write_beam",
    "write_repr",
    "write_wav",
]
