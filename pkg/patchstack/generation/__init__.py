from .dataset import Dataset, PairId, PairSpec, Sample, stack_observations
from .dataset_generator import generate, make_pair, sample_contact, simulate_sample
from .distribution import AmbiguousPair, SignalRecord, find_ambiguous_pairs, signal_distribution_report

__all__ = [
    "AmbiguousPair",
    "Dataset",
    "PairId",
    "PairSpec",
    "Sample",
    "SignalRecord",
    "find_ambiguous_pairs",
    "generate",
    "make_pair",
    "sample_contact",
    "signal_distribution_report",
    "simulate_sample",
    "stack_observations",
]
