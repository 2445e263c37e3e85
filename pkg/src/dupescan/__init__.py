"""Near-duplicate manuscript detection with MinHash LSH, plus editorial analytics."""

__version__ = "0.1.0"

from .corpus import Corpus, Decision, DuplicateIdError, ManuscriptRecord, ValidationError, ingest
from .shingling import ShingleSet, exact_jaccard, normalize, shingle
from .minhash import HashFamily, MinHashSignature, estimate_jaccard, sign, sign_many
from .lsh import LshIndex, VerifiedPair, build, candidates, query, verify
from .dedup import (ClassificationPolicy, DuplicateCluster, PairClassification, StatsReport,
                    classify_pair, cluster, find_published_duplicates, find_simultaneous, stats)
from .journeys import (Journey, TransferRecommendation, build_journeys, export_journey,
                       export_journeys, recommend_transfers)
from .snapshot import load_snapshot, save_snapshot
from .config import PipelineConfig
from .synth import SynthSpec, generate_synthetic
from .pipeline import run_pipeline

__all__ = [
    "Corpus", "Decision", "DuplicateIdError", "ManuscriptRecord", "ValidationError", "ingest",
    "ShingleSet", "exact_jaccard", "normalize", "shingle",
    "HashFamily", "MinHashSignature", "estimate_jaccard", "sign", "sign_many",
    "LshIndex", "VerifiedPair", "build", "candidates", "query", "verify",
    "ClassificationPolicy", "DuplicateCluster", "PairClassification", "StatsReport",
    "classify_pair", "cluster", "find_published_duplicates", "find_simultaneous", "stats",
    "Journey", "TransferRecommendation", "build_journeys", "export_journey", "export_journeys",
    "recommend_transfers", "load_snapshot", "save_snapshot", "PipelineConfig",
    "SynthSpec", "generate_synthetic", "run_pipeline",
]
