"""cskprobe: corpus readability, commonsense-assertion density and
masked-LM probe evaluation toolkit.

Library surface re-exported here; the CLI lives in cskprobe.cli (entry
point `cskprobe`).
"""

from .corpus_stats import CorpusStats, StatsAccumulator, compute_stats
from .csk_density import (
    AssertionPattern,
    AssertionSpotter,
    DensityReport,
    MatchEvent,
    bucket_density,
    density,
    load_assertions,
    spot,
)
from .metrics import (
    EvalRecord,
    MetricsReport,
    aggregate,
    build_records,
    macro_precision_recall,
    paired_significance,
    precision_recall_at_k,
    reciprocal_rank,
)
from .probes import (
    Probe,
    ProbeSkip,
    SkipReason,
    Triple,
    assign_typicality_band,
    build_probes,
    build_template_probe,
    mask_object_in_sentence,
    mask_predicate_in_sentence,
)
from .readability import (
    FilterStats,
    FreBucket,
    ReadabilityReport,
    bucket_by_fre,
    compute_fre,
    filter_by_fre,
    fre_from_counts,
)
from .scorer import (
    MockScorer,
    RankedPrediction,
    ScoreRequest,
    ScorerClient,
    serve_stdio,
    serve_tcp,
)
from .segmentation import (
    Document,
    SentenceSpan,
    Token,
    count_syllables,
    lemmatize,
    lemmatize_word,
    split_sentences,
    tokenize,
)

__version__ = "0.1.0"
