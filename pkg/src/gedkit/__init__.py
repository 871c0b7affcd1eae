"""Grammatical error detection toolkit.

Builds labeled pseudo-error corpora from dependency-parsed text, assembles
training-size ladders with fixed evaluation pools, scores detectors at token
level with multi-seed aggregation, and emits error-type feedback comments.
"""

from .corpus import (
    BINARY_SCHEME,
    TYPED_SCHEME,
    C_LABEL,
    E_LABEL,
    ErrorType,
    LabelScheme,
    LabeledSentence,
    ParsedSentence,
    Token,
    parse_conllu,
    parse_conllu_file,
    read_labeled,
    read_labeled_file,
    serialize_labeled,
    validate,
    write_conllu,
)
from .datasets import (
    DatasetSplit,
    InsufficientDataError,
    SamplingPlan,
    build_pseudo_split,
    build_real_split,
    split_real,
    subsample_ladder,
)
from .feedback import DEFAULT_TEMPLATES, annotate, annotate_records, load_templates
from .injection import (
    DEFAULT_INVENTORY,
    DEFAULT_VERB_LISTS,
    EditRecord,
    InjectionOutcome,
    InjectionSite,
    PrepositionInventory,
    VerbLists,
    apply_site,
    eligible,
    find_sites,
    generate,
    read_outcomes,
    revert_edit,
    write_outcomes,
)
from .metrics import (
    AlignmentError,
    ConfusionCounts,
    CurvePoint,
    MetricsReport,
    RunAggregate,
    aggregate,
    compute_prf,
    emit_curve,
    parse_curve,
    score,
    select_best_epoch,
)
from .perceptron import LinearModel, extract_features, load_model, predict, save_model, train

__version__ = "0.1.0"
