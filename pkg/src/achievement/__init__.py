"""Achievement sets of generalized multigeometric series."""

__version__ = "0.1.0"

from .errors import AchievementError, CapExceededError, DomainError, HypothesisViolation
from .function_model import (
    BUILTINS,
    EnvelopeReport,
    FunctionSpec,
    PowerEnvelope,
    derive_power_bounds,
    envelope_only,
    evaluate,
    get_function,
    verify_envelope,
)
from .kakeya import (
    KakeyaScan,
    ResidueCertificate,
    ResidueVerdict,
    TermComparison,
    Verdict,
    compare_term,
    khm_scan,
    residue_certificate,
)
from .sequence import Coefficients, TailBracket, partial_sum, tail_bracket, term
from .subsum_engine import (
    GapReport,
    IntervalCover,
    SubsumCloud,
    cover,
    enumerate_subsums,
    exact_enumerate,
    gap_report,
    minkowski_sum,
    partition_identity,
    trichotomy_evidence,
)
from .thresholds import (
    APResult,
    Label,
    RegionVerdict,
    SubsumAlphabet,
    ThresholdSet,
    ap_search,
    cantorval_necessary_check,
    classify,
    compute_thresholds,
    subsum_alphabet,
)
