"""Craig interpolation for linear arithmetic with certificate-producing
decision procedures, and interpolation-based verification of symbolic
transition systems (BMC, the interpolation fixed-point loop, CEGAR)."""

from .formulas import (
    Atom,
    AtomF,
    AtomKind,
    FALSE,
    Formula,
    NotF,
    TRUE,
    conj,
    disj,
    evaluate,
    negate,
    rewrite_literals,
    symbols_of,
)
from .interpolate import (
    InterpolationResult,
    NotUnsat,
    Partition,
    Separators,
    Theory,
    TreeQuery,
    binary_interpolant,
    check_separator,
    check_sequence,
    check_tree,
    sequence_interpolant,
    solve,
    tree_interpolant,
)
from .lia import (
    ResourceLimitExceeded,
    eliminate_div,
    euclid_div,
    gcd_cut,
    lia_check,
    lia_interpolate,
)
from .lra import (
    AnnotatedIneq,
    CertificateError,
    FarkasCertificate,
    lra_check,
    lra_interpolate,
    replay_annotated,
)
from .cegar import (
    AbstractPath,
    AbstractSafe,
    AbstractTS,
    PredicateSet,
    abstract_reach,
    boolean_abstract,
    cegar_loop,
    concretize,
    refine,
)
from .terms import DeltaRational, DivTerm, LinTerm, Sort, Symbol
from .transition import (
    ImcConfig,
    NoCexUpTo,
    Safe,
    TransitionSystem,
    Unknown,
    Unrolling,
    Unsafe,
    VerificationResult,
    bmc,
    check_inductive,
    imc,
    trace_replays,
)

__version__ = "0.1.0"
