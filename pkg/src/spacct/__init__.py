"""Statistical-privacy accounting for query composition over random partitions."""

from .baseline import (
    AccuracyFigure,
    DpCalibration,
    gaussian_sigma_for,
    kov_compose,
    max_dp_queries,
    mse_increase,
)
from .compose import (
    AdaptiveSpec,
    BlockTerm,
    CompositionReport,
    CompositionSpec,
    NonadaptiveSpec,
    adaptive_general,
    adaptive_iid,
    composition_delta,
    nonadaptive_general,
    nonadaptive_iid,
)
from .curve import (
    CurvePoint,
    PrivacyCurve,
    d_hat,
    eval_curve,
    hockey_stick,
    hockey_stick_threshold,
    property_query_answer_law,
)
from .distkit import Pmf, binomial, cdf, hypergeometric, mixture, point, poisson_binomial, shift
from .errors import CapacityError, DomainError
from .oracle import (
    ExactMechanismLaw,
    McEstimate,
    exact_mechanism_delta,
    exact_mechanism_law,
    mc_distinguish,
    verification_matrix,
)
from .partition import (
    PartitionLaw,
    Template,
    TemplateFormat,
    enumerate_templates,
    membership_probability,
    sample_template,
    template_count,
)
from .spc import (
    Enumerate,
    ExplicitEntries,
    IidEntries,
    KnownEntries,
    MonteCarlo,
    PropertyQuery,
    Scenario,
    SpcEstimate,
    spc_general,
    spc_iid,
    spc_known_entries,
    spc_known_entries_threshold_bound,
)

__version__ = "0.1.0"
