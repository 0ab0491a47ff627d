"""Coherence convertibility: decide and synthesize conversions under incoherent operations."""

from .convertibility import (
    ConversionVerdict,
    InfeasibleError,
    breakpoints,
    can_convert,
    can_convert_ensembles,
    can_convert_pure_ensemble,
    can_convert_pure_pure,
    reduce_to_target,
)
from .feasibility import LinearProgram, find_transition_matrix, solve_feasibility
from .kernels import BACKEND
from .measures import (
    MeasureId,
    capped_tail,
    coherence_fingerprint,
    convex_roof_upper_bound,
    ensemble_coherence,
    pure_coherence,
    tail_sum,
)
from .states import (
    DensityMatrix,
    Ensemble,
    IncoherentChannel,
    ProbVector,
    PureState,
    TransitionMatrix,
    apply_channel,
    branch_outcomes,
    density_of,
    is_incoherent_operator,
    is_incoherent_state,
    profile,
)
from .synthesis import (
    EnsembleMapPlan,
    NotConvertibleError,
    build_eta,
    splitter_kraus,
    synthesize_ensemble_map,
    synthesize_pure_ensemble,
    synthesize_pure_pure,
)

__version__ = "0.1.0"
