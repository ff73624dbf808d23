"""Mannheim D-pair construction, identity verification and pair testing."""

from .candidate import CandidateResult, check_candidate_pair
from .identities import (
    IDENTITY_IDS,
    REGISTRY,
    TAU_COINCIDE,
    IdentityResult,
    VerificationReport,
    resolve_ids,
    verify_pair,
)
from .pair import (
    MannheimPair,
    PairModel,
    build_pair,
    offset_curve,
    pair_series,
    sweep_surface,
)

__all__ = [
    "CandidateResult", "IDENTITY_IDS", "IdentityResult", "MannheimPair", "PairModel",
    "REGISTRY", "TAU_COINCIDE", "VerificationReport", "build_pair", "check_candidate_pair",
    "offset_curve", "pair_series", "resolve_ids", "sweep_surface", "verify_pair",
]
