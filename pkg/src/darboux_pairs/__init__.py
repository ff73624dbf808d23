"""Darboux frames of curves on parametric surfaces and Mannheim D-pairs."""

from .catalog import CatalogEntry, get_entry, list_entries
from .framing import (
    CurveClass,
    DarbouxFrame,
    FramedCurve,
    FramedSample,
    FrameInvariants,
    FrenetData,
    classify,
    darboux_at,
    frame_curve,
    frenet_at,
    invariants_via_eq3,
    phi_angle,
)
from .geometry import (
    ArcLengthTable,
    ParamCurve,
    ScalarSeries,
    SurfacePatch,
    arc_length_table,
    embed_curve,
    fd_derivative,
    reparameterize,
    surface_normal,
)
from .mannheim import (
    IDENTITY_IDS,
    MannheimPair,
    VerificationReport,
    build_pair,
    check_candidate_pair,
    offset_curve,
    sweep_surface,
    verify_pair,
)

__version__ = "0.1.0"

__all__ = [
    "ArcLengthTable", "CatalogEntry", "CurveClass", "DarbouxFrame", "FrameInvariants",
    "FramedCurve", "FramedSample", "FrenetData", "IDENTITY_IDS", "MannheimPair", "ParamCurve",
    "ScalarSeries", "SurfacePatch", "VerificationReport", "arc_length_table", "build_pair",
    "check_candidate_pair", "classify", "darboux_at", "embed_curve", "fd_derivative",
    "frame_curve", "frenet_at", "get_entry", "invariants_via_eq3", "list_entries",
    "offset_curve", "phi_angle", "reparameterize", "surface_normal", "sweep_surface",
    "verify_pair",
]
