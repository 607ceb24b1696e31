"""Exact finite-depth construction and certification of orbit equivalences between Z-odometers."""

from .errors import CapExceeded, DepthError, InvalidSequence, NoFillerPrime, NotSublinear, OmegaOverflow
from .maps import (
    BoundarySet,
    EuclideanDecomposition,
    IntervalMap,
    MapEvaluator,
    cocycle,
    cocycle_of_phi,
    phi_eval,
    phi_norm_bound,
    psi_eval,
    psi_inv_eval,
    psi_norm_bound,
)
from .omega import Constant, Log, NormValue, OmegaFn, Power, PowerLog, Table, parse_omega, sublinearity_threshold
from .oracle import VerificationReport, build_table, fuzz_plans, verify_level, verify_plan
from .planner import PlanCertificate, SequencePlan, check_plan, plan, series_bound
from .simulate import (
    LimitPoint,
    StabilizationRecord,
    empirical_cocycle,
    monte_carlo_norm,
    phi_e_approx,
    phi_o_approx,
    sample_point,
    stabilization_profile,
)
from .supernatural import (
    INFINITY,
    BaseSequence,
    SupernaturalNumber,
    chunk_stream,
    supernatural_of_prefix,
    valuation,
)

__version__ = "0.1.0"

__all__ = [
    "BoundarySet",
    "EuclideanDecomposition",
    "IntervalMap",
    "MapEvaluator",
    "cocycle",
    "cocycle_of_phi",
    "phi_eval",
    "phi_norm_bound",
    "psi_eval",
    "psi_inv_eval",
    "psi_norm_bound",
    "LimitPoint",
    "StabilizationRecord",
    "empirical_cocycle",
    "monte_carlo_norm",
    "phi_e_approx",
    "phi_o_approx",
    "sample_point",
    "stabilization_profile",
    "INFINITY",
    "BaseSequence",
    "SupernaturalNumber",
    "chunk_stream",
    "supernatural_of_prefix",
    "valuation",
    "CapExceeded",
    "DepthError",
    "InvalidSequence",
    "NoFillerPrime",
    "NotSublinear",
    "OmegaOverflow",
    "Constant",
    "Log",
    "NormValue",
    "OmegaFn",
    "Power",
    "PowerLog",
    "Table",
    "parse_omega",
    "sublinearity_threshold",
    "VerificationReport",
    "build_table",
    "fuzz_plans",
    "verify_level",
    "verify_plan",
    "PlanCertificate",
    "SequencePlan",
    "check_plan",
    "plan",
    "series_bound",
]
