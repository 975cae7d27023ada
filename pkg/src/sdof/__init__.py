"""Secrecy degrees of freedom for two-user MIMO broadcast wiretap channels."""

__version__ = "0.1.0"

from .errors import (
    DegenerateChannelError,
    DimensionError,
    InfeasibleTargetError,
    InputError,
    NumericalError,
    PowerBudgetError,
    SdofError,
)
from .linalg import RankProfile, cs_decompose, gsvd, numerical_rank
from .channel import (
    ChannelSpec,
    ParallelChannel,
    channel_from_profile,
    generate_random_channel,
    load_channel,
    rank_profile,
    reduce_to_parallel,
    save_channel,
    worst_case_eve_single,
    worst_case_eve_sum,
)
from .region import (
    MUTUAL_PRIVACY,
    NO_PRIVACY,
    build_region,
    classify_case,
    compare,
    contains,
    enumerate_vertices,
    region_no_privacy,
    region_with_privacy,
)
from .scheme import allocate, check_decodability, synthesize
from .analysis import (
    achievable_rate_curve,
    adversarial_eve_search,
    certify,
    converse_prelog,
    eve_leakage,
    fit_prelog,
    sweep,
)

__all__ = [
    "__version__",
    "DegenerateChannelError",
    "DimensionError",
    "InfeasibleTargetError",
    "InputError",
    "NumericalError",
    "PowerBudgetError",
    "SdofError",
    "ChannelSpec",
    "ParallelChannel",
    "channel_from_profile",
    "generate_random_channel",
    "load_channel",
    "rank_profile",
    "reduce_to_parallel",
    "save_channel",
    "worst_case_eve_single",
    "worst_case_eve_sum",
    "MUTUAL_PRIVACY",
    "NO_PRIVACY",
    "build_region",
    "classify_case",
    "compare",
    "contains",
    "enumerate_vertices",
    "region_no_privacy",
    "region_with_privacy",
    "achievable_rate_curve",
    "adversarial_eve_search",
    "certify",
    "converse_prelog",
    "eve_leakage",
    "fit_prelog",
    "sweep",
    "RankProfile",
    "cs_decompose",
    "gsvd",
    "numerical_rank",
    "allocate",
    "check_decodability",
    "synthesize",
]
