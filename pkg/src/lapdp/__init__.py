"""Privacy accounting with privacy profiles, Rényi curves and Laplace transforms."""

__version__ = "0.1.0"

from lapdp.core import (  # noqa: E402
    FLOOR,
    PLD,
    DiscretePair,
    EpsDelta,
    GridPart,
    PrivacyProfile,
    RenyiCurve,
    check_tradeoff_reversal,
    floor_profile,
    profile_from_discrete,
    profile_from_pld,
    profile_from_pld_tails,
    renyi_from_pld,
    reverse_pld,
    reverse_profile,
    rho_from_moment,
    tradeoff_from_discrete,
    tradeoff_inverse,
)
from lapdp.composition import (  # noqa: E402
    SignedAtomBook,
    calibrate_guarantees,
    compose_homogeneous,
    compose_point_guarantees,
    compose_profile_with_kernel,
    compose_profiles,
    eps_for_delta,
    pld_kernel_from_profile,
)
from lapdp.laplace import (  # noqa: E402
    ROC,
    BromwichConfig,
    bilateral_laplace_of_profile,
    estimate_roc,
    profile_from_renyi,
    renyi_curve_from_profile,
    renyi_from_profile,
)
from lapdp.mechanisms import (  # noqa: E402
    dominating_profile_for_point_dp,
    gaussian_curve,
    gaussian_profile,
    gaussian_renyi,
    gaussian_renyi_curve,
    rr_curve,
    rr_pair,
    rr_profile,
    rr_renyi,
    rr_renyi_curve,
)
from lapdp.subsampling import (  # noqa: E402
    SubsampleParams,
    pointwise_two_sided_guarantee,
    poisson_subsample_profile,
    subsampled_reverse_profile,
)
