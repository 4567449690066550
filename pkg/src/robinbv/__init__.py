"""Robin p-Laplacian eigenvalues, their p -> 1 limit, and Cheeger constants.

The package bundles four solver layers over a common grid geometry:

* :mod:`robinbv.geometry` -- parametric domains, exact measures, rasterization;
* :mod:`robinbv.radial` -- shooting solver and closed forms on balls and shells;
* :mod:`robinbv.eigensolver` -- grid minimization of the p-exponent quotient;
* :mod:`robinbv.bvlimit` -- the p -> 1 total-variation side and Cheeger constants;
* :mod:`robinbv.analysis` -- sweeps, shape comparisons, and bound checks.
"""

from .analysis import (
    InequalityReport,
    SweepReport,
    check_cheeger_bound,
    check_faber_krahn,
    default_domain_library,
    demo_beta_minus_one,
    evaluate_H,
    gamma_sweep,
)
from .bvlimit import (
    LimitResult,
    SubsetIndicator,
    blow_up_sequence,
    cheeger_constant,
    evaluate_J,
    evaluate_R,
    extract_level_set,
    minimize_J,
)
from .discrete import ScalarField
from .eigensolver import CoercivityError, EigenResult, minimize_Jp, rayleigh_quotient_p, warm_start_path
from .geometry import (
    Annulus,
    Ball,
    DomainSpec,
    Ellipse,
    GridDomain,
    Polygon,
    Rectangle,
    RoundedRectangle,
    equimeasurable_ball,
    perimeter,
    rasterize,
    volume,
)
from .radial import (
    RadialProfile,
    ball_limit_eigenvalue,
    minimize_shell_ratio,
    shell_R_value,
    shell_ratio,
    shoot_radial_eigen,
)

__version__ = "0.1.0"

__all__ = [
    "Annulus",
    "Ball",
    "CoercivityError",
    "DomainSpec",
    "EigenResult",
    "Ellipse",
    "GridDomain",
    "InequalityReport",
    "LimitResult",
    "Polygon",
    "RadialProfile",
    "Rectangle",
    "RoundedRectangle",
    "ScalarField",
    "SubsetIndicator",
    "SweepReport",
    "ball_limit_eigenvalue",
    "blow_up_sequence",
    "check_cheeger_bound",
    "check_faber_krahn",
    "cheeger_constant",
    "default_domain_library",
    "demo_beta_minus_one",
    "equimeasurable_ball",
    "evaluate_H",
    "evaluate_J",
    "evaluate_R",
    "extract_level_set",
    "gamma_sweep",
    "minimize_J",
    "minimize_Jp",
    "minimize_shell_ratio",
    "perimeter",
    "rasterize",
    "rayleigh_quotient_p",
    "shell_R_value",
    "shell_ratio",
    "shoot_radial_eigen",
    "volume",
    "warm_start_path",
]
