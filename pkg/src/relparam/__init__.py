"""Relative-parameter encoding in spin systems without a shared reference frame.

Submodules
----------
spin_algebra  angular-momentum operators, coherent states, Clebsch-Gordan
povm          total-spin projector families and their spectral oracle
protocols     encoding scenarios and outcome likelihoods
inference     information-gain estimators (Monte Carlo and quadrature)
verify        invariant suites
cli           command-line front end
"""

__version__ = "0.1.0"

from .inference import (  # noqa: E402
    Estimator,
    EstimatorConfig,
    InfoGainReport,
    info_gain,
    pair_info_gain,
    sweep_j,
)
from .protocols import CosineTriple, Method, Scenario  # noqa: E402
from .spin_algebra import HalfInteger  # noqa: E402

__all__ = [
    "__version__",
    "Estimator",
    "EstimatorConfig",
    "InfoGainReport",
    "info_gain",
    "pair_info_gain",
    "sweep_j",
    "CosineTriple",
    "Method",
    "Scenario",
    "HalfInteger",
]
