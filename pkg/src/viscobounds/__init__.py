"""Bounds on the transient response of two-phase antiplane viscoelastic composites."""
__version__ = "0.1.0"

from .errors import (ConfigurationError, DegenerateContrastError, DomainError, InfeasibleError,
                     ModelMismatchError, NumericalFailure)
from .phases import (CompositePair, Elastic, KelvinVoigt, Maxwell, Side, default_strain_pair,
                     default_stress_pair, laplace_modulus, s_parameter, strain_kernel, stress_kernel)
from .spectral import (SpectralConfig, StepLoading, StrainStep, StressStep, eval_scalar_strain,
                       eval_scalar_stress, eval_vector_strain, eval_vector_stress)
from .sumrules import InfoSet, KnownValue, LinearProgramSpec, Symmetry
from .lp import LpSolution, simplex_solve
from .optimizer import (BoundQuery, BoundSense, BoundSeries, Directional, Scalar12, SearchSettings,
                        invert_volume_fraction, optimize_bound, sweep_bounds)
from .geometry import (ConvexPolygon, ResponseDomain, SupportSet, correlate_support, directional_support,
                       domain_fixed_orientation, domain_union_over_orientations, kernel_support,
                       laminate_reference_curve)
