"""Numerical toolkit for space-like class-A surfaces in Robertson-Walker spacetimes L^4_1(f, c)."""

from __future__ import annotations

__version__ = "0.1.0"

from .ambient import (AmbientPoint, AmbientSpec, AmbientVector, WarpingFunction, causal_character,
                      christoffel, covariant_derivative, covariant_derivative_split, metric)
from .classa import (Grid, ResidualReport, analyze, class_a_residuals, eigen_residual,
                     eta_parallel_residuals, minimality_residual)
from .errors import (CausalDegeneracyError, DegenerateFrameError, DomainError, InvalidInputError,
                     JetError, ParameterDomainError, RWLabError, SliceSurfaceError)
from .families import (CylinderFamilySpec, EtaParallelSpec, RevolutionFamilySpec, SphericalFamilySpec,
                       base_surface_principals, build_cylinder, build_eta_parallel, build_revolution,
                       build_spherical, solve_minimal_cylinder, solve_minimal_revolution,
                       sphere_curve_from_curvature)
from .harness import SuiteReport, SuiteSpec, lemma31_check, run_suite
from .surface import (AdaptedFrame, Domain, FundamentalData, ImmersionPatch, SurfaceJet2, adapted_frame,
                      fundamental_forms, induced_metric, jet, theta_derivatives, warp_restriction_check)
