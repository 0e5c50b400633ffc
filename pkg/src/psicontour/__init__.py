"""Holomorphic extension of pseudodifferential operators by contour deformation."""

from .contour import ContourMap, ContourPoint
from .cutoffs import SmoothBump, default_cutoffs
from .evaluator import (
    ExtensionResult,
    extend,
    extend_tube,
    kernel_K,
    op_deformed,
    op_distribution,
    op_standard,
    tube_params,
)
from .geometry import Ball, DeformationParams, DomainError, ParameterError, TubeDomain, Wedge, validate_params
from .inputs import CompactDistribution, DiracTerm, TestFunction, gaussian_input, resolvent_input, sine_input
from .quadrature import (
    ContourQuadrature,
    DecayError,
    QuadratureError,
    QuadratureSpec,
    RegularizationSchedule,
    choose_truncation,
    regularized_limit,
)
from .reports import CheckReport
from .symbols import AnalyticSymbol, bracket_power, constant, modulated, monomial, resolvent

__version__ = "0.1.0"
