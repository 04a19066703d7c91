"""Numerical verification of delta-invariant ideality for submanifolds of space forms."""

from .catalog import FAMILIES, build_catalog, closed_form_lambda, closed_form_metric
from .curvature import (CurvatureData, christoffels_from_metric, codazzi_residual, curvature_data,
                        gauss_residual, riemann_from_metric, sectional_curvature)
from .delta import (DeltaOptions, DeltaReport, Partition, chen_coefficients, chen_rhs,
                    delta_estimate, delta_oracle, equality_structure_check, ideality_check,
                    validate_partition)
from .errors import DeltaforgeError
from .extrinsic import ExtrinsicData, extrinsic_data, shape_spectrum, type_number
from .immersion import ImmersionSpec, parse_spec, serialize_spec
from .jets import Jet2, jet2_finite_difference, jet2_hyperdual
from .report import Job, Tolerances, emit_report, run_job, verify_point
from .spaceform import SpaceForm, euclidean, hyperbolic, sphere

__version__ = "0.1.0"
