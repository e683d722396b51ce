"""Exact toolkit for non-classical polynomials over F_p^n: evaluation and
interpolation, Gowers norms, homogeneous decompositions, linear-form
rewriting, consistency groups and polynomial factors."""

from __future__ import annotations

from .errors import (BudgetExceeded, DimensionMismatch, HofaError, NonZeroShift, ParseError,
                     VerificationError)
from .forms import (FormSystem, LinearForm, canonical_rewrite, count_operator, cs_complexity,
                    expand_high_weight, normalize_leading, parse_system, tensor_power,
                    true_complexity)
from .gowers import ComplexTable, bias, factor_uniformity, gowers_norm_exact, gowers_norm_mc
from .homogeneous import (homogeneous_decompose, homogeneous_sample, is_homogeneous, sigma,
                          univariate_basis)
from .polynomial import NCPoly, eval_poly, format_poly, interpolate, parse_poly
from .torus import TorusValue, teichmuller_sigma

__version__ = "0.1.0"
