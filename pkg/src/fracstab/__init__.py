"""Stability analysis and time responses of fractional-order systems."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    EvaluationError,
    FracStabError,
    InvalidInputError,
    LossOfPrecisionError,
    NotApplicableError,
    NumericError,
    ParseError,
    UnsupportedFormError,
)
from .gl import InputKind, SimConfig, Trajectory, gl_coeffs, simulate, simulate_lti
from .lti import (
    ModalTerm,
    Sector,
    StabilityReport,
    StateSpace,
    Verdict,
    analyze,
    analyze_polynomial,
    commensurate_eig_test,
    final_value,
    matrix_sector_test,
    modal_stable,
    to_state_space,
)
from .mittag_leffler import MLParams, ml, ml_deriv, podlubny_ek
from .nonlinear import (
    char_poly_incommensurate,
    find_equilibria,
    min_chaos_order,
    nonlinear_stability,
)
from .orders import PseudoPolynomial, WPolynomial, as_order, fdeg, format_pseudo_polynomial, to_w_polynomial
from .parser import (
    PolynomialVectorField,
    TransferFunction,
    parse_pseudo_polynomial,
    parse_transfer_function,
    parse_vector_field,
)
from .response import (
    ClosedLoop,
    SeriesBudget,
    Variant,
    closed_loop_response_ex6,
    commensurate_response,
    fode3_response,
    general_fode_response,
)
from .roots import find_roots

__all__ = [
    "ClosedLoop",
    "DomainError",
    "EvaluationError",
    "FracStabError",
    "InputKind",
    "InvalidInputError",
    "LossOfPrecisionError",
    "MLParams",
    "ModalTerm",
    "NotApplicableError",
    "NumericError",
    "ParseError",
    "PolynomialVectorField",
    "PseudoPolynomial",
    "Sector",
    "SeriesBudget",
    "SimConfig",
    "StabilityReport",
    "StateSpace",
    "Trajectory",
    "TransferFunction",
    "UnsupportedFormError",
    "Variant",
    "Verdict",
    "WPolynomial",
    "analyze",
    "analyze_polynomial",
    "as_order",
    "char_poly_incommensurate",
    "closed_loop_response_ex6",
    "commensurate_eig_test",
    "commensurate_response",
    "fdeg",
    "final_value",
    "find_equilibria",
    "find_roots",
    "fode3_response",
    "format_pseudo_polynomial",
    "general_fode_response",
    "gl_coeffs",
    "matrix_sector_test",
    "min_chaos_order",
    "ml",
    "ml_deriv",
    "modal_stable",
    "nonlinear_stability",
    "parse_pseudo_polynomial",
    "parse_transfer_function",
    "parse_vector_field",
    "podlubny_ek",
    "simulate",
    "simulate_lti",
    "to_state_space",
    "to_w_polynomial",
]
