"""Exact invariants and eigenstate families of the nonstationary singular oscillator."""

from .config import Scenario, load_scenario, parse_expression, stationary
from .envelope import integrate_envelope, quad_coeffs
from .algebra import kappa_from_c, ladder_matrices, invariant_elements, lambda_matrix
from .states import (
    StateParams,
    FockState,
    GridSpec,
    build_state,
    build_state_u0,
    barut_girardello,
    perelomov,
    inner_product,
    inner_product_analytic,
)

__version__ = "0.1.0"
