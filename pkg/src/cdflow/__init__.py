"""Curvature-dimension certificates, entropy flows and functional-inequality
constants for one-dimensional weighted diffusions ``phi f'' - (beta - 1) phi' f'``.
"""
from .cd_certifier import CDCertificate, FrontierResult, cd_slack, certify, frontier
from .constants import (
    alpha_theta,
    c_beta,
    c_phi,
    evaluate,
    p_star_negative_dim,
    p_star_weighted,
    poincare_constant,
    q_star,
    theta_flow,
)
from .entropy_flow import Entropy, FlowConfig, decay_certificate, refined_decay_certificate, run_flow
from .errors import CdflowError, NumericalFailure, ValidationError
from .inequality_lab import (
    beckner_quotient,
    phi_entropy_quotient,
    quotient_minimizer,
    randomized_falsifier,
    spectral_gap,
)
from .operator import OperatorSpec, apply_L, discretize, gamma, gamma2, make_operator
from .weights import build_measure, even_poly, quadratic, quartic, weight_from_config

__version__ = "0.1.0"
