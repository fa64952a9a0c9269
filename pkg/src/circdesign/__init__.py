"""Optimal circulant designs for fMRI HRF estimation and two-stimulus contrasts."""
from .errors import CapExceeded, ConstructionError, DesignError, DomainError, SingularDesignError
from .sequences import BinaryDesign, ZeroRun, insert_zeros, m_sequence, paley_hadamard_sequence, zero_runs
from .design import (
    ScaledInfoMatrix,
    contrast_info,
    info_matrix,
    model_matrix,
    signed_from_ternary,
    ternary_components,
    ternary_from_signed,
    to_signed,
)
from .criteria import CriterionSpec, eigenvalues, ms_compare, phi_p, type1_value
from .certify import certify_contrast, certify_estimation, n0_cubic, target_info_matrix

__version__ = "0.1.0"
