"""Simulation toolkit for measuring quantum Fisher information with parametric modulation
and for Monte-Carlo Ramsey phase estimation against the Cramér-Rao bound."""

__version__ = "0.1.0"

from .core import PureState, HermitianOperator, TimeDependentHamiltonian, eig_hermitian, mhz, propagate
from .errors import QfiLabError, ValidationError
from .models import PulseModel, SingleQubitParams, TwoQubitParams
from .oracle import QfiValue, concurrence, qfi_finite_difference, qfi_single_qubit_analytic
from .modulation import measure_qfi_single, measure_qfi_two_qubit
from .ramsey import PhotonModel, estimate, ramsey_probability

__all__ = [
    "PureState", "HermitianOperator", "TimeDependentHamiltonian", "eig_hermitian", "mhz", "propagate",
    "QfiLabError", "ValidationError", "PulseModel", "SingleQubitParams", "TwoQubitParams",
    "QfiValue", "concurrence", "qfi_finite_difference", "qfi_single_qubit_analytic",
    "measure_qfi_single", "measure_qfi_two_qubit", "PhotonModel", "estimate", "ramsey_probability",
]
