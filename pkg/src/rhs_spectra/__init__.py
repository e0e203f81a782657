"""Spectral analysis of the radial square-barrier Schrodinger operator."""
import os as _os

# RHS_SPECTRA_THREADS caps BLAS/OpenMP pools; it only takes effect when set
# before numpy is first imported.
_threads = _os.environ.get("RHS_SPECTRA_THREADS", "")
if _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .model import BarrierConfig, ComplexEnergy, Region, branch_sqrt, potential_value, wavenumbers  # noqa: E402
from .eigen import (Family, closed_form_coefficients, eval_eigenfunction,  # noqa: E402
                    transfer_matrix_coefficients, wronskian)
from .quadrature import QuadratureSpec  # noqa: E402
from .green import apply_resolvent, green_function  # noqa: E402
from .spectral import rho, rho_values, sigma_delta, spectrum_info, stone_measure, theta_matrices  # noqa: E402
from .transform import (dispersion, energy_inner, evolve, parseval, round_trip, to_energy,  # noqa: E402
                        to_position)
from .testspace import (ket_action, make_position_bump, make_spectral_test_function,  # noqa: E402
                        membership_report, phi_norm)

__all__ = [
    "BarrierConfig", "ComplexEnergy", "Region", "branch_sqrt", "potential_value",
    "wavenumbers", "Family", "closed_form_coefficients", "eval_eigenfunction",
    "transfer_matrix_coefficients", "wronskian", "QuadratureSpec", "apply_resolvent",
    "green_function", "rho", "rho_values", "sigma_delta", "spectrum_info", "stone_measure",
    "theta_matrices", "dispersion", "energy_inner", "evolve", "parseval", "round_trip",
    "to_energy", "to_position", "ket_action", "make_position_bump",
    "make_spectral_test_function", "membership_report", "phi_norm",
]
