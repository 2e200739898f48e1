"""One-dimensional FEM model, its angle oracle circuit and resource formulas."""

from .model import FemProblem1D, assemble, h_entry, h_prime_entry, mass_entry, spectrum_check, stiffness_entry
from .series import arccos_series_spec, series_coefficients
from .oracle import OracleConfig, build_oracle_theta, ref_oracle, verify_oracle

__all__ = [
    "FemProblem1D", "assemble", "h_entry", "h_prime_entry", "mass_entry", "spectrum_check",
    "stiffness_entry", "arccos_series_spec", "series_coefficients", "OracleConfig",
    "build_oracle_theta", "ref_oracle", "verify_oracle",
]
