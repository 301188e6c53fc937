"""Exact-diagonalisation toolkit for the periodically and quasiperiodically driven anisotropic Dicke model."""

__version__ = "0.1.0"

from .hilbert import ProductBasis, build_basis
from .model import DriveParams, MagnusRegimeWarning, ModelParams, effective_hamiltonian, static_hamiltonian
from .floquet import FloquetSpectrum, NumericalFailure, floquet_operator, floquet_spectrum
from .drives import DriveKind, DriveProtocol, Token
from .dynamics import InitialEnsemble, ObservableSeries, evolve_and_record, infinite_temperature_refs, prepare_initial_states
from .analysis import FitKind, FitResult, HeatingResult, LevelStatsResult, SectorPolicy, fit, heating_time, r_statistic

__all__ = [
    "__version__",
    "ProductBasis",
    "build_basis",
    "DriveParams",
    "MagnusRegimeWarning",
    "ModelParams",
    "effective_hamiltonian",
    "static_hamiltonian",
    "FloquetSpectrum",
    "NumericalFailure",
    "floquet_operator",
    "floquet_spectrum",
    "DriveKind",
    "DriveProtocol",
    "Token",
    "InitialEnsemble",
    "ObservableSeries",
    "evolve_and_record",
    "infinite_temperature_refs",
    "prepare_initial_states",
    "FitKind",
    "FitResult",
    "HeatingResult",
    "LevelStatsResult",
    "SectorPolicy",
    "fit",
    "heating_time",
    "r_statistic",
]
