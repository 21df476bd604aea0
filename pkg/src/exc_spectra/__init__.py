"""Emission spectra of interacting excitons in a single-mode microcavity."""

from .config import ConfigError, RunConfig, config_from_dict, load_config, preset
from .exactdiag import AmbiguousLabel, EigenSystem, diagonalize, exact_dressed_labels
from .hilbert import (Sector, angular_momentum_matrices, dipole_raising, sector, wigner_d,
                      wigner_small_d)
from .model import (MAX_SECTOR, DegenerateRotationError, Derived, InitialState, ModelParams,
                    derive, sector_hamiltonian)
from .perturbation import (DressedState, PerturbationValidityWarning, energies_first_order,
                           hprime_element, hprime_matrix, states_first_order)
from .spectrum import (GridTooCoarse, Peak, Spectrum, SpectrumLine, SweepResult,
                       closed_form_single, default_grid, detuning_sweep, evaluate, find_peaks,
                       transition_lines)
from .timedomain import (CorrelationKernel, correlation_kernel, finite_time_spectrum,
                         time_averaged_spectrum)

__version__ = "0.1.0"
