"""Chiral plasmonic near fields and the electron vortex beams they imprint.

Modules: ``optics`` (light, beam, SPP dispersion), ``nearfield`` (beta),
``pinem`` (sidebands), ``farfield`` (momentum maps), ``analysis``
(observables and delay scans), ``proton`` (OAM magnetic moment), ``cli``.
"""
__version__ = "0.1.0"

from .errors import (ChiralPinemError, ConfigError, ConvergenceError, DegenerateError,
                     DomainError, InsufficientFringesError, PoleError, ResolutionError,
                     ShapeError, UnreliableLoopError)
from .kernels import BACKEND
from .optics import (ElectronBeam, IncidentLight, MaterialStack, PolarizationState,
                     derive_spp_wavevector)
from .nearfield import (Grid2D, HoleGeometry, InteractionField, PulsePair, synthesize_beta,
                        superpose_two_pulses)
from .pinem import build_sidebands, energy_filtered_map, gaussian_wavefunction
from .farfield import DetectorModel, far_field
from .analysis import oam_spectrum, topological_charge, helicity_of_field, run_delay_scan
from .proton import ProtonModel, OAMWavefunction, magnetic_moment
