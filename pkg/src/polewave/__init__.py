"""Momentum-space pole analysis with amplitude-based compositeness."""
from .errors import ConvergenceError, DomainError, FactorizationError, NearPoleError
from .kinematics import HBARC, Channel, energy, kallen, onshell_momentum, phase_space
from .numerics import MomentumMesh, gauss_legendre, rational_mapped_mesh, sph_bessel_j, tangent_mapped_mesh
from .potential import (
    CoupledGaussian,
    DoubleGaussian,
    EnergyLaw,
    WoodsSaxon,
    YukawaFormFactor,
    dV_dE_partial_wave,
    project_partial_wave,
)
from .scattering import System, build_kernel, onshell_real_axis, optical_residual, solve_half_offshell
from .spectrum import find_eigenenergy, fredholm_det, radial_wavefunction_normalized
from .structure import (
    compositeness_dVdE,
    compositeness_X,
    density_profile,
    extract_residues,
    locate_pole,
    missing_and_tilde,
)
from .unstable import (
    BareCoupling,
    DressedChannel,
    decay_channel_compositeness,
    dressed_energy,
    physical_mass,
    self_energy_sigma,
)

__version__ = "0.1.0"
