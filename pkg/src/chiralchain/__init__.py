"""Single-excitation transport and collective decay in chirally coupled emitter chains."""

from .chiral import ChainGeometry, ModeModel, Trajectory, evolve, propagator
from .collective import PhasedDickeState, dicke_state, gamma_init_closed, gamma_init_slope
from .evolution import DisorderConfig, NanowireModel, disorder_ensemble, ideal_selfenergy
from .greens import DipoleSpec, NanowireSpec, SelfEnergyMatrix, self_energy_matrix, spp_mode

__version__ = "0.1.0"
