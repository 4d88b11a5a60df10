"""qsmlab: a desk-scale numerical laboratory for quantum statistical
mechanics in both the wave-function and density-matrix pictures."""

from .coarse import (ClosenessPolicy, MacroCell, MacroDecomposition, boltzmann_entropy,
                     decompose, effective_macrostate, equilibrium_cell, macro_weight,
                     macro_weights)
from .hilbert import Subspace, energy_shell, orthonormalize, projector, spectral_decompose
from .models import (GridModel, LatticeModel, MacroVariable, MassDensityOperator,
                     build_grid_hamiltonian, build_spin_chain, left_half_occupation,
                     mass_density_field)
from .numeric import IncidentLog, NumericPolicy, policy
from .states import (DensityMatrix, IPHSpec, WaveFunction, conditional_density_matrix,
                     iph_density_matrix, mix_ensemble, purity, sample_mu_s, weak_iph)
from .streams import stream
from .unitary import SpectralPropagator, linearity_check

__version__ = "0.1.0"
