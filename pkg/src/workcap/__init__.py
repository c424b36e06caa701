"""Ergotropy, total ergotropy and energy-constrained work capacitances of noisy channels."""
from .bosonic import (
    AttenuatorParams,
    SeriesConfig,
    beta_eff,
    beta_star_bosonic,
    cpass_energy,
    pass_energy,
    single_mode_capacitance,
    thermal_entropy,
    truncated_fock_energies,
    two_mode_gap,
)
from .capacitance import (
    EnergyCurve,
    FiniteNReport,
    OptimizerConfig,
    PointResult,
    Sweep,
    chi,
    chi_tot,
    concave_envelope,
    finite_n_check,
    gap_curve,
    max_output_ergotropy,
    max_output_total_ergotropy,
    optimize_point,
    supporting_chord,
    sweep,
)
from .channels import ChannelSpec, MadParams, kraus_from_map, make_depolarizing, make_identity, make_mad, make_qubit_ad, make_remad
from .ergotropy import (
    GibbsState,
    PassiveDecomposition,
    ergotropy,
    find_beta_star,
    mean_energy,
    passive_decompose,
    total_ergotropy,
    von_neumann_entropy,
)
from .errors import *  # noqa: F401,F403
from .qops import Hamiltonian, KrausChannel, apply_channel, density_matrix, eig_hermitian, partial_trace, tensor_power

__version__ = "0.1.0"
