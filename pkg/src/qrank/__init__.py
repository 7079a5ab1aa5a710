"""Hybrid quantum-classical navigation and ranking of directed networks.

A master equation whose dissipative part carries the damped (Google-matrix)
random walk and whose coherent part carries the symmetrized adjacency
Hamiltonian, weighted by a mixing parameter alpha. Its unique stationary
density matrix ranks nodes by occupation probability; the library measures
convergence times, compares rankings against the classical walks, and
drives the experiment suite from a CLI.
"""

from .netgraph import (
    DirectedGraph,
    EdgeListParseError,
    GraphGenSpec,
    generate,
    google_matrix,
    is_column_stochastic,
    load_edge_list,
    save_edge_list,
    transition_matrix,
)
from .lindblad import (
    DenseLiouvillian,
    LindbladGenerator,
    check_density_matrix,
    dense_liouvillian,
    hamiltonian_from_graph,
    lindblad_apply,
    random_density_matrix,
)
from .solver import (
    ClassicalResult,
    IntegrationConfig,
    IntegrationError,
    SpectralDegeneracyError,
    StationaryResult,
    classical_convergence_time,
    classical_stationary,
    integrate_to_stationary,
    spectral_tau,
)
from .ranking import (
    RankResult,
    degeneracy_profile,
    kendall_concordance,
    neighbor_profile,
    rank_from_scores,
    rank_shift,
)

__version__ = "0.1.0"
