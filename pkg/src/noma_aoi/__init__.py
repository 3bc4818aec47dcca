"""Average age-of-information analysis and simulation for NOMA-assisted
grant-free uplink transmission with Bernoulli packet arrivals."""

from .combinatorics import (SuccessDistribution, beta_any, beta_u1,
                            brute_force_success_dist, gamma_max)
from .config import (ConfigError, DegenerateConfigError, SnrLadder,
                     SystemConfig, configure_snr_ladder, db_to_linear,
                     linear_to_db, uniform_q, validate_config)
from .nrt import (BracketError, NrtResult, average_aoi_nrt,
                  optimal_ptx_nrt_k2, ptx_grid_argmin, success_prob_nrt)
from .rt import (AbsorbingMoments, BufferChain, absorbing_moments,
                 average_aoi_rt, buffer_chain, stationary_distribution,
                 success_prob_rt, transition_matrix)
from .simulator import (ReplicationSummary, SimResult, ZeroDeliveryError,
                        empirical_state_occupancy, empirical_transition_counts,
                        run_replications, run_simulation)

__version__ = "0.1.0"

__all__ = [
    "AbsorbingMoments", "BracketError", "BufferChain", "ConfigError",
    "DegenerateConfigError", "NrtResult", "ReplicationSummary", "SimResult",
    "SnrLadder", "SuccessDistribution", "SystemConfig", "ZeroDeliveryError",
    "absorbing_moments", "average_aoi_nrt", "average_aoi_rt", "beta_any",
    "beta_u1", "brute_force_success_dist", "buffer_chain",
    "configure_snr_ladder", "db_to_linear", "empirical_state_occupancy",
    "empirical_transition_counts", "gamma_max", "linear_to_db",
    "optimal_ptx_nrt_k2", "ptx_grid_argmin", "run_replications",
    "run_simulation", "stationary_distribution", "success_prob_nrt",
    "success_prob_rt", "transition_matrix", "uniform_q", "validate_config",
]
