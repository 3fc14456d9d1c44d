"""Stock-correlation networks from normalized mutual information.

Edges are filtered with a global threshold or with per-node thresholds chosen
by a two-distribution maximum-likelihood split (optionally penalized), and the
resulting networks are summarized by degree law, clustering and cliques.
"""

from .distfit import Family, FamilyConfig, FitResult, fit_mle, segment_objective, select_family
from .filtration import (BreakpointResult, EdgeSet, cmlm_breakpoint, cmlm_network,
                         global_threshold, mlm_breakpoint, mlm_network, penalty)
from .infotheory import (DiscreteSeries, MIMatrix, discretize, distance, entropy,
                         joint_entropy, mi_matrix, mutual_information, normalized_mi)
from .ingest import (PriceMatrix, ReturnMatrix, SectorMap, gen_block_returns, load_prices,
                     load_sectors, log_returns)
from .topology import (CliqueReport, clique_report, clustering_coefficient, degree_stats,
                       disparity, maximal_cliques, powerlaw_gamma, sweep, topology_report)

__version__ = "0.1.0"
