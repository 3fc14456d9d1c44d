"""
Topology along threshold and penalty sweeps
===========================================

Average degree, excluded nodes, power-law exponent and clustering, first
over a global threshold grid and then over the CMLM penalty weight.
"""

import numpy as np

from stocknet.infotheory import mi_matrix
from stocknet.ingest import gen_block_returns
from stocknet.topology import sweep

returns = gen_block_returns([34, 55, 30, 24, 8], [0.9, 0.82, 0.86, 0.8, 0.74], 0.74,
                            T=1157, seed=3)
m = mi_matrix(returns)


def show(rows, name):
    print(f"{name:>6} {'avg_deg':>8} {'excl':>5} {'g_mle':>7} {'g_ls':>7} {'clust':>6} {'edges':>6}")
    for r in rows:
        print(f"{r['param']:6.2f} {r['avg_degree']:8.2f} {r['excluded']:5d} "
              f"{r['gamma_mle']:7.2f} {r['gamma_ls']:7.2f} {r['clustering']:6.3f} "
              f"{r['edge_count']:6d}")


###############################################################################
# Global threshold: nodes start dropping out once eta passes the weakest
# sector's MI level.
show(sweep(m, "threshold", np.round(np.arange(0.08, 0.22, 0.02), 2)), "eta")

###############################################################################
# CMLM: the penalty thins the network, but never below one edge per node.
show(sweep(m, "cmlm", np.round(np.arange(0, 0.41, 0.05), 2), q=2.0), "alpha")
