"""
Cliques of a penalized-likelihood network
=========================================

Enumerate maximal cliques and report their mean MI, disparity and sector mix.
"""

from stocknet.filtration import cmlm_network
from stocknet.infotheory import mi_matrix
from stocknet.ingest import SECTOR_PALETTE, SectorMap, gen_block_returns
from stocknet.topology import clique_report, maximal_cliques

sizes = [12, 16, 10, 6]
codes = ["FI", "MA", "CO", "RE"]
returns = gen_block_returns(sizes, [0.93, 0.82, 0.88, 0.78], 0.72, T=1157, seed=8)
sectors = SectorMap({t: (c, SECTOR_PALETTE[c]) for t, c in
                     zip(returns.tickers, [c for c, k in zip(codes, sizes) for _ in range(k)])})

m = mi_matrix(returns)
edges, _ = cmlm_network(m, alpha=0.3)
print(len(edges), "edges")

###############################################################################
# Largest cliques first. Equal weights inside a clique of size k would give a
# disparity of exactly 1/(k-1).
reports = sorted((clique_report(c, m, sectors) for c in maximal_cliques(edges)),
                 key=lambda r: (-len(r.members), r.members))
print(len(reports), "maximal cliques of size >= 3")
for r in reports[:8]:
    k = len(r.members)
    print(f"K{k:<3} avg MI {r.avg_mi:.4f}  disparity {r.disparity:.4f} "
          f"(1/(k-1) = {1 / (k - 1):.4f})  sectors {r.sectors}")
