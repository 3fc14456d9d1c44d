import itertools

import numpy as np
import pytest

from oracles import exhaustive_breakpoint, random_mi_row, random_mi_values
from stocknet.distfit import FamilyConfig
from stocknet.filtration import (BreakpointError, EdgeSet, assemble, choose, cmlm_breakpoint,
                                 cmlm_network, global_threshold, mlm_breakpoint, mlm_network,
                                 penalty, read_edges_csv, scan_matrix, scan_row,
                                 write_edges_csv)
from stocknet.infotheory import MIMatrix, mi_matrix
from stocknet.ingest import gen_block_returns


def mi(values):
    values = np.asarray(values, dtype=float)
    return MIMatrix([f"n{i}" for i in range(len(values))], values)


def background_with_triangle(seed=0, n_bg=20):
    """Triangle with mutual MI 0.6, weak 0.1 links to a jittered background."""
    rng = np.random.default_rng(seed)
    n = 3 + n_bg
    v = 0.1 + 0.01 * rng.standard_normal((n, n))
    v = np.triu(v, 1)
    v = v + v.T
    v[:3, :3] = 0.6 + 0.005 * rng.standard_normal((3, 3))
    v[:3, :3] = np.triu(v[:3, :3], 1) + np.triu(v[:3, :3], 1).T
    np.fill_diagonal(v, 1.0)
    return mi(np.clip(v, 0.001, 1.0))


def test_edge_set_invariants():
    e = EdgeSet(4, {(2, 1): 0.5, (0, 3): 0.2})
    assert e.pairs() == {(1, 2), (0, 3)}
    assert (2, 1) in e and (1, 3) not in e
    with pytest.raises(ValueError):
        EdgeSet(3, {(1, 1): 0.1})
    with pytest.raises(ValueError):
        EdgeSet(3, {(0, 1): 0.1, (1, 0): 0.2})


def test_global_threshold_examples():
    rng = np.random.default_rng(0)
    m = mi(random_mi_values(8, rng))
    assert len(global_threshold(m, 0.0)) == 28
    off = m.values[np.triu_indices(8, 1)].max()
    assert len(global_threshold(m, off)) == 0
    assert global_threshold(m, 0.6).pairs() <= global_threshold(m, 0.3).pairs()
    with pytest.raises(ValueError):
        global_threshold(m, 1.5)


def test_global_threshold_is_strict():
    m = mi([[1, 0.5, 0.2], [0.5, 1, 0.5], [0.2, 0.5, 1]])
    assert global_threshold(m, 0.5).pairs() == set()
    assert global_threshold(m, 0.49).pairs() == {(0, 1), (1, 2)}


def test_mlm_breakpoint_two_clusters():
    rng = np.random.default_rng(1)
    row = np.concatenate([0.1 + 0.005 * rng.standard_normal(20),
                          0.5 + 0.005 * rng.standard_normal(20)])
    res = mlm_breakpoint(rng.permutation(row))
    assert res.u == 20
    assert res.threshold == np.sort(row)[19]
    assert len(res.objective_curve) == 40 - 2 * 5 + 1


def test_mlm_breakpoint_arithmetic_row_matches_scan():
    row = np.linspace(0.05, 0.6, 45)
    assert mlm_breakpoint(row).u == exhaustive_breakpoint(row)


def test_breakpoints_match_exhaustive_scan():
    rng = np.random.default_rng(7)
    for _ in range(30):
        row = random_mi_row(rng)
        assert mlm_breakpoint(row).u == exhaustive_breakpoint(row)
        alpha = float(rng.uniform(0, 0.4))
        assert cmlm_breakpoint(row, alpha).u == exhaustive_breakpoint(row, alpha=alpha)


def test_other_family_pairs_match_scan():
    rng = np.random.default_rng(8)
    for weak, strong in itertools.product(["normal", "rayleigh"], ["normal", "exponential"]):
        row = random_mi_row(rng)
        cfg = FamilyConfig(weak, strong)
        assert mlm_breakpoint(row, cfg).u == exhaustive_breakpoint(row, weak, strong)


def test_breakpoint_never_splits_a_run():
    row = np.array([0.1, 0.11, 0.12, 0.13, 0.14, 0.15, 0.2, 0.2, 0.2, 0.2,
                    0.2, 0.2, 0.4, 0.45, 0.5, 0.55, 0.6])
    res = mlm_breakpoint(row)
    xs = np.sort(row)
    assert xs[res.u - 1] < xs[res.u]
    assert res.u == exhaustive_breakpoint(row)


def test_breakpoint_all_degenerate():
    with pytest.raises(BreakpointError, match="node 4"):
        mlm_breakpoint([0.3] * 12, node=4)


def test_breakpoint_row_too_short():
    with pytest.raises(ValueError):
        mlm_breakpoint(np.linspace(0.1, 0.5, 9))


def test_penalty_examples():
    assert penalty([0.2, 0.4, 0.6], 1, 0.3, 2) == pytest.approx(1.875, rel=1e-12)
    assert penalty([0.2, 0.4, 0.6], 1, 0.0, 2) == 0.0
    assert penalty([0.2, 0.4, 0.6], 3, 0.3, 2) == 0.0
    with pytest.raises(ValueError):
        penalty([0.0, 0.0, 0.0], 1, 0.3)
    with pytest.raises(ValueError):
        penalty([0.2, 0.4], 1, 1.0)
    with pytest.raises(ValueError):
        penalty([0.2, 0.4], 1, 0.2, q=0.5)


def test_penalty_nonincreasing_in_split():
    row = np.random.default_rng(2).random(30)
    values = [penalty(row, u, 0.2) for u in range(31)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_cmlm_alpha_zero_is_mlm():
    row = random_mi_row(np.random.default_rng(3))
    a, b = mlm_breakpoint(row), cmlm_breakpoint(row, 0.0)
    assert (a.u, a.threshold) == (b.u, b.threshold)
    assert np.array_equal(a.objective_curve, b.objective_curve)


def test_cmlm_split_grows_with_alpha():
    rng = np.random.default_rng(4)
    grid = np.round(np.arange(0, 0.41, 0.02), 2)
    for _ in range(20):
        scan = scan_row(random_mi_row(rng))
        us = [choose(scan, a).u for a in grid]
        assert all(b >= a for a, b in zip(us, us[1:]))


def test_mlm_network_keeps_planted_triangle():
    m = background_with_triangle()
    e, results = mlm_network(m)
    assert {(0, 1), (0, 2), (1, 2)} <= e.pairs()
    assert e.degrees().min() >= 1
    assert [r.node for r in results] == list(range(m.n))


def test_union_rule_is_order_invariant():
    m = background_with_triangle(seed=5)
    e, _ = mlm_network(m)
    perm = np.random.default_rng(0).permutation(m.n)
    inv = np.argsort(perm)
    # node k of the permuted matrix is node perm[k] of the original
    permuted = MIMatrix([m.tickers[k] for k in perm], m.values[np.ix_(perm, perm)])
    e_perm, _ = mlm_network(permuted)
    assert e_perm.relabel(perm).pairs() == e.pairs()
    assert e.relabel(inv).pairs() == e_perm.pairs()


def test_row_rule_uses_row_threshold():
    m = mi([[1, 0.3, 0.5], [0.3, 1, 0.4], [0.5, 0.4, 1]])
    t = [0.35, 0.1, 0.9]
    assert assemble(m, t, "paper-literal").pairs() == {(0, 2), (1, 2)}
    assert assemble(m, t, "union").pairs() == {(0, 2), (1, 2), (0, 1)}
    with pytest.raises(ValueError):
        assemble(m, t, "intersection")


def test_row_rule_is_subset_of_union():
    m = background_with_triangle(seed=2)
    union, _ = mlm_network(m, rule="union")
    literal, _ = mlm_network(m, rule="paper-literal")
    assert literal.pairs() <= union.pairs()


def test_cmlm_network_alpha_zero_equals_mlm():
    m = background_with_triangle(seed=3)
    e0, r0 = cmlm_network(m, 0.0)
    e1, r1 = mlm_network(m)
    assert e0.edges == e1.edges
    assert [r.u for r in r0] == [r.u for r in r1]


def test_cmlm_network_nested_and_connected():
    rng = np.random.default_rng(9)
    m = mi(random_mi_values(25, rng))
    prev = None
    for alpha in np.round(np.arange(0, 0.41, 0.05), 2):
        e, _ = cmlm_network(m, alpha)
        assert e.degrees().min() >= 1
        if prev is not None:
            assert e.pairs() <= prev
        prev = e.pairs()


def test_network_needs_enough_nodes():
    with pytest.raises(ValueError):
        mlm_network(mi(np.eye(10)))


def test_edges_csv_roundtrip(tmp_path):
    m = background_with_triangle()
    e, _ = mlm_network(m)
    write_edges_csv(e, m.tickers, tmp_path / "e.csv")
    back = read_edges_csv(tmp_path / "e.csv", m.tickers)
    assert back.pairs() == e.pairs()
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "src,dst,weight"


def test_151_node_fixture_keeps_every_node():
    r = gen_block_returns([34, 55, 30, 24, 8], [0.9, 0.82, 0.86, 0.8, 0.74], 0.74, 1157, seed=3)
    m = mi_matrix(r)
    scans = scan_matrix(m)
    for alpha in np.round(np.arange(0, 0.41, 0.04), 2):
        e = assemble(m, [choose(s, alpha).threshold for s in scans])
        assert e.degrees().min() >= 1
