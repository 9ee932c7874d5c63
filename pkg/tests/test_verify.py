import itertools
from fractions import Fraction

import networkx as nx
import pytest

from khopdom.algorithms import pipeline_3k
from khopdom.generators import (
    ConstructionError,
    Instance,
    gen_alternating_cycle,
    gen_planted_regular,
    gen_pseudoforest_H,
    gen_random_connected,
)
from khopdom.graph_core import GraphError, PortGraph
from khopdom.harness import run_algorithm
from khopdom.simulator import run
from khopdom.verify import (
    LemmaViolation,
    SizeError,
    ball_max_degree,
    central_prune_oracle,
    constrained_exact_mds,
    degree_class_counts,
    exact_mds,
    expansion_bruteforce,
    greedy_dominating_set,
    high_degree_bound,
    is_constrained_dominating,
    is_k_dominating,
    low_degree_bound,
    packing_lower_bound,
    pruned_radius,
    ratio_report,
    selection_witnesses,
    theorem_bound,
    threshold_for,
    usefk_check,
    voronoi,
)

from conftest import cycle, cycle_with_pendant, path, to_nx, to_port_graph


def brute_mds_size(g: PortGraph, k: int) -> int:
    """Independent oracle: smallest subset that networkx BFS certifies."""
    G = to_nx(g)
    lengths = dict(nx.all_pairs_shortest_path_length(G, cutoff=k))
    for size in range(1, g.n + 1):
        for s in itertools.combinations(range(g.n), size):
            if all(any(v in lengths[u] for u in s) for v in range(g.n)):
                return size
    return 0


# domination -----------------------------------------------------------------

def test_is_k_dominating_examples():
    assert is_k_dominating(path(5), {2}, 2)
    assert not is_k_dominating(path(5), {0}, 2)
    assert is_k_dominating(cycle(10), {0, 5}, 2)


def test_exact_mds_examples():
    assert exact_mds(path(4), 2) in ({1}, {2})
    assert len(exact_mds(cycle_with_pendant(), 1)) == 3
    assert len(exact_mds(gen_alternating_cycle(10, 2).graph, 2)) == 2


def test_exact_mds_matches_brute_force():
    for seed in range(25):
        g = gen_random_connected(11, 10 + seed % 6, seed=seed).graph
        for k in (1, 2):
            best = exact_mds(g, k)
            assert is_k_dominating(g, best, k)
            assert len(best) == brute_mds_size(g, k)


def test_exact_mds_size_cap():
    with pytest.raises(SizeError):
        exact_mds(cycle(31), 1)


def test_greedy_and_packing_bracket_optimum():
    for seed in range(10):
        g = gen_random_connected(25, 30, seed=seed).graph
        opt = len(exact_mds(g, 1))
        assert len(packing_lower_bound(g, 1)) <= opt <= len(greedy_dominating_set(g, 1))


def test_constrained_mds_respects_radii():
    g = cycle_with_pendant()
    survivors, r = central_prune_oracle(g, 1)
    radius = pruned_radius(1, r)
    best = constrained_exact_mds(g, survivors, radius)
    assert best <= survivors
    assert is_constrained_dominating(g, best, radius)
    # node 0 lost its leaf in iteration 1, so only radius 0 is left for it
    assert radius[0] == 0 and 0 in best


# pruning oracle ----------------------------------------------------------------

def test_prune_oracle_examples():
    assert central_prune_oracle(path(5), 2) == ({2}, {2: 2})
    survivors, r = central_prune_oracle(cycle(6), 4)
    assert survivors == set(range(6)) and set(r.values()) == {0}
    assert central_prune_oracle(path(4), 2) == (set(), {})


def test_prune_oracle_rejects_disconnected():
    with pytest.raises(GraphError):
        central_prune_oracle(PortGraph.from_edges(3, [(0, 1)]), 1)


def test_prune_oracle_matches_networkx_peeling():
    for seed in range(20):
        g = gen_random_connected(30, 31, seed=seed).graph
        for k in (1, 2, 4):
            G = to_nx(g)
            for _ in range(k):
                G.remove_nodes_from([v for v, d in G.degree() if d == 1])
            assert central_prune_oracle(g, k)[0] == set(G.nodes())


# Voronoi -----------------------------------------------------------------------

def test_voronoi_pseudoforest_cells_are_the_trees():
    inst = gen_pseudoforest_H(3, 2, 11)
    g = inst.graph
    dec = voronoi(g, range(g.n), inst.planted_ds, 2, check=False)
    assert len(dec.cells) == 11
    assert all(len(cell) == 10 for cell in dec.cells.values())
    assert max(dec.depth.values()) == 2
    # the unpruned graph keeps degree-1 leaves, so leaf clause (2) must fire
    with pytest.raises(LemmaViolation, match="no edge leaving"):
        voronoi(g, range(g.n), inst.planted_ds, 2)


def test_voronoi_singletons():
    g = cycle(9)
    dec = voronoi(g, range(9), range(9), 2)
    assert all(cell == {m} for m, cell in dec.cells.items())


def test_voronoi_five_path_center():
    dec = voronoi(path(5), {2}, {2}, 2)
    assert dec.cells == {2: {2}}


def test_voronoi_ties_go_to_smaller_dominator():
    dec = voronoi(cycle(8), range(8), {0, 4}, 2, check=False)
    assert dec.dominator[2] == 0 and dec.dominator[6] == 0


def test_voronoi_detects_double_edges_between_cells():
    with pytest.raises(LemmaViolation, match="joined by 2 edges"):
        voronoi(cycle(4), range(4), {0, 2}, 1)


def test_usefk_examples():
    single = PortGraph.from_edges(1, [])
    assert usefk_check(voronoi(single, {0}, {0}, 1), 0, 1)
    # girth 10 < 4k+3, so the cell clauses are not guaranteed here
    g = gen_alternating_cycle(10, 2).graph
    dec = voronoi(g, range(10), exact_mds(g, 2), 2, check=False)
    assert usefk_check(dec, 1, 2)
    assert len(dec.dominator) == (2 * 2 * 1 + 1) * len(dec.cells)


# expansion ------------------------------------------------------------------------

def naive_expansion(G: nx.Graph, k: int) -> Fraction:
    """Enumerate every kept subset and every partition into radius-k pieces."""
    def partitions(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for p in partitions(rest):
            yield [[first]] + p
            for i in range(len(p)):
                yield p[:i] + [[first] + p[i]] + p[i + 1:]

    ok: dict[frozenset, bool] = {}

    def piece_ok(p):
        key = frozenset(p)
        if key not in ok:
            sub = G.subgraph(key)
            ok[key] = nx.is_connected(sub) and nx.radius(sub) <= k
        return ok[key]

    best = Fraction(0)
    for r in range(1, G.number_of_nodes() + 1):
        for keep in itertools.combinations(G.nodes(), r):
            for part in partitions(list(keep)):
                if all(piece_ok(p) for p in part):
                    owner = {v: i for i, p in enumerate(part) for v in p}
                    quotient = {frozenset((owner[u], owner[v])) for u, v in G.edges()
                                if u in owner and v in owner and owner[u] != owner[v]}
                    best = max(best, Fraction(len(quotient), len(part)))
    return best


def test_expansion_examples():
    assert expansion_bruteforce(path(4), 2) == Fraction(3, 4)
    assert expansion_bruteforce(cycle(4), 1) == 1
    assert expansion_bruteforce(cycle(3), 0) == 1
    assert expansion_bruteforce(PortGraph.from_edges(1, []), 1) == 0


def test_expansion_matches_naive_enumeration():
    for seed in range(30):
        G = nx.gnp_random_graph(6, 0.3 + 0.1 * (seed % 5), seed=seed)
        for k in (0, 1, 2):
            assert expansion_bruteforce(to_port_graph(G), k) == naive_expansion(G, k), (seed, k)


def test_expansion_contraction_helps():
    # contracting inside K4 only loses edges; on Petersen it gains
    G = nx.complete_graph(4)
    assert expansion_bruteforce(to_port_graph(G), 1) == Fraction(3, 2)
    petersen = to_port_graph(nx.petersen_graph())
    assert expansion_bruteforce(petersen, 1) > Fraction(petersen.m, petersen.n)


def test_expansion_size_cap():
    with pytest.raises(SizeError):
        expansion_bruteforce(path(13), 1)


# degree classes ----------------------------------------------------------------------

def test_threshold_for():
    assert threshold_for(3, 1) == 2
    assert threshold_for(Fraction(27, 1), 2) == 3
    assert threshold_for(Fraction(26, 1), 2) == 2
    assert threshold_for(Fraction(1, 2), 3) == 2


def test_degree_bounds():
    assert low_degree_bound(2, 3) == 7
    assert low_degree_bound(4, 1) == 6
    assert high_degree_bound(3, 6) == 12
    with pytest.raises(ValueError):
        high_degree_bound(1, 1)


def test_degree_class_cycle_with_pendant():
    g = cycle_with_pendant()
    survivors, _ = central_prune_oracle(g, 1)
    pdeg = {v: sum(1 for w in g.neighbors(v) if w in survivors) for v in survivors}
    counts = degree_class_counts(pdeg, 1, range(7), exact_mds(g, 1), 2, 1)
    assert (counts.low, counts.high) == (7, 0)
    assert counts.low_bound == 9 and counts.low_ok and counts.high_ok


def test_selection_witnesses_exist():
    for seed in range(15):
        g = gen_random_connected(26, 29, seed=seed).graph
        for k in (1, 2):
            survivors, r = central_prune_oracle(g, k)
            if not survivors:
                continue
            sel = run(g, pipeline_3k(k), 3 * k).selected()
            witnesses = selection_witnesses(g, survivors, r, k, sel)
            assert all(w is not None for w in witnesses.values()), (seed, k)


def test_ball_max_degree_on_path():
    g = path(7)
    assert ball_max_degree(g, range(7), 0, 0) == 1
    assert ball_max_degree(g, range(7), 0, 1) == 2
    assert ball_max_degree(g, {2, 3, 4}, 2, 1) == 2


# ratio reports ---------------------------------------------------------------------

def test_ratio_report_four_path():
    inst = Instance(path(4), 2, 2, float("inf"), None, expansion_bruteforce(path(4), 2))
    _, chosen = run_algorithm(inst, "alg2", 2)
    report = ratio_report(inst, "alg2", chosen)
    assert report.out_size == 2 and report.opt_lo == report.opt_hi == 1
    assert report.bound == 4 and report.bound_ok


def test_ratio_report_rejects_non_dominating():
    inst = Instance(path(5), 1, 2, float("inf"))
    with pytest.raises(AssertionError):
        ratio_report(inst, "alg2", {2})


def test_ratio_report_singleton():
    inst = Instance(PortGraph.from_edges(1, []), 1, 0, float("inf"), None, Fraction(0))
    report = ratio_report(inst, "pipeline3k", {0})
    assert report.ratio_lo == 1


def test_theorem_bound_values():
    assert theorem_bound("alg2", 2, Fraction(3, 4)) == 4
    assert theorem_bound("pipeline3k", 1, 3) == low_degree_bound(2, 1) + high_degree_bound(2, 3)
    assert theorem_bound("alg3", 1, 3) is None
    assert theorem_bound("alg2", 1, None) is None


def test_planted_budget_failure_reports_deficit():
    with pytest.raises(ConstructionError) as info:
        gen_planted_regular(3, 1, 32, seed=0, budget_factor=0)
    assert info.value.deficient > 0
