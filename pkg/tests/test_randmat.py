import math

import numpy as np
import pytest

from graphloops import BipartiteGraph, LoopAlgebra, perron_frobenius
from graphloops.elements import Loop, loop_from_tokens
from graphloops.randmat import (BlockModelSpec, convergence_sweep,
                                estimate_trace, estimate_traces,
                                loop_target, sample_model,
                                trend_non_increasing)


def test_block_dims_and_tr_d(a3):
    spec = BlockModelSpec(a3, 40, 40, seed=1)
    g = a3.g
    assert spec.M_v[g.vertex("m")] == round(40 * math.sqrt(2))
    assert spec.M_v[g.vertex("l")] == 40
    for v in range(g.n_vertices):
        assert abs(spec.tr_d(v) - a3.pf.mu[v]) <= \
            abs(spec.M_v[v] / spec.M - a3.pf.mu[v]) + 1e-15


def test_same_seed_reproduces(a3):
    spec = BlockModelSpec(a3, 8, 8, seed=77)
    m1 = sample_model(spec, 3)
    m2 = sample_model(spec, 3)
    for e in a3.g.positive_edges():
        assert np.array_equal(m1.blocks[e], m2.blocks[e])
    m3 = sample_model(spec, 4)
    assert not np.array_equal(m1.blocks[0], m3.blocks[0])


def test_adjoint_block_exact(a3):
    spec = BlockModelSpec(a3, 6, 6, seed=5)
    model = sample_model(spec, 0)
    e = 0
    eye = np.eye(spec.block_dim(a3.g.src(e)), dtype=np.complex64)
    implied = model.apply_block(e ^ 1, eye)
    assert np.allclose(implied, model.blocks[e].conj().T, atol=1e-7)


def test_empirical_entry_variance(a3):
    spec = BlockModelSpec(a3, 40, 40, seed=9)
    model = sample_model(spec, 0)
    for e in a3.g.positive_edges():
        block = model.blocks[e]
        emp = float(np.mean(np.abs(block) ** 2))
        want = spec.entry_variance(e)
        assert abs(emp - want) <= 0.05 * want


def test_length2_target_formula(a3):
    # E tr(X_e X_e*) -> (mu(s) mu(t))^(1/2); with the d_v cut the target is
    # mu(v) phi_v = mu(v) sigma(e), the same number
    g, pf = a3.g, a3.pf
    lp = loop_from_tokens(g, "e1 e1'")
    want = (pf.mu[g.src(0)] * pf.mu[g.tgt(0)]) ** 0.5
    assert loop_target(a3, lp) == pytest.approx(want, rel=1e-12)
    spec = BlockModelSpec(a3, 30, 30, seed=11)
    est = estimate_trace(spec, lp, samples=60)
    assert est.abs_err <= max(3 * est.stderr, 0.05 * est.target + 0.02)


def test_unmatched_loop_target_zero():
    # parallel edges: the loop e f' pairs distinct edges, target 0
    g = BipartiteGraph.build(
        [("v", "+"), ("w", "-")],
        [("e", "v", "w"), ("f", "v", "w")])
    alg = LoopAlgebra(g, perron_frobenius(g))
    lp = loop_from_tokens(g, "e f'")
    assert loop_target(alg, lp) == 0.0
    spec = BlockModelSpec(alg, 24, 24, seed=3)
    est = estimate_trace(spec, lp, samples=80)
    assert abs(est.mean) <= 3.5 * est.stderr


def test_thread_invariance(a3):
    spec = BlockModelSpec(a3, 10, 10, seed=21)
    lp = loop_from_tokens(a3.g, "e1 e1' e2 e2'")
    seq = estimate_trace(spec, lp, samples=24, threads=1)
    par = estimate_trace(spec, lp, samples=24, threads=4)
    assert seq.mean == par.mean
    assert seq.stderr == par.stderr


def test_batched_estimates_match_separate(a2):
    spec = BlockModelSpec(a2, 12, 12, seed=8)
    l1 = loop_from_tokens(a2.g, "e e'")
    l2 = loop_from_tokens(a2.g, "e e' e e'")
    both = estimate_traces(spec, [l1, l2], samples=20)
    assert both[0].mean == estimate_trace(spec, l1, samples=20).mean


def test_single_row_sweep(a2):
    lp = loop_from_tokens(a2.g, "e e'")
    rows = convergence_sweep(a2, [lp], [(12, 12)], samples=30, seed=5)[lp]
    assert len(rows) == 1
    assert trend_non_increasing(rows)


def test_seed_variation_consistent(a2):
    lp = loop_from_tokens(a2.g, "e e' e e'")
    spec1 = BlockModelSpec(a2, 16, 16, seed=101)
    spec2 = BlockModelSpec(a2, 16, 16, seed=202)
    e1 = estimate_trace(spec1, lp, samples=80)
    e2 = estimate_trace(spec2, lp, samples=80)
    assert abs(e1.mean - e2.mean) <= 3.0 * (e1.stderr + e2.stderr)


def test_memory_cap():
    g = BipartiteGraph.build(
        [("v", "+"), ("w", "-")], [("e", "v", "w")])
    alg = LoopAlgebra(g, perron_frobenius(g))
    with pytest.raises(MemoryError):
        BlockModelSpec(alg, 20000, 20000, seed=0)
