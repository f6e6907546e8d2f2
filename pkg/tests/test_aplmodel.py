import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ilclab.aplmodel import (LayerMoments, RegimeError, analytic_cost_curve, analytic_total_apl,
                             apl_decrement_doubling, crosslayer_apl, ilc_cost_factor, monolayer_apl,
                             neighbors_at_hops, optimal_k_bound, pair_count, total_apl_multi,
                             total_apl_two_layer, two_layer_model)
from ilclab.assignment import IlcAssignment
from ilclab.constellation import WalkerSpec
from ilclab.topology import assemble_supra, bfs_apl, build_gridplus, layer_degree_distribution

REG4 = LayerMoments.regular(48)


def test_neighbors_at_hops():
    assert neighbors_at_hops(REG4, 1) == 4
    assert neighbors_at_hops(REG4, 3) == 36
    flat = LayerMoments(10, 2.0, 2.0)
    assert neighbors_at_hops(flat, 1) == neighbors_at_hops(flat, 7) == 2.0
    with pytest.raises(ValueError):
        neighbors_at_hops(REG4, 0)


def test_monolayer_values():
    assert monolayer_apl(REG4) == pytest.approx(math.log(12) / math.log(3) + 1)
    assert monolayer_apl(REG4) == pytest.approx(3.262, abs=5e-4)
    assert monolayer_apl(LayerMoments(4, 4.0, 12.0)) == pytest.approx(1.0)
    with pytest.raises(RegimeError):
        monolayer_apl(LayerMoments(10, 2.0, 2.0))
    with pytest.raises(RegimeError):
        LayerMoments(10, 0.0, 1.0)


def test_torus_model_error_is_reported_not_hidden():
    model = monolayer_apl(LayerMoments.regular(9))
    oracle = bfs_apl(build_gridplus(WalkerSpec(3, 3, 1000, 50, 1))).apl
    assert model == pytest.approx(math.log(2.25) / math.log(3) + 1, abs=1e-12)
    assert model == pytest.approx(1.738, abs=5e-4)
    assert oracle == 1.5
    assert model - oracle == pytest.approx(0.238, abs=5e-4)


def test_crosslayer_values():
    assert crosslayer_apl(3.262, 63, 12, 3.0) == pytest.approx(3.262 + math.log(5.25) / math.log(3) + 1)
    assert crosslayer_apl(3.262, 63, 12, 3.0) == pytest.approx(5.77, abs=5e-3)
    assert crosslayer_apl(2.0, 30, 30, 3.0) == pytest.approx(3.0)
    with pytest.raises(RegimeError):
        crosslayer_apl(3.0, 63, 0, 3.0)
    with pytest.raises(ValueError):
        crosslayer_apl(3.0, 63, 64, 3.0)


@settings(max_examples=60, deadline=None)
@given(d1=st.floats(1, 10), n2=st.integers(2, 500), chi=st.floats(1.01, 10), k=st.integers(1, 250))
def test_doubling_law(d1, n2, chi, k):
    if 2 * k > n2:
        return
    drop = crosslayer_apl(d1, n2, k, chi) - crosslayer_apl(d1, n2, 2 * k, chi)
    assert drop == pytest.approx(math.log(2) / math.log(chi), rel=1e-9)
    assert crosslayer_apl(d1, n2, k, chi) > crosslayer_apl(d1, n2, k + 1, chi)


def test_total_two_layer_reductions():
    assert total_apl_two_layer(3.0, 0.0, 0.0, 50, 0) == pytest.approx(3.0)
    assert total_apl_two_layer(2.5, 2.5, 2.5, 30, 40) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        total_apl_two_layer(1, 1, 1, 1, 0)


@settings(max_examples=40, deadline=None)
@given(n1=st.integers(10, 300), n2=st.integers(10, 300), k=st.integers(1, 100))
def test_doubling_decrement_total(n1, n2, k):
    if 2 * k > min(n1, n2):
        return
    big, small = (LayerMoments.regular(n1), LayerMoments.regular(n2))
    if n2 > n1:
        big, small = small, big
    t1 = two_layer_model(big, small, k).total
    t2 = two_layer_model(big, small, 2 * k).total
    want = apl_decrement_doubling(small.chi, big.n, small.n)
    assert t1 - t2 == pytest.approx(want, rel=1e-9)
    assert t1 > two_layer_model(big, small, k + 1).total


def test_multi_reduces_to_two_layer():
    two = total_apl_two_layer(3.0, 2.5, 5.0, 48, 63)
    multi = total_apl_multi([(3.0, 48), (2.5, 63)], [(0, 1, 5.0)])
    assert multi == pytest.approx(two)
    with pytest.raises(ValueError):
        total_apl_multi([(3.0, 48), (2.5, 63), (2.0, 10)], [(0, 2, 5.0)])


def test_multi_reversal_symmetry():
    fwd = total_apl_multi([(3.0, 40), (3.0, 40), (3.0, 40)], [(0, 1, 5.0), (1, 2, 5.0)])
    rev = total_apl_multi([(3.0, 40), (3.0, 40), (3.0, 40)], [(1, 2, 5.0), (0, 1, 5.0)])
    assert fwd == pytest.approx(rev)


def test_three_layer_model_vs_oracle():
    layers = [build_gridplus(WalkerSpec(p, s, 1000, 50, 1)) for p, s in ((5, 5), (4, 6), (6, 6))]
    a01 = IlcAssignment(tuple((3 * i, 2 * i) for i in range(6)), (0, 1))
    a12 = IlcAssignment(tuple((4 * i + 1, 5 * i) for i in range(6)), (1, 2))
    s = assemble_supra(layers, [a01, a12])
    oracle = bfs_apl(s).apl
    ms = [LayerMoments.from_distribution(layer_degree_distribution(s, i), s.sizes[i]) for i in range(3)]
    d = [monolayer_apl(m) for m in ms]
    model = total_apl_multi(list(zip(d, s.sizes)), [(0, 1, crosslayer_apl(d[0], 24, 6, ms[1].chi)),
                                                    (1, 2, crosslayer_apl(d[2], 24, 6, ms[1].chi))])
    # non-adjacent pairs only sit in the denominator, so the model undershoots
    assert oracle == pytest.approx(4.0087, abs=1e-4)
    assert model == pytest.approx(2.8603, abs=1e-4)
    assert model < oracle


def test_globalstar_celestri_model_vs_oracle(presets):
    gs, ce = build_gridplus(presets["globalstar"]), build_gridplus(presets["celestri"])
    asg = IlcAssignment(tuple((4 * i, 5 * i) for i in range(12)))
    oracle = bfs_apl(assemble_supra([gs, ce], asg)).apl
    model = analytic_total_apl(48, 63, 12)
    assert oracle == pytest.approx(4.18198, abs=1e-5)
    assert model == pytest.approx(4.33293, abs=1e-5)
    assert abs(model - oracle) / oracle < 0.05


def test_optimal_k_bound_values():
    kb = optimal_k_bound(100, 63, 3.262, 3.0)
    assert kb.bound == pytest.approx(63 * math.log(3) / (63 - 3.262 * math.log(3)))
    assert kb.bound == pytest.approx(1.1649, abs=1e-4)
    assert kb.k_max == 1 and kb.size_condition and kb.below_half
    d1 = monolayer_apl(LayerMoments.regular(63))
    gc = optimal_k_bound(63, 48, d1, 3.0)
    assert gc.bound < 24
    assert optimal_k_bound(63, 48, d1, 1.0 + 1e-9).bound < 1e-6
    with pytest.raises(RegimeError):
        optimal_k_bound(20, 3, 5.0, 3.0)


@settings(max_examples=60, deadline=None)
@given(n2=st.integers(8, 400), chi=st.floats(1.2, 5.0))
def test_cost_curve_argmin_against_bound(n2, chi):
    d1 = monolayer_apl(LayerMoments.regular(max(n2 + 10, 20)))
    try:
        kb = optimal_k_bound(n2 + 10, n2, d1, chi)
    except RegimeError:
        return
    ks, f = analytic_cost_curve(d1, n2, chi)
    # the curve rises from k = 1, so the bound only caps the argmin from above
    assert int(ks[np.argmin(f)]) == 1
    assert f[1] > f[0]
    if kb.bound <= 2:
        assert abs(1 - kb.bound) <= 1


def test_cost_factor_and_with_ilcs():
    assert ilc_cost_factor(48, 3.0, 48) == pytest.approx(3.0)
    m = LayerMoments.with_ilcs(48, 12)
    assert m.h1 == pytest.approx(4.25)
    assert m.h1 + m.h2 == pytest.approx((16 * 36 + 25 * 12) / 48)
    assert pair_count(4) == 6


def test_analytic_orders_k_like_bfs(gc_pair):
    from ilclab.optimizer import random_uniform
    from ilclab.optimizer.tpilcd import analytic_apl
    n2 = min(gc_pair.n_a, gc_pair.n_b)
    big = random_uniform(gc_pair.candidates, n2 // 2, seed=5)
    bfs, model = [], []
    for k in (n2 // 8, n2 // 4, n2 // 2):
        asg = IlcAssignment(big.pairs[:k])
        bfs.append(bfs_apl(gc_pair.supra(asg.pairs)).apl)
        model.append(analytic_apl(gc_pair, asg))
    assert bfs == sorted(bfs, reverse=True)
    assert model == sorted(model, reverse=True)
