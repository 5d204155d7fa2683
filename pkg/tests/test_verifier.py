import math

import numpy as np
import pytest

from shiftpair.conditions import PASS, VIOLATED, from_altering_pair, from_banach
from shiftpair.corpus import instance, paper_map_case1
from shiftpair.metric import ClosureError, interval_space
from shiftpair.scalar_fn import scalar_fn
from shiftpair.verifier import check_contraction, evaluate_pairs, search_counterexample

from conftest import affine_map


def recompute(space, map, pair, w):
    """Margin recomputed from scratch with scalar arithmetic."""
    tx, ty = map.rule(w["x"]), map.rule(w["y"])
    d_xy, d_t = space.distance(w["x"], w["y"]), space.distance(tx, ty)
    return float(pair.phi(float(d_xy))) - float(pair.psi(float(d_t)))


class TestCheckContraction:
    def test_paper_example_passes(self, paper_triple):
        space, T, pair = paper_triple
        r = check_contraction(space, T, pair, seed=0, n=100_000)
        assert r.verdict == PASS and r.worst_margin > 0
        assert r.samples_used > 99_000
        assert r.diagonal_margin == pytest.approx(math.log(3 / 12) - math.log(1 / 12) - math.log(3), abs=1e-12)
        assert recompute(space, T, pair, r.witness) == pytest.approx(r.witness["margin"], abs=1e-12)

    def test_case1_spot_margin(self, paper_triple):
        space, T, pair = paper_triple
        vals = evaluate_pairs(space, T, pair, [0.5], [0.0])
        # d(x,y) = 1/2, d(Tx,Ty) = 1/10: ln(1/12 + 3/24) - ln(1/12 + 5/120)
        assert vals["margin"][0] == pytest.approx(math.log(2.5 / 12) - math.log(1.5 / 12), abs=1e-12)

    def test_identity_violated(self, lnpair):
        r = check_contraction(interval_space(0, 1), affine_map("x"), lnpair, seed=0, n=1000)
        assert r.verdict == VIOLATED and r.worst_margin < 0
        assert r.witness["x"] != r.witness["y"]

    def test_banach_half_is_tight(self, unit):
        r = check_contraction(unit, affine_map("x/2"), from_banach(0.5), seed=0, n=10_000)
        assert r.verdict == PASS and abs(r.worst_margin) <= 1e-12

    def test_closure_required(self, unit, lnpair):
        with pytest.raises(ClosureError):
            check_contraction(unit, affine_map("x + 0.5"), lnpair, seed=0, n=100)

    def test_seed_stability(self, paper_triple):
        space, T, pair = paper_triple
        for seed in range(10):
            r = check_contraction(space, T, pair, seed=seed, n=10_000)
            assert r.verdict == PASS

    def test_same_seed_same_report(self, paper_triple):
        a = check_contraction(*paper_triple, seed=4, n=5000)
        b = check_contraction(*paper_triple, seed=4, n=5000)
        assert a.to_dict() == b.to_dict()


class TestSearch:
    def test_literal_paper_map_fails_at_one(self, paper_triple):
        # T(1) = 3/125 while T(y) = y/5 for y < 1: as y -> 1, d(1, y) -> 0 but
        # d(T1, Ty) -> 1/5 - 3/125 = 0.176, so the margin tends to -ln(1 + 5*0.176)
        space, T, pair = paper_triple
        r = search_counterexample(space, T, pair, seed=0, budget=20_000)
        assert r.verdict == VIOLATED
        w = r.witness
        assert 1.0 in (w["x"], w["y"])
        assert recompute(space, T, pair, w) == pytest.approx(w["margin"], abs=1e-12)
        exact = evaluate_pairs(space, T, pair, [1.0], [1.0 - 1e-9])["margin"][0]
        assert exact == pytest.approx(-math.log(1 + 5 * (1 / 5 - 3 / 125)), abs=1e-7)
        assert exact < -0.6

    def test_case1_map_passes(self, hybrid):
        pair = instance("paper-example").pair
        r = search_counterexample(hybrid, paper_map_case1(), pair, seed=0, budget=20_000)
        assert r.verdict == PASS and r.worst_margin > 0

    def test_negative_identity_within_small_budget(self):
        inst = instance("negative-identity")
        r = search_counterexample(inst.space, inst.map, inst.pair, seed=0, budget=1000)
        assert r.verdict == VIOLATED and r.samples_used <= 1000

    def test_budget_monotone(self, paper_triple):
        margins = [search_counterexample(*paper_triple, seed=3, budget=b).worst_margin
                   for b in (50, 200, 1000, 5000)]
        assert all(b <= a for a, b in zip(margins, margins[1:]))

    def test_never_above_sampled_check_on_landmarks(self, unit):
        # a search that cannot beat the tight Banach case reports ~0
        r = search_counterexample(unit, affine_map("x/2"), from_banach(0.5), seed=0, budget=2000)
        assert r.verdict == PASS and abs(r.worst_margin) <= 1e-12

    def test_sound_negative(self, unit):
        # a violation reported by the search is a real pair of points
        pair = from_banach(0.5)
        T = affine_map("0.9*x")
        r = search_counterexample(unit, T, pair, seed=1, budget=500)
        assert r.verdict == VIOLATED
        w = r.witness
        assert unit.contains(w["x"]) and unit.contains(w["y"])
        assert 0.5 * abs(w["x"] - w["y"]) - 0.9 * abs(w["x"] - w["y"]) == pytest.approx(w["margin"], abs=1e-12)

    def test_rejects_bad_budget(self, paper_triple):
        with pytest.raises(ValueError):
            search_counterexample(*paper_triple, budget=0)


def test_reduction_verdicts_agree(unit):
    T = affine_map("x/2")
    a, b = from_altering_pair(scalar_fn("t"), scalar_fn("t/2")), from_banach(0.5)
    for seed in range(5):
        ra = check_contraction(unit, T, a, seed=seed, n=2000)
        rb = check_contraction(unit, T, b, seed=seed, n=2000)
        assert ra.verdict == rb.verdict == PASS
        assert np.isclose(ra.worst_margin, rb.worst_margin, atol=1e-12)
