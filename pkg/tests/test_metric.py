import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftpair.corpus import paper_map
from shiftpair.metric import (
    ClosureError,
    CustomSpace,
    FiniteSpace,
    NonMemberError,
    apply,
    check_metric_axioms,
    hybrid_space,
    interval_space,
    verify_closure,
)
from shiftpair.seeding import stream

from conftest import affine_map


class TestHybridSpace:
    def test_both_fractional(self, hybrid):
        assert hybrid.distance(0.2, 0.7) == pytest.approx(0.5, abs=1e-15)

    def test_integer_and_fraction_use_sum(self, hybrid):
        assert hybrid.distance(4, 3 / 125) == pytest.approx(4.024, abs=1e-15)

    def test_diagonal(self, hybrid):
        assert hybrid.distance(3, 3) == 0.0
        assert hybrid.distance(3.0, 3.0 + 1e-11) == 0.0

    def test_membership(self, hybrid):
        assert hybrid.contains(0.0) and hybrid.contains(1.0) and hybrid.contains(7.0)
        assert not hybrid.contains(1.5)
        assert not hybrid.contains(-0.1)
        assert hybrid.contains(5.0 + 5e-10)
        assert not hybrid.contains(5.0 + 1e-8)

    def test_integers_are_farther_than_their_gap(self, hybrid):
        rng = np.random.default_rng(3)
        a = rng.integers(2, 51, 1000).astype(float)
        b = rng.integers(2, 51, 1000).astype(float)
        distinct = a != b
        d = hybrid.distance(a[distinct], b[distinct])
        assert np.all(d > np.abs(a[distinct] - b[distinct]))

    def test_sampler_deterministic_and_members(self, hybrid):
        a = hybrid.sample(np.random.default_rng(11), 500)
        b = hybrid.sample(np.random.default_rng(11), 500)
        assert np.array_equal(a, b)
        assert np.all(hybrid.contains(a))
        assert a.max() <= 50 and (a >= 2).any() and (a <= 1).any()

    def test_perturb_stays_inside(self, hybrid):
        rng = np.random.default_rng(0)
        xs = hybrid.sample(rng, 2000)
        moved = hybrid.perturb(rng, xs, 0.3)
        assert np.all(hybrid.contains(moved))
        assert np.all((moved >= 2) == (xs >= 2))

    def test_axioms(self, hybrid):
        assert check_metric_axioms(hybrid, seed=0, n_pairs=10_000, n_triples=10_000).ok


class TestIntervalSpace:
    def test_examples(self):
        s = interval_space(0, 1)
        assert s.distance(0, 1) == 1
        assert s.distance(0.5, 0.5) == 0
        assert not interval_space(-2, 3).contains(3.5)

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            interval_space(1, 1)
        with pytest.raises(ValueError):
            interval_space(0, float("inf"))

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_axioms(self, seed):
        assert check_metric_axioms(interval_space(-2, 3), seed=seed).ok


def test_finite_space_axioms():
    for metric in ("abs", "discrete"):
        assert check_metric_axioms(FiniteSpace((0.0, 1.0, 2.5, 4.0), metric), seed=0).ok


def squared_space():
    return CustomSpace(
        membership_fn=lambda x: (np.asarray(x) >= 0) & (np.asarray(x) <= 2),
        distance_fn=lambda x, y: (np.asarray(x, float) - np.asarray(y, float)) ** 2,
        sampler=lambda rng, n: rng.uniform(0, 2, n),
        description="[0,2] with (x-y)^2",
        landmarks=(0.0, 0.5, 1.0, 1.5, 2.0),
    )


def test_squared_distance_breaks_triangle():
    report = check_metric_axioms(squared_space(), seed=0, n_pairs=100, n_triples=10_000)
    assert not report.ok
    assert report.triangle.witness == (0.0, 1.0, 2.0)
    # d(0,2) - d(0,1) - d(1,2) = 4 - 1 - 1
    assert report.triangle.worst == 2.0
    assert report.symmetry.violations == 0


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.one_of(st.floats(0, 1), st.integers(2, 60).map(float))] * 3))
def test_hybrid_triangle_inequality(triple):
    x, y, z = triple
    h = hybrid_space()
    assert h.distance(x, z) <= h.distance(x, y) + h.distance(y, z) + 1e-12
    assert h.distance(x, y) == h.distance(y, x)


class TestApply:
    def test_paper_map(self, hybrid):
        T = paper_map()
        assert apply(T, 0.5, hybrid) == pytest.approx(0.1, abs=1e-16)
        assert apply(T, 7, hybrid) == 3 / 125
        assert apply(T, 0, hybrid) == 0
        assert apply(T, 1, hybrid) == 3 / 125

    def test_non_member_input(self, hybrid):
        with pytest.raises(NonMemberError):
            apply(paper_map(), 1.5, hybrid)

    def test_image_outside(self, unit):
        with pytest.raises(ClosureError):
            apply(affine_map("x + 1"), 0.5, unit)

    def test_without_space_no_checks(self):
        assert apply(affine_map("x + 1"), 0.5) == 1.5


class TestClosure:
    def test_paper_map_closed(self, hybrid):
        report = verify_closure(hybrid, paper_map(), seed=stream(0, "closure"), n=10_000)
        assert report.ok and report.checked >= 10_000

    def test_shift_escapes(self, unit):
        report = verify_closure(unit, affine_map("x + 1"), seed=0, n=1000)
        assert not report.ok
        xs = [x for x, _ in report.witnesses]
        assert 1.0 in xs
        for x, tx in report.witnesses:
            assert tx == pytest.approx(x + 1)

    @pytest.mark.parametrize("space", [interval_space(0, 1), hybrid_space(), FiniteSpace((1.0, 2.0))])
    def test_identity_closed(self, space):
        assert verify_closure(space, affine_map("x", -1e9, 1e9), seed=0, n=500).ok

    def test_rule_undefined_counts_as_violation(self):
        report = verify_closure(interval_space(0, 2), affine_map("x", 0, 1), seed=0, n=200)
        assert not report.ok
        assert any(tx is None for _, tx in report.witnesses)
