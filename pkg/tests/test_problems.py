import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsg.data import make_partition, parse_libsvm
from adsg.losses import LossFamily
from adsg.problems import (
    ErmProblem,
    Regularizer,
    estimate_constants,
    full_gradient,
    full_objective,
    prox_block,
)
from conftest import central_diff_vec, dense_matrix, prox_oracle, random_sparse_dataset


class TestProx:
    def test_soft_threshold_example(self):
        reg = Regularizer(l1=1.0, l2=0.0)
        got = prox_block(reg, np.array([3.0, -0.5, 0.0]), 1.0)
        np.testing.assert_allclose(got, [2.0, 0.0, 0.0], atol=1e-15)
        oracle = prox_oracle(1.0, 0.0, [3.0, -0.5, 0.0], 1.0)
        np.testing.assert_allclose(got, oracle, atol=1e-8)

    def test_identity_when_unregularized(self, rng):
        reg = Regularizer()
        y = rng.standard_normal(6)
        np.testing.assert_array_equal(prox_block(reg, y, 0.7), y)

    def test_pure_l2_shrink(self):
        got = prox_block(Regularizer(l1=0.0, l2=2.0), np.array([4.0]), 0.5)
        np.testing.assert_allclose(got, [2.0], atol=1e-12)
        oracle = prox_oracle(0.0, 2.0, [4.0], 0.5)
        np.testing.assert_allclose(got, oracle, atol=1e-8)

    def test_invalid_step(self):
        with pytest.raises(ValueError):
            prox_block(Regularizer(1.0, 1.0), np.ones(2), 0.0)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.0, 3.0),
        st.floats(0.0, 3.0),
        st.floats(0.05, 4.0),
        st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=4),
    )
    def test_optimality_against_numeric_oracle(self, l1, l2, eta, ys):
        reg = Regularizer(l1=l1, l2=l2)
        y = np.asarray(ys)
        got = reg.prox(y, eta)

        def total(x):
            return eta * (l1 * np.abs(x).sum() + 0.5 * l2 * float(x @ x)) + 0.5 * float(
                (x - y) @ (x - y)
            )

        oracle_x = prox_oracle(l1, l2, y, eta)
        assert total(got) <= total(oracle_x) + 1e-10

    def test_block_separability_exact(self, rng):
        reg = Regularizer(l1=0.3, l2=0.8)
        y = rng.standard_normal(11)
        part = make_partition(11, 3)
        whole = reg.prox(y, 0.4)
        stitched = np.concatenate(
            [reg.prox(y[slice(*part.bounds(l))], 0.4) for l in range(part.B)]
        )
        np.testing.assert_array_equal(whole, stitched)


def small_problem(rng, loss=None, l1=0.01, l2=0.1, n=20, d=5):
    labels = rng.choice([-1.0, 1.0], size=n)
    ds = random_sparse_dataset(n, d, max(2, d - 1), rng, labels=labels)
    loss = loss or LossFamily("logistic")
    return ErmProblem(ds, loss, Regularizer(l1=l1, l2=l2))


class TestObjectiveGradient:
    def test_zero_point_logistic(self, rng):
        prob = small_problem(rng, l1=0.0, l2=0.0)
        assert full_objective(prob, np.zeros(5)) == pytest.approx(math.log(2.0))

    def test_zero_point_ridge(self, rng):
        labels = rng.standard_normal(12)
        ds = random_sparse_dataset(12, 4, 3, rng, labels=labels)
        prob = ErmProblem(ds, LossFamily("squared"), Regularizer(l2=0.5))
        want = 0.5 * float(labels @ labels) / 12
        assert full_objective(prob, np.zeros(4)) == pytest.approx(want, rel=1e-12)

    def test_against_dense_oracle(self, rng):
        prob = small_problem(rng)
        A = dense_matrix(prob.data)
        x = rng.standard_normal(5)
        t = A @ x
        want = float(prob.loss.value(t, prob.data.labels).mean()) + prob.reg.value(x)
        assert full_objective(prob, x) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_single_sample_squared_gradient(self):
        ds = parse_libsvm("2 1:1.0", d=2)
        prob = ErmProblem(ds, LossFamily("squared"), Regularizer())
        np.testing.assert_allclose(full_gradient(prob, np.zeros(2)), [-2.0, 0.0])

    @pytest.mark.parametrize(
        "loss",
        [LossFamily("logistic"), LossFamily("squared"), LossFamily("hinge", 0.3),
         LossFamily("absolute_deviation", 0.3)],
        ids=lambda f: f.kind,
    )
    def test_gradient_matches_finite_differences(self, loss, rng):
        prob = small_problem(rng, loss=loss, l1=0.0, l2=0.0)
        x = rng.standard_normal(5) * 0.4
        margins = prob.margins(x)
        if loss.kind == "hinge" and np.any(np.abs(prob.data.labels * margins - 1.0) < 1e-3):
            x = x + 0.01  # nudge away from branch boundaries
        num = central_diff_vec(lambda v: prob.smooth_value(v), x)
        np.testing.assert_allclose(prob.gradient(x), num, atol=1e-5)

    def test_linear_term_in_gradient_and_value(self, rng):
        prob = small_problem(rng, l1=0.0, l2=0.0)
        q = rng.standard_normal(5)
        shifted = ErmProblem(prob.data, prob.loss, prob.reg, linear=q)
        x = rng.standard_normal(5)
        np.testing.assert_allclose(shifted.gradient(x), prob.gradient(x) + q, atol=1e-12)
        assert shifted.objective(x) == pytest.approx(prob.objective(x) + float(q @ x))

    def test_dimension_mismatch(self, rng):
        prob = small_problem(rng)
        with pytest.raises(ValueError):
            full_objective(prob, np.zeros(7))
        with pytest.raises(ValueError):
            full_gradient(prob, np.zeros(7))

    def test_nonsmooth_gradient_rejected(self, rng):
        prob = small_problem(rng, loss=LossFamily("hinge"))
        with pytest.raises(ValueError, match="non-differentiable"):
            prob.gradient(np.zeros(5))

    def test_binary_labels_enforced(self, rng):
        ds = random_sparse_dataset(6, 3, 2, rng)  # continuous labels
        with pytest.raises(ValueError, match="labels"):
            ErmProblem(ds, LossFamily("logistic"), Regularizer())


class TestConstants:
    def test_two_block_example(self):
        ds = parse_libsvm("0 1:1.0 2:1.0")
        part = make_partition(2, 2)
        c = estimate_constants(ds, part, LossFamily("squared"), Regularizer())
        assert c.L == pytest.approx(2.0)
        assert c.L_B == pytest.approx(1.0)
        assert c.L_B <= c.L

    def test_logistic_scaling(self):
        ds = parse_libsvm("1 1:2.0")
        part = make_partition(1, 1)
        c = estimate_constants(ds, part, LossFamily("logistic"), Regularizer())
        assert c.L == pytest.approx(1.0)

    def test_kappa_infinite_without_strong_convexity(self):
        ds = parse_libsvm("1 1:2.0")
        c = estimate_constants(ds, make_partition(1, 1), LossFamily("logistic"), Regularizer())
        assert math.isinf(c.kappa)

    def test_mu_override(self):
        ds = parse_libsvm("1 1:2.0")
        c = estimate_constants(
            ds, make_partition(1, 1), LossFamily("logistic"), Regularizer(l2=0.5), 0.125
        )
        assert c.mu == 0.125
        assert c.kappa == pytest.approx((c.L + c.L_B) / 0.125)

    def test_block_bound_never_exceeds_full(self, rng):
        for trial in range(10):
            ds = random_sparse_dataset(8, 13, 5, rng)
            for B in (1, 2, 5, 13):
                c = estimate_constants(
                    ds, make_partition(13, B), LossFamily("squared"), Regularizer()
                )
                assert c.L_B <= c.L + 1e-15

    def test_all_zero_matrix_constants_vanish(self):
        ds = parse_libsvm("1 1:0.0\n-1 1:0.0")
        c = estimate_constants(ds, make_partition(1, 1), LossFamily("squared"), Regularizer())
        assert c.L == 0.0 and c.L_B == 0.0

    def test_smoothed_curvature_is_reciprocal(self):
        ds = parse_libsvm("1 1:1.0")
        c = estimate_constants(
            ds, make_partition(1, 1), LossFamily("hinge", 0.25), Regularizer()
        )
        assert c.L == pytest.approx(4.0)
