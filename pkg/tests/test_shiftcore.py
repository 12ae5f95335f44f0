import math

import numpy as np
import pytest

from multishift import lattice
from multishift import sampling
from multishift import shiftcore as sc
from multishift.numerics import frob_norm, hermpd


def identity_weights(d, top, n):
    eye = np.eye(n, dtype=np.complex128)
    return sc.WeightSystem(d, top, n, {
        (alpha, j): eye.copy()
        for alpha in lattice.Truncation(d, top).interior()
        for j in range(d)
    })


def scalar_weights(d, top, values):
    """d scalar weights, constant per coordinate."""
    return sc.WeightSystem(d, top, 1, {
        (alpha, j): np.array([[values[j]]], dtype=np.complex128)
        for alpha in lattice.Truncation(d, top).interior()
        for j in range(d)
    })


class TestValidateWeights:
    def test_identity_weights_pass(self):
        report = sc.validate_weights(identity_weights(2, 3, 2))
        assert report.passes
        assert report.max_commutation_residual == 0.0
        assert report.max_weight_norm == pytest.approx(1.0)

    def test_scalar_weights_commute(self):
        report = sc.validate_weights(scalar_weights(2, 3, [1.0, 2.0]))
        assert report.passes

    def test_noncommuting_pair_fails(self):
        eye = np.eye(2, dtype=np.complex128)
        weights = {
            ((0, 0), 0): np.array([[1.0, 1.0], [0.0, 1.0]], dtype=np.complex128),
            ((0, 0), 1): eye.copy(),
            ((0, 1), 0): eye.copy(),
            ((1, 0), 1): np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
            ((0, 1), 1): eye.copy(),
            ((1, 0), 0): eye.copy(),
        }
        report = sc.validate_weights(sc.WeightSystem(2, 2, 2, weights))
        assert not report.passes
        # direct 2x2 products: one order gives I, the other [[0,1],[1,1]]
        assert report.max_commutation_residual > 0.3

    def test_singular_weight_fails(self):
        ws = identity_weights(1, 2, 2)
        ws.weights[((0,), 0)] = np.diag([1.0, 0.0]).astype(np.complex128)
        report = sc.validate_weights(ws)
        assert not report.passes
        assert any("singular" in f for f in report.failures)


class TestMomentsFromWeights:
    def test_identity(self):
        ms = sc.moments_from_weights(identity_weights(2, 3, 2), hermpd(np.eye(2)))
        for alpha in ms.truncation():
            g = ms.gram(alpha)
            assert np.allclose(g.value(), np.eye(2), atol=1e-14)

    def test_scalar_doubling(self):
        ms = sc.moments_from_weights(scalar_weights(1, 6, [2.0]), hermpd(np.eye(1)))
        for k in range(7):
            val = ms.gram((k,)).value()[0, 0].real
            assert val == pytest.approx(4.0 ** k, rel=1e-12)

    def test_two_dim_scalar_path_independent_product(self):
        a, b = 1.5, 0.5
        ms = sc.moments_from_weights(scalar_weights(2, 4, [a, b]), hermpd(np.eye(1)))
        for alpha in ms.truncation():
            want = a ** (2 * alpha[0]) * b ** (2 * alpha[1])
            assert ms.gram(alpha).value()[0, 0].real == pytest.approx(want, rel=1e-12)

    def test_validation_enforced(self):
        ws = identity_weights(1, 2, 2)
        ws.weights[((0,), 0)] = np.diag([1.0, 0.0]).astype(np.complex128)
        with pytest.raises(sc.ValidationFailedError):
            sc.moments_from_weights(ws, hermpd(np.eye(2)))

    def test_g0_normalization_enters(self):
        g0 = hermpd(np.diag([4.0, 1.0]))
        ms = sc.moments_from_weights(identity_weights(2, 2, 2), g0)
        assert np.allclose(ms.gram((1, 1)).value(), np.diag([4.0, 1.0]))


class TestCanonicalWeights:
    def test_identity_moments(self):
        ms = sc.moments_from_weights(identity_weights(2, 3, 2), hermpd(np.eye(2)))
        ws = sc.canonical_weights(ms)
        for key, w in ws.weights.items():
            assert np.allclose(w, np.eye(2), atol=1e-12), key

    def test_scalar_ratio(self):
        grams = {(k,): hermpd(np.eye(1), k * math.log(4.0)) for k in range(6)}
        ws = sc.canonical_weights(sc.MomentSystem(1, 5, 1, grams))
        for key, w in ws.weights.items():
            assert w[0, 0].real == pytest.approx(2.0, rel=1e-12), key

    def test_degree_graded_moments_give_degree_graded_weights(self):
        # G_alpha depending only on |alpha| forces weights that do too
        rng = np.random.default_rng(0)
        per_degree = [sampling.random_pd(2, rng) for _ in range(5)]
        grams = {
            alpha: per_degree[lattice.degree(alpha)]
            for alpha in lattice.Truncation(2, 4)
        }
        ws = sc.canonical_weights(sc.MomentSystem(2, 4, 2, grams))
        for alpha in lattice.Truncation(2, 3):
            for j in range(2):
                ref_alpha = (lattice.degree(alpha), 0)
                ref = ws.weight(ref_alpha, 0)
                assert np.allclose(ws.weight(alpha, j), ref, atol=1e-10)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_commutation_residual(self, seed):
        ms = sampling.random_moment_system(2, 4, 2, seed)
        report = sc.validate_weights(sc.canonical_weights(ms))
        assert report.passes
        assert report.max_commutation_residual <= 1e-10

    @pytest.mark.parametrize("seed", [3, 4])
    def test_round_trip(self, seed):
        ms = sampling.random_moment_system(2, 3, 2, seed)
        ws = sc.canonical_weights(ms)
        rebuilt = sc.moments_from_weights(ws, hermpd(np.eye(2)))
        target = sc.normalized_to_identity(ms)
        for alpha in ms.truncation():
            got, want = rebuilt.gram(alpha), target.gram(alpha)
            diff = math.exp(got.logscale - want.logscale) * got.matrix - want.matrix
            assert frob_norm(diff) / frob_norm(want.matrix) <= 1e-9, alpha

    @pytest.mark.parametrize("seed,d,top,n", [
        (5, 1, 5, 2), (6, 2, 4, 2), (7, 3, 3, 2), (8, 2, 4, 3),
    ])
    def test_path_independence(self, seed, d, top, n):
        ms = sampling.random_moment_system(d, top, n, seed)
        ws = sc.canonical_weights(ms)
        for alpha in ws.truncation():
            canonical = sc.path_product(ws, alpha)
            reverse = sc.path_product(ws, alpha, lattice.reverse_monotone_path(alpha))
            scale = max(frob_norm(canonical), frob_norm(reverse))
            assert frob_norm(canonical - reverse) <= 1e-9 * scale, alpha


class TestBuildMz:
    def test_identity_moments(self):
        ms = sc.moments_from_weights(identity_weights(2, 3, 2), hermpd(np.eye(2)))
        mz = sc.build_mz(ms, 0)
        assert mz.norm_estimate == pytest.approx(1.0, abs=1e-12)
        for block in mz.blocks.values():
            assert np.allclose(block, np.eye(2), atol=1e-12)

    def test_unweighted_scalar_shift(self):
        grams = {(k,): hermpd(np.eye(1)) for k in range(7)}
        mz = sc.build_mz(sc.MomentSystem(1, 6, 1, grams), 0)
        assert mz.norm_estimate == pytest.approx(1.0, abs=1e-12)

    def test_bergman_type_blocks(self):
        # G_k = 1/(k+1) gives block(k) = sqrt((k+1)/(k+2))
        grams = {(k,): hermpd(np.eye(1), -math.log(k + 1)) for k in range(8)}
        mz = sc.build_mz(sc.MomentSystem(1, 7, 1, grams), 0)
        for k in range(7):
            want = math.sqrt((k + 1) / (k + 2))
            assert mz.blocks[(k,)][0, 0].real == pytest.approx(want, rel=1e-12)

    def test_blocks_invertible_with_margin(self):
        ms = sampling.random_moment_system(2, 4, 3, 12)
        for j in range(2):
            mz = sc.build_mz(ms, j)
            assert mz.min_singular_value > 0.0

    def test_full_matrix_is_level_raising(self):
        ms = sampling.random_moment_system(2, 3, 2, 13)
        full = sc.build_mz(ms, 1).full_matrix()
        trunc = ms.truncation()
        n = ms.fiber_dim
        for r, row_alpha in enumerate(trunc.indices):
            for c, col_alpha in enumerate(trunc.indices):
                block = full[r * n:(r + 1) * n, c * n:(c + 1) * n]
                if row_alpha != lattice.shifted(col_alpha, 1):
                    assert np.all(block == 0.0)


class TestAdjointFormula:
    def test_identity_moments_zero_residual(self):
        ms = sc.moments_from_weights(identity_weights(2, 3, 2), hermpd(np.eye(2)))
        for j in range(2):
            assert sc.check_adjoint_formula(ms, j) <= 1e-13

    def test_scalar_geometric(self):
        grams = {(k,): hermpd(np.eye(1), k * math.log(4.0)) for k in range(5)}
        ms = sc.MomentSystem(1, 4, 1, grams)
        # in orthonormal coordinates the adjoint block is the constant 2
        mz = sc.build_mz(ms, 0)
        for k in range(4):
            assert mz.blocks[(k,)][0, 0].real == pytest.approx(2.0, rel=1e-12)
        assert sc.check_adjoint_formula(ms, 0) <= 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_random_systems(self, seed):
        ms = sampling.random_moment_system(2, 4, 2, 50 + seed)
        for j in range(2):
            assert sc.check_adjoint_formula(ms, j) <= 1e-9


class TestConstruction:
    def test_missing_weight_rejected(self):
        with pytest.raises(ValueError):
            sc.WeightSystem(1, 2, 1, {((0,), 0): np.eye(1, dtype=np.complex128)})

    def test_missing_gram_rejected(self):
        with pytest.raises(ValueError):
            sc.MomentSystem(1, 1, 1, {(0,): hermpd(np.eye(1))})

    def test_moment_stacking_order(self):
        ms = sampling.random_moment_system(2, 2, 2, 14)
        mats, logs = ms.stacked()
        for k, alpha in enumerate(ms.truncation().indices):
            assert np.array_equal(mats[k], ms.gram(alpha).matrix)
            assert logs[k] == ms.gram(alpha).logscale
