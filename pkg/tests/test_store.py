import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import dense_b, make_random_store
from qsass.errors import ConfigurationError
from qsass.store import (CurvaturePairStore, SpectrumBounds,
                         enforce_spectrum, extreme_eigenvalues,
                         try_insert_pair, two_loop_apply)


def test_bounds_are_strict():
    b = SpectrumBounds(0.9, 1.5)
    assert b.admits(1.49, 0.91)
    assert not b.admits(1.5, 1.0)   # equality at the top violates
    assert not b.admits(1.0, 0.9)   # equality at the bottom violates
    with pytest.raises(ConfigurationError):
        SpectrumBounds(2.0, 1.0)


class TestTryInsert:
    def test_orthogonal_pair_rejected(self):
        store = CurvaturePairStore(2, 2, c=1.0)
        assert not store.try_insert([1.0, 0.0], [0.0, 1.0])
        assert len(store) == 0

    def test_positive_curvature_accepted(self):
        store = CurvaturePairStore(2, 2, c=1.0)
        assert store.try_insert([1.0, 0.0], [2.0, 0.0])
        assert len(store) == 1

    def test_full_store_evicts_oldest(self):
        store = CurvaturePairStore(2, 2, c=1.0, clamp_capacity=False)
        store.try_insert([1.0, 0.0], [2.0, 0.0])
        store.try_insert([0.0, 1.0], [0.0, 3.0])
        store.try_insert([1.0, 1.0], [4.0, 4.0])
        assert len(store) == 2
        assert_allclose(store.s_list[0], [0.0, 1.0])
        assert_allclose(store.s_list[1], [1.0, 1.0])

    def test_capacity_clamped_to_half_dimension(self):
        store = CurvaturePairStore(4, 10, c=1.0)
        assert store.capacity == 2

    def test_unbounded_capacity(self):
        rng = np.random.default_rng(0)
        store = CurvaturePairStore(3, None, c=1.0)
        kept = 0
        for _ in range(40):
            s = rng.standard_normal(3)
            y = rng.standard_normal(3)
            kept += store.try_insert(s, y)
        assert len(store) == kept > 10


class TestExtremeEigenvalues:
    def test_empty_store(self):
        store = CurvaturePairStore(4, 2, c=1.0)
        assert store.extreme_eigenvalues() == (1.0, 1.0)
        store_c = CurvaturePairStore(4, 2, c=3.5)
        assert store_c.extreme_eigenvalues() == (3.5, 3.5)

    def test_single_axis_pair(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        store.try_insert([1.0, 0.0], [2.0, 0.0])
        lo_hi = store.extreme_eigenvalues()
        assert_allclose(lo_hi, (2.0, 1.0), atol=1e-12)

    def test_three_random_pairs_match_dense(self):
        rng = np.random.default_rng(9)
        store = make_random_store(rng, 6, 3)
        sig_max, sig_min = store.extreme_eigenvalues()
        dense_eigs = np.linalg.eigvalsh(dense_b(store))
        assert abs(sig_max - dense_eigs[-1]) <= 1e-8 * max(1.0, abs(dense_eigs[-1]))
        assert abs(sig_min - dense_eigs[0]) <= 1e-8 * max(1.0, abs(dense_eigs[0]))

    def test_hundred_random_stores_match_dense(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            n = int(rng.integers(1, 11))
            m = int(rng.integers(0, min(5, n // 2) + 1))
            c = float(rng.uniform(0.5, 2.0))
            store = make_random_store(rng, n, m, c=c)
            sig_max, sig_min = store.extreme_eigenvalues()
            dense_eigs = np.linalg.eigvalsh(dense_b(store))
            scale = max(1.0, float(np.max(np.abs(dense_eigs))))
            assert abs(sig_max - dense_eigs[-1]) <= 1e-8 * scale
            assert abs(sig_min - dense_eigs[0]) <= 1e-8 * scale

    def test_overfull_store_uses_dense_route(self):
        # 2m > n exercises the fallback path; it must agree with the
        # recursive reconstruction too.
        rng = np.random.default_rng(21)
        store = make_random_store(rng, 3, 3, capacity=3)
        sig_max, sig_min = store.extreme_eigenvalues()
        dense_eigs = np.linalg.eigvalsh(dense_b(store))
        assert_allclose((sig_max, sig_min),
                        (dense_eigs[-1], dense_eigs[0]), rtol=1e-8)

    def test_cache_survives_queries_but_not_inserts(self):
        rng = np.random.default_rng(2)
        store = make_random_store(rng, 6, 2)
        first = store.extreme_eigenvalues()
        assert store.extreme_eigenvalues() == first
        s = rng.standard_normal(6)
        store.try_insert(s, s)  # <s, s> > 0, always inserts
        assert store.extreme_eigenvalues() != first


class TestEnforceSpectrum:
    def test_removes_one_pair_then_empty(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        store.try_insert([1.0, 0.0], [2.0, 0.0])  # B eigenvalues {2, 1}
        removed = store.enforce_spectrum(SpectrumBounds(0.9, 1.5))
        assert removed == 1
        assert len(store) == 0

    def test_wide_bounds_remove_nothing(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        store.try_insert([1.0, 0.0], [2.0, 0.0])
        assert store.enforce_spectrum(SpectrumBounds(0.5, 10.0)) == 0
        assert len(store) == 1

    def test_empty_store_is_a_no_op(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        assert store.enforce_spectrum(SpectrumBounds(0.5, 10.0)) == 0

    def test_c_outside_bounds_rejected(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        with pytest.raises(ConfigurationError):
            store.enforce_spectrum(SpectrumBounds(2.0, 3.0))

    def test_post_enforcement_dense_eigenvalues_inside_bounds(self):
        rng = np.random.default_rng(13)
        bounds = SpectrumBounds(1e-2, 1e2)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(1, n // 2 + 1))
            # Mix widely scaled pairs so some violate the bounds.
            store = CurvaturePairStore(n, m, c=1.0)
            inserted = 0
            while inserted < m:
                scale = 10.0 ** rng.uniform(-3, 3)
                s = rng.standard_normal(n)
                y = scale * rng.standard_normal(n)
                if store.try_insert(s, y):
                    inserted += 1
            store.enforce_spectrum(bounds)
            eigs = np.linalg.eigvalsh(dense_b(store))
            assert eigs[-1] < bounds.upper + 1e-9
            assert eigs[0] > bounds.lower - 1e-9

    def test_oldest_pairs_go_first(self):
        # Make the first pair the offender; enforcement must remove it and
        # keep the newer benign one.
        store = CurvaturePairStore(4, 2, c=1.0)
        store.try_insert([1.0, 0.0, 0.0, 0.0], [50.0, 0.0, 0.0, 0.0])
        store.try_insert([0.0, 1.0, 0.0, 0.0], [0.0, 1.2, 0.0, 0.0])
        removed = store.enforce_spectrum(SpectrumBounds(0.5, 10.0))
        assert removed == 1
        assert len(store) == 1
        assert_allclose(store.s_list[0], [0.0, 1.0, 0.0, 0.0])


class TestTwoLoopApply:
    def test_empty_store_scales_by_inverse_c(self):
        store = CurvaturePairStore(2, 1, c=2.0)
        assert_allclose(store.apply_inverse(np.array([4.0, 6.0])), [2.0, 3.0])

    def test_single_axis_pair(self):
        store = CurvaturePairStore(2, 1, c=1.0)
        store.try_insert([1.0, 0.0], [2.0, 0.0])
        assert_allclose(store.apply_inverse(np.array([2.0, 1.0])),
                        [1.0, 1.0], atol=1e-12)

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            n = int(rng.integers(2, 11))
            m = int(rng.integers(0, n // 2 + 1))
            store = make_random_store(rng, n, m, min_cos=0.05)
            g = rng.standard_normal(n)
            d = store.apply_inverse(g)
            assert np.linalg.norm(dense_b(store) @ d - g) \
                <= 1e-8 * np.linalg.norm(g)

    def test_linearity(self):
        rng = np.random.default_rng(8)
        store = make_random_store(rng, 5, 2)
        g1 = rng.standard_normal(5)
        g2 = rng.standard_normal(5)
        lhs = store.apply_inverse(2.0 * g1 - 3.0 * g2)
        rhs = 2.0 * store.apply_inverse(g1) - 3.0 * store.apply_inverse(g2)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(rhs), 1)

    def test_direction_cosine_and_norm_bounds(self):
        # d = B^{-1} g realizations stay inside the ellipsoid the extreme
        # eigenvalues promise.
        rng = np.random.default_rng(19)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            store = make_random_store(rng, n, n // 2)
            sig_max, sig_min = store.extreme_eigenvalues()
            lo, hi = 1.0 / sig_max, 1.0 / sig_min
            g = rng.standard_normal(n)
            d = store.apply_inverse(g)
            g_norm = np.linalg.norm(g)
            d_norm = np.linalg.norm(d)
            assert d @ g / (d_norm * g_norm) >= lo / hi - 1e-9
            assert lo * g_norm - 1e-9 <= d_norm <= hi * g_norm + 1e-9


def test_module_level_aliases_delegate():
    store = CurvaturePairStore(2, 1, c=1.0)
    assert try_insert_pair(store, [1.0, 0.0], [2.0, 0.0])
    assert extreme_eigenvalues(store) == store.extreme_eigenvalues()
    assert_allclose(two_loop_apply(store, np.array([2.0, 1.0])), [1.0, 1.0])
    assert enforce_spectrum(store, SpectrumBounds(0.9, 1.5)) == 1
