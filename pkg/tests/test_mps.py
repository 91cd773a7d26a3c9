"""Tests for the canonical MPS data model and energy evaluation."""

import numpy as np
import pytest

from dpmps import hamiltonian as ham
from dpmps import mps
from dpmps.errors import SchmidtRankError, ShapeMismatchError


def random_state(rng, size):
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


class TestMuOf:
    def test_rank_one(self):
        b = np.zeros((1, 2, 1), dtype=complex)
        b[0, 0, 0] = 1.0
        assert np.allclose(mps.mu_of(np.array([1.0]), b), [1.0])

    def test_direct_formula(self):
        lam = np.array([1.0, 1.0]) / np.sqrt(2)
        b = np.zeros((2, 2, 2), dtype=complex)
        b[0, 0, 0] = 1.0
        b[1, 1, 0] = 1.0
        assert np.allclose(mps.mu_of(lam, b), [1.0, 0.0])

    def test_unit_norm_for_right_canonical(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            q, _ = np.linalg.qr(rng.standard_normal((6, 3))
                                + 1j * rng.standard_normal((6, 3)))
            b = q[:, :3].T.reshape(3, 2, 3)
            lam = np.abs(rng.standard_normal(3))
            lam /= np.linalg.norm(lam)
            assert abs(np.linalg.norm(mps.mu_of(lam, b)) - 1.0) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mps.mu_of(np.ones(2), np.zeros((3, 2, 3)))


class TestCanonicalize:
    def test_product_state(self):
        v = mps.product_basis_state(5, 2, 2, [0] * 5)
        m = mps.canonicalize(v, 5, 2, 1, 2)
        assert np.allclose(m.lambda2, [1.0])
        for lam in m.derived_lambdas():
            assert np.allclose(lam, [1.0])
        w = mps.to_dense(m)
        assert np.linalg.norm(mps.align_phase(w, v) - v) < 1e-12

    def test_bell_pair_schmidt(self):
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / np.sqrt(2)
        m = mps.canonicalize(v, 2, 2, 2, 2)
        assert np.allclose(sorted(m.lambda2), [1 / np.sqrt(2)] * 2)

    def test_roundtrip_random(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            v = random_state(rng, 64)
            m = mps.canonicalize(v, 6, 2, 8, 2)
            w = mps.to_dense(m)
            assert np.linalg.norm(mps.align_phase(w, v) - v) < 1e-8

    def test_strict_mode_rank_guard(self):
        rng = np.random.default_rng(2)
        v = random_state(rng, 64)
        with pytest.raises(SchmidtRankError):
            mps.canonicalize(v, 6, 2, 2, 2, mode="strict")

    def test_truncate_mode_reports_weight(self):
        rng = np.random.default_rng(3)
        v = random_state(rng, 64)
        m = mps.canonicalize(v, 6, 2, 2, 2, mode="truncate")
        assert m.discarded_weight > 0
        assert abs(np.linalg.norm(mps.to_dense(m)) - 1.0) < 1e-10

    def test_unnormalized_input_rejected(self):
        with pytest.raises(ValueError):
            mps.canonicalize(np.ones(16, dtype=complex), 4, 2, 4, 2)


class TestToDense:
    def test_basis_product_chain(self):
        v = mps.product_basis_state(4, 2, 2, [0, 1, 1, 0])
        m = mps.canonicalize(v, 4, 2, 1, 2)
        w = mps.to_dense(m)
        assert np.abs(np.abs(w) - np.abs(v)).max() < 1e-12

    def test_output_norm_one(self):
        rng = np.random.default_rng(4)
        v = random_state(rng, 64)
        m = mps.canonicalize(v, 6, 2, 8, 2)
        assert abs(np.linalg.norm(mps.to_dense(m)) - 1.0) < 1e-10


class TestCheckCanonical:
    def test_canonicalize_output_passes(self):
        rng = np.random.default_rng(5)
        v = random_state(rng, 64)
        rep = mps.check_canonical(mps.canonicalize(v, 6, 2, 8, 2))
        assert rep.ok
        assert rep.max_residual <= 1e-10

    def test_equal_rows_flagged(self):
        bad = np.zeros((2, 2, 2), dtype=complex)
        bad[0, 0, 0] = 1.0
        bad[1, 0, 0] = 1.0        # two identical rows
        b3 = np.zeros((2, 2, 1), dtype=complex)
        b3[0, 0, 0] = 1.0
        b3[1, 1, 0] = 1.0
        m = mps.CanonicalMps(
            n=4, d=2, D=2, d_end=2,
            gamma_left=np.eye(2, dtype=complex),
            lambda2=np.array([1.0, 0.0]),
            b_tensors=[bad, b3],
            gamma_right=np.array([[1.0, 0.0]], dtype=complex),
        )
        rep = mps.check_canonical(m)
        assert max(rep.right) >= 1.0 - 1e-12

    def test_normalization_residual(self):
        lam = np.array([0.6, 0.8])
        assert abs(np.linalg.norm(lam) - 1.0) < 1e-15


class TestLocalEnergy:
    def zz(self):
        return np.kron(ham.Z, ham.Z)

    def test_aligned_window(self):
        gam = np.array([[1.0, 0.0]], dtype=complex)
        b = np.zeros((1, 2, 1), dtype=complex)
        b[0, 0, 0] = 1.0
        e = mps.local_energy_left(gam, np.array([1.0]), b, self.zz())
        assert np.isclose(e, 1.0)

    def test_antialigned_window(self):
        gam = np.array([[1.0, 0.0]], dtype=complex)
        b = np.zeros((1, 2, 1), dtype=complex)
        b[0, 1, 0] = 1.0
        e = mps.local_energy_left(gam, np.array([1.0]), b, self.zz())
        assert np.isclose(e, -1.0)

    def test_non_hermitian_rejected(self):
        gam = np.array([[1.0, 0.0]], dtype=complex)
        b = np.zeros((1, 2, 1), dtype=complex)
        b[0, 0, 0] = 1.0
        bad = np.eye(4, dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(ValueError):
            mps.local_energy_left(gam, np.array([1.0]), b, bad)

    def test_windowed_sum_matches_full(self):
        rng = np.random.default_rng(6)
        h = ham.build_model("heisenberg", {}, 6)
        for _ in range(5):
            v = random_state(rng, 64)
            m = mps.canonicalize(v, 6, 2, 8, 2)
            full = mps.expectation_full(m, h)
            assert abs(mps.windowed_energy_sum(m, h) - full) < 1e-8


class TestExpectationFull:
    def test_zero_hamiltonian(self):
        rng = np.random.default_rng(7)
        m = mps.canonicalize(random_state(rng, 64), 6, 2, 8, 2)
        zeros = [np.zeros((4, 4), dtype=complex)] * 5
        h = ham.NnHamiltonian(n=6, dims=[2] * 6, terms=zeros)
        assert abs(mps.expectation_full(m, h)) < 1e-12

    def test_matches_dense(self):
        rng = np.random.default_rng(8)
        h = ham.build_model("random_hermitian", {}, 6, seed=11)
        hd = ham.to_dense_hamiltonian(h)
        for _ in range(5):
            v = random_state(rng, 64)
            m = mps.canonicalize(v, 6, 2, 8, 2)
            w = mps.to_dense(m)
            ref = (np.vdot(w, hd @ w) / np.vdot(w, w)).real
            assert abs(mps.expectation_full(m, h) - ref) < 1e-8


class TestStructuralProperties:
    def test_block_norm_vector_contracts_distances(self):
        # norms of first-factor blocks are 1-Lipschitz in the full vectors
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
            b = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
            an = np.linalg.norm(a, axis=1)
            bn = np.linalg.norm(b, axis=1)
            assert np.sum((an - bn) ** 2) <= np.linalg.norm(a - b) ** 2 + 1e-12

    def test_raw_chain_norm_sqrt_d(self):
        rng = np.random.default_rng(10)
        v = random_state(rng, 64)
        m = mps.canonicalize(v, 6, 2, 8, 2)
        # contract the interior right-canonical chain without a leading lambda
        acc = m.b_tensors[1]
        for b in m.b_tensors[2:]:
            acc = np.tensordot(acc, b, axes=([acc.ndim - 1], [0]))
        rank = m.b_tensors[1].shape[0]
        assert abs(np.linalg.norm(acc) - np.sqrt(rank)) < 1e-10


class TestJsonFormat:
    def test_roundtrip(self):
        rng = np.random.default_rng(11)
        v = random_state(rng, 64)
        m = mps.canonicalize(v, 6, 2, 8, 2)
        m2 = mps.mps_from_json(mps.mps_to_json(m))
        assert np.linalg.norm(mps.to_dense(m2) - mps.to_dense(m)) < 1e-12

    def test_version_check(self):
        with pytest.raises(ValueError):
            mps.mps_from_json({"version": 99})
