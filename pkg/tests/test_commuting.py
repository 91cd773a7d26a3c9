"""Tests for the eigenspace projection refinement."""

import numpy as np
import pytest

from dpmps import commuting as cm
from dpmps import hamiltonian as ham
from dpmps import mps, oracle
from dpmps.errors import AnnihilationError


def perturbed_ground(h, amount, which=5):
    hd = ham.to_dense_hamiltonian(h)
    vals, vecs = np.linalg.eigh(hd)
    v = vecs[:, 0] + amount * vecs[:, which]
    v /= np.linalg.norm(v)
    return mps.canonicalize(v, h.n, h.dims[1], None, h.dims[0])


class TestEigProjectors:
    def test_zz_two_spaces(self):
        dec = cm.eig_projectors(np.kron(ham.Z, ham.Z))
        assert dec.k == 2
        assert sorted(np.round(dec.eigenvalues, 9)) == [-1.0, 1.0]
        for p in dec.projectors:
            assert np.isclose(np.trace(p).real, 2.0)

    def test_identity_single_space(self):
        dec = cm.eig_projectors(np.eye(4, dtype=complex))
        assert dec.k == 1
        assert np.abs(dec.projectors[0] - np.eye(4)).max() < 1e-12

    def test_completeness_orthogonality(self):
        h = ham.build_model("rotated_classical", {}, 4, seed=2)
        for term in h.terms:
            dec = cm.eig_projectors(term)
            total = sum(dec.projectors)
            assert np.abs(total - np.eye(4)).max() <= 1e-10
            for i, p in enumerate(dec.projectors):
                assert np.abs(p @ p - p).max() <= 1e-10
                for q in dec.projectors[i + 1:]:
                    assert np.abs(p @ q).max() <= 1e-10

    def test_non_hermitian_rejected(self):
        bad = np.eye(4, dtype=complex)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            cm.eig_projectors(bad)


class TestApplyProjector:
    def test_identity_projector(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        v /= np.linalg.norm(v)
        m = mps.canonicalize(v, 6, 2, None, 2)
        out, c = cm.apply_projector(m, np.eye(4, dtype=complex), 2)
        assert np.isclose(c, 1.0)
        w = mps.to_dense(out)
        assert np.linalg.norm(mps.align_phase(w, v) - v) < 1e-10

    def test_fixed_point_of_matching_projector(self):
        v = mps.product_basis_state(4, 2, 2, [0] * 4)
        m = mps.canonicalize(v, 4, 2, None, 2)
        p00 = np.zeros((4, 4), dtype=complex)
        p00[0, 0] = 1.0
        out, c = cm.apply_projector(m, p00, 1)
        assert np.isclose(c, 1.0)
        assert np.abs(np.abs(mps.to_dense(out)) - np.abs(v)).max() < 1e-12

    def test_matches_dense_application(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        v /= np.linalg.norm(v)
        m = mps.canonicalize(v, 6, 2, None, 2)
        h = ham.build_model("rotated_classical", {}, 6, seed=4)
        p = cm.eig_projectors(h.terms[2]).projectors[0]
        out, c = cm.apply_projector(m, p, 2)
        pe = cm._embedded(p, [2] * 6, 2)
        ref = pe @ v
        ref /= np.linalg.norm(ref)
        w = mps.to_dense(out)
        assert np.linalg.norm(mps.align_phase(w, ref) - ref) < 1e-8
        assert abs(c - np.vdot(v, pe @ v).real) < 1e-10

    def test_annihilation(self):
        v = mps.product_basis_state(4, 2, 2, [0] * 4)
        m = mps.canonicalize(v, 4, 2, None, 2)
        p11 = np.zeros((4, 4), dtype=complex)
        p11[3, 3] = 1.0
        with pytest.raises(AnnihilationError):
            cm.apply_projector(m, p11, 1)


class TestRefine:
    def test_zz6_from_exact_ground(self):
        h = ham.build_model("zz_chain", {}, 6)
        gt = oracle.exact_ground(h)
        m = mps.canonicalize(gt.ground_vector, 6, 2, None, 2)
        rr = cm.refine_to_eigenstate(m, h)
        assert np.isclose(rr.energy, -5.0)
        assert max(rr.residuals) <= 1e-10
        assert all(c >= 1 - 1e-9 for _, _, c in rr.chosen)

    def test_perturbed_ground_recovers_e0(self):
        for name, n, seed in (("zz_chain", 6, None),
                              ("rotated_classical", 5, 1),
                              ("rotated_classical", 5, 2)):
            h = ham.build_model(name, {}, n, seed=seed)
            e0 = oracle.exact_ground(h).e0
            rr = cm.refine_to_eigenstate(perturbed_ground(h, 0.1), h)
            assert abs(rr.energy - e0) <= 1e-8
            assert max(rr.residuals) <= 1e-8

    def test_projection_lemma_exhaustive(self):
        # from a surplus state, some eigenspace of each term has weight at
        # least 1/(k n^2) and energy at most e0 + (1 + 1/n) h
        for name, n, seed in (("zz_chain", 6, None),
                              ("rotated_classical", 5, 3)):
            h = ham.build_model(name, {}, n, seed=seed)
            hd = ham.to_dense_hamiltonian(h)
            e0 = oracle.exact_ground(h).e0
            m = perturbed_ground(h, 0.1)
            v = mps.to_dense(m)
            surplus = float(np.vdot(v, hd @ v).real) - e0
            for t, term in enumerate(h.terms):
                dec = cm.eig_projectors(term)
                found = False
                for p in dec.projectors:
                    pe = cm._embedded(p, list(m.dims), t)
                    w = pe @ v
                    c = float(np.vdot(v, w).real)
                    if c < 1.0 / (dec.k * n * n):
                        continue
                    wn = w / np.linalg.norm(w)
                    e = float(np.vdot(wn, hd @ wn).real)
                    if e <= e0 + (1 + 1 / n) * surplus + 1e-10:
                        found = True
                        break
                assert found, (name, t)

    def test_energy_telescoping(self):
        h = ham.build_model("rotated_classical", {}, 5, seed=5)
        hd = ham.to_dense_hamiltonian(h)
        e0 = oracle.exact_ground(h).e0
        m = perturbed_ground(h, 0.1)
        v = mps.to_dense(m)
        surplus = float(np.vdot(v, hd @ v).real) - e0
        rr = cm.refine_to_eigenstate(m, h)
        assert rr.energy - e0 <= np.e * surplus + 1e-10

    def test_bond_dimension_growth_bounded(self):
        h = ham.build_model("rotated_classical", {}, 5, seed=6)
        m = perturbed_ground(h, 0.1)
        base = max(m.bond_dims)
        rr = cm.refine_to_eigenstate(m, h)
        assert max(rr.state.bond_dims) <= base * 4


class TestVerifyEigenstate:
    def test_basis_eigenstate(self):
        h = ham.build_model("zz_chain", {}, 5)
        v = mps.product_basis_state(5, 2, 2, [0, 1, 0, 1, 0])
        m = mps.canonicalize(v, 5, 2, None, 2)
        assert max(cm.verify_eigenstate(m, h)) <= 1e-12

    def test_non_eigenstate_flagged(self):
        rng = np.random.default_rng(2)
        h = ham.build_model("zz_chain", {}, 5)
        v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        v /= np.linalg.norm(v)
        m = mps.canonicalize(v, 5, 2, None, 2)
        assert max(cm.verify_eigenstate(m, h)) > 0.1
