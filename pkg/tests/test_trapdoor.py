"""Trapdoor generation and preimage sampling contracts."""

import math

import numpy as np
import pytest

from qibe.errors import ContractError, InvalidInputError
from qibe.gaussian import sample_vec
from qibe.params import SchemeParams
from qibe.rng import make_rng
from qibe.trapdoor import (
    GS_BOUND_CONSTANT,
    NORM_SLACK,
    gram_schmidt,
    sample_image_pair,
    sample_preimage,
    trapgen,
)

TINY = SchemeParams(n=2, m=84, q=101, sigma=4.0)  # sigma unused by trapgen


@pytest.fixture(scope="module")
def trapdoor_instance():
    A, T = trapgen(TINY, make_rng(123))
    _, norms = gram_schmidt(T)
    sigma = float(norms.max()) * math.sqrt(math.log2(TINY.m)) * 1.05
    return A, T, sigma


class TestGramSchmidt:
    def test_identity_fixed_point(self):
        Q, norms = gram_schmidt(np.eye(4))
        assert np.allclose(Q, np.eye(4))
        assert np.allclose(norms, 1.0)

    def test_orthogonality(self):
        B = np.array([[1, 1], [0, 1]])
        Q, _ = gram_schmidt(B)
        assert abs(Q[:, 0] @ Q[:, 1]) < 1e-9

    def test_reconstruction(self):
        rng = make_rng(5)
        B = rng.integers(-9, 10, size=(6, 6)).astype(float)
        while abs(np.linalg.det(B)) < 1e-6:
            B = rng.integers(-9, 10, size=(6, 6)).astype(float)
        Q, norms = gram_schmidt(B)
        # upper-triangular coefficients mu[i, j] = <b_j, q_i> / <q_i, q_i>
        mu = np.triu(Q.T @ B / (norms**2)[:, None])
        assert np.allclose(Q @ mu, B, atol=1e-6)

    def test_pairwise_orthogonal_random(self):
        B = make_rng(8).integers(-20, 21, size=(10, 10)).astype(float)
        Q, norms = gram_schmidt(B)
        G = Q.T @ Q
        off = G - np.diag(np.diag(G))
        assert np.abs(off).max() < 1e-6 * norms.max() ** 2

    def test_rank_deficient_rejected(self):
        B = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(InvalidInputError):
            gram_schmidt(B)


class TestTrapGen:
    def test_kernel_contract(self, trapdoor_instance):
        A, T, _ = trapdoor_instance
        assert not ((A @ T) % TINY.q).any()

    def test_full_rank(self, trapdoor_instance):
        _, T, _ = trapdoor_instance
        sign, _ = np.linalg.slogdet(T.astype(float))
        assert sign != 0

    def test_gs_norm_bound(self, trapdoor_instance):
        _, T, _ = trapdoor_instance
        _, norms = gram_schmidt(T)
        bound = GS_BOUND_CONSTANT * math.sqrt(TINY.n * math.log2(TINY.q))
        assert norms.max() <= bound

    def test_gs_norm_bound_across_seeds(self):
        bound = GS_BOUND_CONSTANT * math.sqrt(TINY.n * math.log2(TINY.q))
        for seed in range(8):
            _, T = trapgen(TINY, make_rng(seed))
            _, norms = gram_schmidt(T)
            assert norms.max() <= bound

    def test_entry_uniformity_chi_square(self, trapdoor_instance):
        A, _, _ = trapdoor_instance
        counts = np.bincount(A.reshape(-1), minlength=TINY.q)
        expected = A.size / TINY.q
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # dof = q - 1 = 100; the p > 0.001 cut is chi2 < 149.45
        assert chi2 < 149.45

    def test_too_small_m_rejected(self):
        with pytest.raises(InvalidInputError):
            trapgen(SchemeParams(n=2, m=80, q=101, sigma=4.0), make_rng(0))


class TestSamplePreimage:
    def test_syndrome_contract(self, trapdoor_instance):
        A, T, sigma = trapdoor_instance
        rng = make_rng(7)
        for _ in range(10):
            u = rng.integers(0, TINY.q, size=TINY.n)
            r = sample_preimage(A, T, u, sigma, TINY.q, rng)
            assert ((A @ r) % TINY.q == u).all()

    def test_zero_syndrome_lands_in_kernel(self, trapdoor_instance):
        A, T, sigma = trapdoor_instance
        r = sample_preimage(A, T, np.zeros(TINY.n, dtype=np.int64), sigma, TINY.q, make_rng(9))
        assert not ((A @ r) % TINY.q).any()

    def test_norm_bound(self, trapdoor_instance):
        A, T, sigma = trapdoor_instance
        rng = make_rng(15)
        limit = sigma * math.sqrt(TINY.m) * NORM_SLACK
        for _ in range(10):
            u = rng.integers(0, TINY.q, size=TINY.n)
            r = sample_preimage(A, T, u, sigma, TINY.q, rng)
            assert np.linalg.norm(r) <= limit

    def test_coordinate_means_center_at_zero(self, trapdoor_instance):
        # 200 draws for one fixed syndrome; the sampler subtracts a lattice
        # point centered on the particular solution, so each coordinate of
        # the output should average to 0 within Monte Carlo error.
        A, T, sigma = trapdoor_instance
        rng = make_rng(42)
        u = rng.integers(0, TINY.q, size=TINY.n)
        rs = np.array(
            [sample_preimage(A, T, u, sigma, TINY.q, rng) for _ in range(200)],
            dtype=float,
        )
        mean = rs.mean(axis=0)
        stderr = rs.std(axis=0, ddof=1) / math.sqrt(rs.shape[0])
        assert (np.abs(mean) <= 3 * stderr).all()

    def test_warns_below_quality_bound(self, trapdoor_instance):
        A, T, _ = trapdoor_instance
        u = np.zeros(TINY.n, dtype=np.int64)
        with pytest.warns(UserWarning, match="quality bound"):
            sample_preimage(A, T, u, 5.0, TINY.q, make_rng(3), max_attempts=1000)

    def test_mismatched_trapdoor_rejected(self, trapdoor_instance):
        A, T, sigma = trapdoor_instance
        other_A, _ = trapgen(TINY, make_rng(999))
        with pytest.raises(ContractError):
            sample_preimage(other_A, T, np.zeros(TINY.n, dtype=np.int64), sigma, TINY.q, make_rng(0))

    def test_wrong_syndrome_length_rejected(self, trapdoor_instance):
        A, T, sigma = trapdoor_instance
        with pytest.raises(InvalidInputError):
            sample_preimage(A, T, np.zeros(5, dtype=np.int64), sigma, TINY.q, make_rng(0))


class TestImagePair:
    def test_image_contract(self, trapdoor_instance):
        A, _, _ = trapdoor_instance
        U, R = sample_image_pair(A, 3, 20.0, TINY.q, make_rng(4))
        assert ((A @ R) % TINY.q == U).all()
        assert U.shape == (TINY.n, 3)
        assert R.shape == (TINY.m, 3)

    def test_column_norms(self, trapdoor_instance):
        A, _, _ = trapdoor_instance
        rng = make_rng(6)
        bound = 20.0 * math.sqrt(TINY.m) * NORM_SLACK
        hits = 0
        for _ in range(200):
            _, R = sample_image_pair(A, 2, 20.0, TINY.q, rng)
            hits += int((np.linalg.norm(R.astype(float), axis=0) <= bound).all())
        assert hits >= 199

    def test_determinism(self, trapdoor_instance):
        A, _, _ = trapdoor_instance
        U1, R1 = sample_image_pair(A, 2, 20.0, TINY.q, make_rng(77))
        U2, R2 = sample_image_pair(A, 2, 20.0, TINY.q, make_rng(77))
        assert (U1 == U2).all() and (R1 == R2).all()

    def test_columns_match_vector_sampler_stream(self, trapdoor_instance):
        A, _, _ = trapdoor_instance
        _, R = sample_image_pair(A, 2, 20.0, TINY.q, make_rng(31))
        rng = make_rng(31)
        for j in range(2):
            assert (R[:, j] == sample_vec(TINY.m, 20.0, rng)).all()
