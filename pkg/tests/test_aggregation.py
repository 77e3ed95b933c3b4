import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from betadpca import (
    AggregateResult,
    BetaConfig,
    InvalidInput,
    TieWarning,
    TruncatedEig,
    beta_aggregate,
    beta_mean,
    fan_aggregate,
    matrix_power,
    phi_mean,
    rho_similarity,
    truncated_eig,
)
from helpers import eig2x2, rand_spd, rand_summary


def e_summary(values, p, offset=0):
    """Summary whose vectors are canonical basis columns offset..offset+q-1."""
    values = np.asarray(values, dtype=float)
    return TruncatedEig(values=values, vectors=np.eye(p)[:, offset:offset + len(values)])


class TestPhiMean:
    def test_identical_inputs_recovered(self):
        rng = np.random.default_rng(31)
        m = rand_spd(rng, 5, lo=0.5, hi=3.0)
        for f, finv in ((np.log, np.exp), (np.sqrt, np.square)):
            out = phi_mean([m, m, m], f, finv)
            assert_allclose(out, m, rtol=1e-10, atol=1e-12)

    def test_log_exp_gives_geometric_mean(self):
        out = phi_mean([np.diag([1.0, 4.0]), np.diag([4.0, 1.0])], np.log, np.exp)
        assert_allclose(out, 2.0 * np.eye(2), rtol=1e-12)


class TestBetaMean:
    def test_beta_one_is_arithmetic(self):
        rng = np.random.default_rng(32)
        ms = [rand_spd(rng, 6) for _ in range(4)]
        out = beta_mean(ms, BetaConfig(beta=1.0))
        assert_allclose(out, sum(ms) / 4.0, rtol=1e-10, atol=1e-12)

    def test_beta_two_non_commuting_oracle(self):
        # mean of squares of [[2,1],[1,2]] and diag(3,1) is [[7,2],[2,3]];
        # the beta=2 mean is its square root, eigenvalues sqrt(5 +- 2 sqrt 2)
        m1 = np.array([[2.0, 1.0], [1.0, 2.0]])
        m2 = np.diag([3.0, 1.0])
        out = beta_mean([m1, m2], BetaConfig(beta=2.0))
        values, vectors = eig2x2(7.0, 2.0, 3.0)
        expected = sum(np.sqrt(lam) * np.outer(v, v) for lam, v in zip(values, vectors))
        assert_allclose(out, expected, rtol=1e-12)
        got = np.sort(np.linalg.eigvalsh(out))[::-1]
        assert_allclose(got, [2.7979326519387624, 1.4736257582291966], rtol=1e-9)

    def test_harmonic_uses_delta_without_subtracting(self):
        delta = 1e-5
        out = beta_mean([np.diag([2.0, 2.0]), np.diag([4.0, 4.0])],
                        BetaConfig(beta=-1.0, delta=delta))
        expected = 1.0 / np.mean([1.0 / (2.0 + delta), 1.0 / (4.0 + delta)])
        assert_allclose(np.diag(out), [expected, expected], rtol=1e-12)

    def test_geometric_limit_diagonal(self):
        out = beta_mean([np.diag([1.0, 4.0]), np.diag([4.0, 1.0])], BetaConfig(beta=0.0))
        assert_allclose(out, 2.0 * np.eye(2), rtol=1e-10)

    @pytest.mark.parametrize("beta", [2.0, 1.0, 0.5, 0.0])
    def test_idempotent_on_copies(self, beta):
        rng = np.random.default_rng(33)
        m = rand_spd(rng, 5, lo=0.5, hi=3.0)
        out = beta_mean([m] * 4, BetaConfig(beta=beta))
        assert_allclose(out, m, rtol=1e-8, atol=1e-10)

    def test_idempotent_negative_beta_small_delta(self):
        rng = np.random.default_rng(34)
        m = rand_spd(rng, 5, lo=0.5, hi=3.0)
        out = beta_mean([m] * 3, BetaConfig(beta=-1.0, delta=1e-12))
        assert_allclose(out, m, rtol=1e-6)

    def test_small_beta_approaches_limit(self):
        rng = np.random.default_rng(35)
        ms = [rand_spd(rng, 6, lo=0.5, hi=3.0) for _ in range(3)]
        near = beta_mean(ms, BetaConfig(beta=1e-4))
        limit = beta_mean(ms, BetaConfig(beta=0.0))
        rel = np.linalg.norm(near - limit) / np.linalg.norm(limit)
        assert rel <= 1e-3

    def test_weights_default_matches_uniform(self):
        rng = np.random.default_rng(36)
        ms = [rand_spd(rng, 4) for _ in range(3)]
        cfg = BetaConfig(beta=1.0)
        assert np.array_equal(beta_mean(ms, cfg),
                              beta_mean(ms, cfg, weights=[1.0, 1.0, 1.0]))

    def test_unequal_weights_shift_result(self):
        ms = [np.eye(2), 3.0 * np.eye(2)]
        out = beta_mean(ms, BetaConfig(beta=1.0), weights=[3.0, 1.0])
        assert_allclose(out, 1.5 * np.eye(2), rtol=1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(InvalidInput):
            beta_mean([], BetaConfig(beta=1.0))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidInput):
            beta_mean([np.eye(2), np.eye(3)], BetaConfig(beta=1.0))


class TestBetaConfig:
    def test_rejects_bad_delta(self):
        with pytest.raises(InvalidInput):
            BetaConfig(beta=1.0, delta=0.0)

    def test_rejects_bad_floor(self):
        with pytest.raises(InvalidInput):
            BetaConfig(beta=0.0, eigen_floor=-1e-3)


class TestBetaAggregate:
    def test_single_machine_full_rank_recovers_input(self):
        rng = np.random.default_rng(37)
        m = rand_spd(rng, 5, lo=0.5, hi=3.0)
        summary = truncated_eig(m, 5)
        res = beta_aggregate([summary], BetaConfig(beta=1.0), 2)
        assert isinstance(res, AggregateResult)
        assert res.branch == "positive"
        assert_allclose(res.sigma_beta, m, rtol=1e-9, atol=1e-11)
        assert_allclose(res.leading.values, summary.values[:2], rtol=1e-9)

    def test_commuting_positive_branch(self):
        s1 = e_summary([3.0, 2.0], p=4)
        s2 = e_summary([5.0, 4.0], p=4)
        res = beta_aggregate([s1, s2], BetaConfig(beta=1.0), 1)
        assert_allclose(res.leading.values, [4.0], rtol=1e-12)
        assert_allclose(np.abs(res.leading.vectors[:, 0]), np.eye(4)[:, 0], atol=1e-10)

    def test_negative_branch_closed_form_commuting(self):
        # same basis on both machines, p > q exercises the background term
        delta = 1e-5
        s1 = e_summary([2.0], p=3)
        s2 = e_summary([4.0], p=3)
        res = beta_aggregate([s1, s2], BetaConfig(beta=-1.0, delta=delta), 1)
        assert res.branch == "negative"
        lead = 1.0 / np.mean([1.0 / (2.0 + delta), 1.0 / (4.0 + delta)])
        assert_allclose(res.leading.values[0], lead, rtol=1e-10)
        # off-summary directions carry the delta background only
        assert_allclose(res.sigma_beta[2, 2], delta, rtol=1e-6)

    @pytest.mark.parametrize("beta", [-2.0, -1.0, -0.5])
    def test_negative_branch_matches_dense_brute_force(self, beta):
        rng = np.random.default_rng(38)
        cfg = BetaConfig(beta=beta, delta=1e-4)
        p, q, m = 12, 4, 3
        summaries = [rand_summary(rng, p, q) for _ in range(m)]
        res = beta_aggregate(summaries, cfg, 2)
        dense = [matrix_power(s.reconstruct() + cfg.delta * np.eye(p), beta)
                 for s in summaries]
        brute = matrix_power(sum(dense) / m, 1.0 / beta)
        assert_allclose(res.sigma_beta, brute, rtol=1e-8, atol=1e-10)

    def test_limit_zero_branch_floors_missing_mass(self):
        rng = np.random.default_rng(39)
        cfg = BetaConfig(beta=0.0)
        summaries = [rand_summary(rng, 6, 3) for _ in range(2)]
        res = beta_aggregate(summaries, cfg, 2)
        assert res.branch == "limit_zero"
        vals = np.linalg.eigvalsh(res.sigma_beta)
        assert vals.min() > 0  # floored log keeps the result PD

    def test_positive_branch_matches_dense_brute_force(self):
        rng = np.random.default_rng(40)
        for beta in (0.5, 1.0, 2.0):
            summaries = [rand_summary(rng, 10, 4) for _ in range(3)]
            res = beta_aggregate(summaries, BetaConfig(beta=beta), 3)
            # the dense route re-eigendecomposes rank-deficient matrices, so
            # its round-off noise is larger than the summary route's
            brute = matrix_power(
                sum(matrix_power(s.reconstruct(), beta) for s in summaries) / 3.0,
                1.0 / beta)
            assert_allclose(res.sigma_beta, brute, rtol=1e-6, atol=1e-9)

    def test_exact_tie_at_cut_warns(self):
        s1 = e_summary([1.0], p=2, offset=0)
        s2 = e_summary([1.0], p=2, offset=1)
        with pytest.warns(TieWarning):
            beta_aggregate([s1, s2], BetaConfig(beta=1.0), 1)

    def test_rank_larger_than_summary_rejected(self):
        rng = np.random.default_rng(41)
        with pytest.raises(InvalidInput):
            beta_aggregate([rand_summary(rng, 5, 2)], BetaConfig(beta=1.0), 3)

    def test_mixed_dimensions_rejected(self):
        rng = np.random.default_rng(42)
        with pytest.raises(InvalidInput):
            beta_aggregate([rand_summary(rng, 5, 2), rand_summary(rng, 6, 2)],
                           BetaConfig(beta=1.0), 1)


class TestFanAggregate:
    def test_orthogonal_bases_average_projections(self):
        s1 = e_summary([9.0], p=2, offset=0)
        s2 = e_summary([1.0], p=2, offset=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TieWarning)
            res = fan_aggregate([s1, s2])
        assert res.branch == "projection_average"
        assert_allclose(res.sigma_beta, 0.5 * np.eye(2), atol=1e-12)

    def test_overlapping_bases_oracle(self):
        # projections onto e1 and (e1+e2)/sqrt(2) average to
        # [[3/4, 1/4], [1/4, 1/4]]; top eigenpair from the 2x2 oracle
        s1 = e_summary([5.0], p=2)
        v = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
        s2 = TruncatedEig(values=np.array([2.0]), vectors=v)
        res = fan_aggregate([s1, s2])
        values, vectors = eig2x2(0.75, 0.25, 0.25)
        assert_allclose(res.leading.values, values[:1], rtol=1e-12)
        assert_allclose(res.leading.vectors[:, 0], vectors[0], rtol=1e-10)

    def test_values_ignored_by_construction(self):
        rng = np.random.default_rng(43)
        s = rand_summary(rng, 6, 3)
        rescaled = TruncatedEig(values=s.values * 7.0, vectors=s.vectors)
        a = fan_aggregate([s])
        b = fan_aggregate([rescaled])
        assert np.array_equal(a.sigma_beta, b.sigma_beta)

    def test_agrees_with_beta_mean_on_unit_spectra(self):
        # with all summary eigenvalues equal to 1 the projection average and
        # the beta=1 aggregate have the same leading subspace
        rng = np.random.default_rng(44)
        summaries = []
        for _ in range(3):
            s = rand_summary(rng, 8, 3)
            summaries.append(TruncatedEig(values=np.ones(3), vectors=s.vectors))
        a = fan_aggregate(summaries)
        b = beta_aggregate(summaries, BetaConfig(beta=1.0), 3)
        rho = rho_similarity(a.leading, b.leading.vectors)
        assert rho > 1.0 - 1e-8
