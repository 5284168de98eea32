import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schauderspec import (
    AffineRule,
    BoundedCertified,
    BoundedNumerically,
    CallableRule,
    ConstantRule,
    Diagonal,
    ExplicitThenRule,
    GeometricRule,
    NotSummableError,
    OffsetRule,
    PowerLawRule,
    PreconditionViolatedError,
    Product,
    ShiftForm,
    Spread,
    SpreadSpec,
    StepCapExceededError,
    UnboundedWitness,
    adjoint_exclusion,
    block_norm_blowup,
    cibws,
    claim1_find_N,
    dense_eigs,
    forward_unilateral_shift,
    identity_permutation,
    infinite_product,
    kernel_trivial,
    naturals,
    replay_block_certificate,
    replay_shift_certificate,
    shields_similar,
    shift_eigen_exclude,
    sigma_bilateral,
    similarity_diagonal,
    truncate,
)
from schauderspec.sequences import ArithmeticSequence

RECIP = PowerLawRule(Fraction(1), 1)  # t_k = 1/k
GEO_HALF = GeometricRule(Fraction(1), Fraction(1, 2))  # 2^-k
ALPHA_TO_ONE = AffineRule(1, GeometricRule(-1, Fraction(1, 2)))  # 1 - 2^-n


def basic_shift(rule=RECIP):
    return ShiftForm(sigma_bilateral(), rule)


def oracle_backward_witness(lam_abs, bound, even_weight):
    """Smallest k with lam^k / prod_{j<=k} w(2j) > bound, by direct iteration."""
    prod = 1.0
    for k in range(1, 100_000):
        prod *= lam_abs / even_weight(k)
        if prod > bound:
            return k, prod
    raise AssertionError("oracle found no witness")


class TestShiftEigenExclude:
    def test_unit_lambda_witness(self):
        # even-branch weights t_{2j} = 1/(2j): the coefficient is 2^k k!
        k, value = oracle_backward_witness(1.0, 1e6, lambda j: 1.0 / (2 * j))
        cert = shift_eigen_exclude(basic_shift(), 1.0, bound=1e6)
        assert cert.regime == "backward-orbit"
        assert cert.witness_index == k
        assert math.isclose(cert.attained_magnitude, value, rel_tol=1e-9)

    def test_small_lambda_witness(self):
        k, value = oracle_backward_witness(0.1, 1e6, lambda j: 1.0 / (2 * j))
        cert = shift_eigen_exclude(basic_shift(), 0.1, bound=1e6)
        assert cert.witness_index == k
        assert math.isclose(cert.attained_magnitude, value, rel_tol=1e-9)

    def test_zero_lambda_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            shift_eigen_exclude(basic_shift(), 0.0)

    def test_witness_depends_on_modulus_only(self):
        a = shift_eigen_exclude(basic_shift(), 0.5, bound=1e8)
        b = shift_eigen_exclude(basic_shift(), 0.5j, bound=1e8)
        assert a.witness_index == b.witness_index
        assert a.attained_magnitude == b.attained_magnitude

    def test_non_vanishing_weights_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            shift_eigen_exclude(basic_shift(ConstantRule(1)), 2.0)

    def test_multi_orbit_rejected_by_default(self):
        diag_as_shift = ShiftForm(identity_permutation(), RECIP)
        with pytest.raises(PreconditionViolatedError):
            shift_eigen_exclude(diag_as_shift, 2.0)

    def test_step_cap_exceeded_is_loud(self):
        with pytest.raises(StepCapExceededError):
            shift_eigen_exclude(basic_shift(), 1.0, bound=1e12, step_cap=3)

    def test_log_space_survives_extreme_weights(self):
        # weight magnitudes race far outside float range; the log walk
        # must not overflow or underflow on the way to the witness, and
        # the magnitude saturates to inf with the log kept in details
        tiny = GeometricRule(Fraction(1), Fraction(1, 10 ** 250))
        cert = shift_eigen_exclude(basic_shift(tiny), 1e-3, bound=1e12)
        assert cert.witness_index <= 3
        assert cert.attained_magnitude > 1e12
        assert cert.detail("log_magnitude") > math.log(1e12)

    @given(st.floats(min_value=-3, max_value=1).map(lambda e: 10.0 ** e),
           st.integers(min_value=0, max_value=7))
    @settings(max_examples=60, deadline=None)
    def test_replay_invariant(self, modulus, phase_idx):
        lam = modulus * complex(math.cos(2 * math.pi * phase_idx / 8),
                                math.sin(2 * math.pi * phase_idx / 8))
        cert = shift_eigen_exclude(basic_shift(), lam)
        replayed = replay_shift_certificate(basic_shift(), cert)
        assert abs(replayed - cert.attained_magnitude) <= 1e-12 * cert.attained_magnitude
        assert cert.attained_magnitude > cert.bound


class TestKernelTrivial:
    def test_cibws_weights_nonzero(self):
        verdict = kernel_trivial(cibws())
        assert verdict.injective and verdict.dense_range and verdict.certified

    def test_forward_shift_dense_range_flag(self):
        verdict = kernel_trivial(forward_unilateral_shift())
        assert verdict.injective
        assert verdict.dense_range is False
        assert verdict.offending_index == 1  # row 1 unreachable

    def test_backward_shift_kernel(self):
        verdict = kernel_trivial(
            Spread(SpreadSpec(ArithmeticSequence(2, 1), naturals()))
        )
        assert not verdict.injective
        assert verdict.offending_index == 1

    def test_zero_weight_reported(self):
        rule = ExplicitThenRule((Fraction(1), 0, Fraction(1, 3)), RECIP)
        verdict = kernel_trivial(ShiftForm(sigma_bilateral(), rule))
        assert not verdict.injective
        assert verdict.offending_index == 2


class TestAdjointExclusion:
    def test_basic_lemma_adjoint_witness(self):
        cert = adjoint_exclusion(basic_shift(), 1.0, bound=1e6)
        assert cert.side == "adjoint"
        assert cert.attained_magnitude > 1e6
        replayed = replay_shift_certificate(basic_shift(), cert)
        assert abs(replayed - cert.attained_magnitude) <= 1e-12 * cert.attained_magnitude

    def test_self_adjoint_diagonal_coincides(self):
        # identity permutation, real weights: the adjoint shift is the
        # operator itself, so both exclusions see the same recurrence
        diag_as_shift = ShiftForm(identity_permutation(), RECIP)
        direct = shift_eigen_exclude(diag_as_shift, 2.0,
                                     require_single_orbit=False)
        adj = adjoint_exclusion(diag_as_shift, 2.0, require_single_orbit=False)
        assert direct.witness_index == adj.witness_index
        assert direct.attained_magnitude == adj.attained_magnitude

    def test_grid_of_moduli_and_phases(self):
        for e in (-3, -2, -1, 0, 1):
            for q in range(8):
                lam = (10.0 ** e) * complex(math.cos(math.pi * q / 4),
                                            math.sin(math.pi * q / 4))
                cert = adjoint_exclusion(basic_shift(), lam)
                assert cert.attained_magnitude > cert.bound


class TestInfiniteProduct:
    def test_geometric_convergent_matches_partial_products(self):
        est = infinite_product(GEO_HALF, 1, tol=1e-10)
        assert est.convergent is True
        # independent oracle: direct partial products far past the cutoff
        oracle = 1.0
        for j in range(1, 200):
            oracle *= 1.0 - 0.5 ** j
        assert math.isclose(est.limit_estimate, oracle, rel_tol=1e-9)
        assert est.tail_bound <= 1e-10

    def test_zero_sequence_gives_one(self):
        est = infinite_product(ConstantRule(0), 1, tol=1e-12)
        assert est.convergent is True
        assert est.limit_estimate == 1.0

    def test_harmonic_divergent(self):
        est = infinite_product(RECIP, 1, tol=1e-10)
        assert est.convergent is False
        assert est.limit_estimate < 1e-6  # partial products collapse to 0

    def test_unknown_tail_numeric_only(self):
        rule = CallableRule(lambda n: 2.0 ** -n, "opaque half powers")
        est = infinite_product(rule, 1, tol=1e-10)
        assert est.convergent is None

    def test_later_partials_within_certified_tail(self):
        est = infinite_product(GEO_HALF, 1, tol=1e-6)
        budget = est.tail_bound * est.limit_estimate * math.exp(est.tail_bound)
        partial = est.limit_estimate
        for j in range(est.terms_used + 1, est.terms_used + 200):
            partial *= 1.0 - 0.5 ** j
            assert abs(partial - est.limit_estimate) <= budget + 1e-18


def subset_product_range(factors, max_size):
    """Exact (min, max) of products over all subsets of size <= max_size.

    All factors are positive, so the size-k minimum is the product of
    the k smallest factors and the maximum the product of the k largest;
    this covers every subset without enumerating them.
    """
    inc = sorted(factors)
    lo, hi = 1.0, 1.0
    best_lo, best_hi = 1.0, 1.0
    for k in range(1, max_size + 1):
        lo *= inc[k - 1]
        hi *= inc[-k]
        best_lo = min(best_lo, lo)
        best_hi = max(best_hi, hi)
    return best_lo, best_hi


class TestClaim1:
    def test_geometric_alpha_cutoff(self):
        N = claim1_find_N(ALPHA_TO_ONE, 1, 0.01)
        factors = [1.0 - 2.0 ** -n for n in range(N, N + 31)]
        lo, hi = subset_product_range(factors, 10)
        assert 0.99 <= lo <= hi <= 1.01

    def test_extremes_oracle_agrees_with_enumeration(self):
        # validate the sorted-extremes reduction by brute force on a
        # small window: every subset of size <= 4 enumerated directly
        factors = [1.0 - 2.0 ** -n for n in range(3, 12)]
        lo, hi = subset_product_range(factors, 4)
        brute = [1.0]
        for k in range(1, 5):
            for combo in combinations(factors, k):
                p = 1.0
                for f in combo:
                    p *= f
                brute.append(p)
        assert math.isclose(lo, min(brute), rel_tol=1e-12)
        assert math.isclose(hi, max(brute), rel_tol=1e-12)

    def test_minimality_within_slack(self):
        # one step earlier must break the guarantee (allowing the rule's
        # tail slack of one index)
        N = claim1_find_N(ALPHA_TO_ONE, 1, 0.01)
        assert N >= 2
        bad = [1.0 - 2.0 ** -n for n in range(N - 1, N + 30)]
        lo, _ = subset_product_range(bad, 10)
        assert lo < 0.99

    def test_constant_alpha(self):
        assert claim1_find_N(ConstantRule(Fraction(3, 2)), Fraction(3, 2), 0.01) == 1

    def test_harmonic_not_summable(self):
        with pytest.raises(NotSummableError):
            claim1_find_N(AffineRule(1, PowerLawRule(-1, 1)), 1, 0.01)

    def test_bad_epsilon(self):
        with pytest.raises(PreconditionViolatedError):
            claim1_find_N(ALPHA_TO_ONE, 1, 1.5)


class TestShieldsSimilar:
    def test_equal_rules_certified_unit(self):
        v = shields_similar(RECIP, RECIP, 100)
        assert isinstance(v, BoundedCertified)
        assert v.c == 1.0 and v.C == 1.0

    def test_geometric_perturbation_bounded(self):
        w = AffineRule(1, GeometricRule(-1, Fraction(1, 2)))  # 1 - 2^-j
        v = shields_similar(w, ConstantRule(1), 10_000)
        assert isinstance(v, BoundedCertified)
        assert 0 < v.c <= v.C < math.inf
        # oracle: the full product prod (1 - 2^-j) is the worst window
        oracle = 1.0
        for j in range(1, 200):
            oracle *= 1.0 - 0.5 ** j
        assert v.c <= oracle * (1 + 1e-9)
        assert oracle <= v.C * (1 + 1e-9)

    def test_harmonic_perturbation_unbounded(self):
        w = AffineRule(1, PowerLawRule(-1, 1))  # 1 - 1/j, zero at j = 1
        v = shields_similar(w, ConstantRule(1), 10_000)
        assert isinstance(v, UnboundedWitness)
        assert v.value < 1e-6

    def test_harmonic_without_zero_stays_numeric(self):
        # dropping the zero weight: windowed products (k-1)/(k+l) stay
        # above 1e-4 on this horizon, so no witness yet, and the tail
        # is not certifiable
        w = OffsetRule(AffineRule(1, PowerLawRule(-1, 1)), 1)
        v = shields_similar(w, ConstantRule(1), 10_000)
        assert isinstance(v, BoundedNumerically)

    def test_monotone_consistency(self):
        w = AffineRule(1, PowerLawRule(-1, 1))
        small = shields_similar(w, ConstantRule(1), 100)
        large = shields_similar(w, ConstantRule(1), 5_000)
        assert isinstance(small, UnboundedWitness)
        assert isinstance(large, UnboundedWitness)
        assert large.value <= small.value


class TestSimilarityDiagonal:
    def test_equal_weights_identity(self):
        X = similarity_diagonal(RECIP, RECIP)
        assert [X.weights.value(n) for n in range(1, 9)] == [1] * 8

    def test_conjugation_equality_on_window(self):
        w = AffineRule(1, GeometricRule(-1, Fraction(1, 2)))
        v = ConstantRule(1)
        X = similarity_diagonal(w, v)
        x = X.weights

        def forward_shift(rule):
            return Product(Spread(SpreadSpec(naturals(), ArithmeticSequence(2, 1))),
                           Diagonal(rule))

        W = forward_shift(w)
        V = forward_shift(v)
        # X W X^{-1} = V entrywise: exact on rationals
        x_inv = Diagonal(CallableRule(lambda n: 1 / x.value(n), "1/x"))
        conj = Product(X, Product(W, x_inv))
        left = truncate(conj, 64)
        right = truncate(V, 64)
        for i in range(64):
            for j in range(64):
                assert abs(complex(left[i][j]) - complex(right[i][j])) <= 1e-12

    def test_unbounded_pair_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            similarity_diagonal(AffineRule(1, PowerLawRule(-1, 1)), ConstantRule(1))


class TestBlockNormBlowup:
    def test_forward_regime(self):
        cert = block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, 0.5, bound=1e12)
        assert cert.regime == "forward"
        assert cert.attained_magnitude > 1e12
        # oracle: direct iteration of m lambda^-n prod alpha_{2k-1}
        total = 0.1 / 0.5
        n = 1
        while total <= 1e12:
            n += 1
            total *= (1.0 - 2.0 ** -(2 * (n - 1) - 1)) / 0.5
        assert cert.witness_index == n
        assert math.isclose(cert.attained_magnitude, total, rel_tol=1e-9)

    def test_backward_regime(self):
        cert = block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, 2.0, bound=1e12)
        assert cert.regime == "backward"
        total = 1.0
        k = 0
        while total <= 1e12:
            k += 1
            total *= 2.0 / (1.0 + 2.0 ** -k)
        assert cert.witness_index == k
        assert math.isclose(cert.attained_magnitude, total, rel_tol=1e-9)

    def test_constancy_regime_on_the_circle(self):
        cert = block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, 1.0)
        assert cert.regime == "constant-floor"
        assert cert.bound == 0.0
        assert cert.attained_magnitude > 0
        assert cert.witness_index == claim1_find_N(ALPHA_TO_ONE, 1, 0.01)

    def test_replay(self):
        for lam in (0.5, 2.0, 1.0, 1j):
            cert = block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, lam)
            replayed = replay_block_certificate(ALPHA_TO_ONE, cert)
            assert abs(replayed - cert.attained_magnitude) <= \
                1e-12 * cert.attained_magnitude

    def test_harmonic_gaps_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            block_norm_blowup(AffineRule(1, PowerLawRule(-1, 1)), 0.1, 2.0, 0.5)

    def test_zero_lambda_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, 0)


class TestDenseEigs:
    def test_diagonal_matrix(self):
        vals = dense_eigs(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(vals, [1, 2, 3])

    def test_nilpotent(self):
        vals = dense_eigs([[0, 1], [0, 0]])
        assert vals == [0j, 0j]

    def test_random_hermitian_residuals_and_trace(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            A = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
            H = (A + A.conj().T) / 2
            vals = dense_eigs(H)
            assert max(abs(v.imag) for v in vals) <= 1e-8
            assert abs(sum(vals) - np.trace(H)) <= 1e-8 * max(
                1.0, np.linalg.norm(H, 2))

    def test_dimension_cap(self):
        with pytest.raises(PreconditionViolatedError):
            dense_eigs(np.eye(513))
