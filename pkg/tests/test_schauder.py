import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schauderspec import (
    INFINITE,
    AffineRule,
    ArithmeticSequence,
    BlockDirectSum,
    CertificateGridConfig,
    ConstantRule,
    Diagonal,
    EmptySetMembers,
    ExplicitPrefixSequence,
    ExplicitThenRule,
    FiniteSetMembers,
    GeometricRule,
    MultiplicityList,
    NotCompactError,
    OffsetRule,
    PermutationUnitary,
    PowerLawRule,
    PreconditionViolatedError,
    SchauderSpectrumReport,
    SelfAdjointIntervalModel,
    UnsupportedClassError,
    VanishingSequenceMembers,
    audit_deflation,
    backward_unilateral_shift,
    cibws,
    classify_compact,
    deflate,
    deflate_basic,
    deflate_block_continuous,
    deflate_discrete,
    deflate_finite_spectrum,
    entry,
    forward_unilateral_shift,
    identity_permutation,
    is_compact_structural,
    is_schauder,
    schauder_spectrum,
)
from schauderspec.schauder import NOT_INJECTIVE, RANGE_NOT_DENSE, SELF_ADJOINT_NOTE

RECIP = PowerLawRule(Fraction(1), 1)
ALPHA_TO_ONE = AffineRule(1, GeometricRule(-1, Fraction(1, 2)))
SMALL = CertificateGridConfig(moduli=4, phases=4)


class TestIsSchauder:
    def test_cibws_yes(self):
        assert is_schauder(cibws())

    def test_backward_shift_not_injective(self):
        v = is_schauder(backward_unilateral_shift())
        assert not v
        assert v.reason == NOT_INJECTIVE
        assert v.witness_index == 1

    def test_forward_shift_range_not_dense(self):
        v = is_schauder(forward_unilateral_shift())
        assert not v
        assert v.reason == RANGE_NOT_DENSE

    def test_diagonal_with_zero(self):
        rule = ExplicitThenRule((1, 0, Fraction(1, 3)), OffsetRule(RECIP, 3))
        v = is_schauder(Diagonal(rule))
        assert not v
        assert v.reason == NOT_INJECTIVE
        assert v.witness_index == 2

    def test_identity_is_schauder(self):
        assert is_schauder(PermutationUnitary(identity_permutation()))

    def test_interval_model(self):
        assert is_schauder(SelfAdjointIntervalModel(0.0, 1.0, ()))
        assert not is_schauder(SelfAdjointIntervalModel(-1.0, 1.0, (0,)))

    def test_block_sum_reports_failing_block(self):
        part = (ArithmeticSequence(1, 2), ArithmeticSequence(2, 2))
        B = BlockDirectSum((Diagonal(ConstantRule(1)),
                            Diagonal(ConstantRule(0))), part)
        v = is_schauder(B)
        assert not v
        assert v.reason == NOT_INJECTIVE


class TestSchauderSpectrum:
    def test_reciprocal_diagonal(self):
        rep = schauder_spectrum(Diagonal(RECIP))
        assert isinstance(rep.members, VanishingSequenceMembers)
        assert rep.members.includes_zero is False
        assert rep.members.rule.values(3) == [1, Fraction(1, 2), Fraction(1, 3)]
        assert rep.classification_case == 5
        assert SELF_ADJOINT_NOTE in rep.notes
        assert rep.reasons()["*"] == NOT_INJECTIVE

    def test_interval_model_without_eigenvalues_is_empty(self):
        rep = schauder_spectrum(SelfAdjointIntervalModel(0.25, 1.0, ()))
        assert isinstance(rep.members, EmptySetMembers)
        assert SELF_ADJOINT_NOTE in rep.notes

    def test_cibws_empty(self):
        rep = schauder_spectrum(cibws(), SMALL)
        assert isinstance(rep.members, EmptySetMembers)
        assert rep.classification_case == 1
        assert rep.covered_region is not None
        # every grid lambda has a direct and an adjoint certificate
        sides = {}
        for c in rep.certificates:
            sides.setdefault((c.lam.real, c.lam.imag), set()).add(c.side)
        assert len(sides) == SMALL.moduli * SMALL.phases
        assert all(v == {"direct", "adjoint"} for v in sides.values())

    def test_identity_unitary_spectrum(self):
        rep = schauder_spectrum(PermutationUnitary(identity_permutation()))
        assert isinstance(rep.members, FiniteSetMembers)
        assert rep.members.values == (1,)

    def test_constant_diagonal(self):
        rep = schauder_spectrum(Diagonal(ConstantRule(Fraction(3, 2))))
        assert rep.members == FiniteSetMembers((Fraction(3, 2),))
        assert rep.classification_case is None  # not compact

    def test_diagonal_brute_force_membership_oracle(self):
        # lambda belongs to the computed members iff some truncated
        # diagonal entry equals it exactly
        rule = RECIP
        rep = schauder_spectrum(Diagonal(rule))
        n = 64
        diag = [rule.value(k) for k in range(1, n + 1)]
        for lam in [Fraction(1, 3), Fraction(2, 3), Fraction(1, 64), 0]:
            in_members = any(lam == rep.members.rule.value(k)
                             for k in range(1, n + 1))
            if lam == 0:
                in_members = in_members or rep.members.includes_zero
            assert in_members == (min(abs(lam - d) for d in diag) == 0)

    def test_self_adjoint_sigma_s_equals_point_spectrum(self):
        # for a real diagonal the members are exactly the eigenvalues
        rule = ExplicitThenRule((Fraction(3), Fraction(2)), OffsetRule(RECIP, 1))
        rep = schauder_spectrum(Diagonal(rule))
        eigenvalues = [rule.value(k) for k in range(1, 20)]
        members = [rep.members.rule.value(k) for k in range(1, 20)]
        assert sorted(eigenvalues) == sorted(members)

    def test_unsupported_shape(self):
        with pytest.raises(UnsupportedClassError):
            schauder_spectrum(Diagonal(AffineRule(1, RECIP)))  # values -> 1


class TestClassifyCompact:
    def test_cibws_case_1(self):
        rep = schauder_spectrum(cibws(), SMALL)
        assert classify_compact(rep, True) == 1

    def test_reciprocal_case_5(self):
        rep = schauder_spectrum(Diagonal(RECIP))
        assert classify_compact(rep, True) == 5

    def test_block_one_plus_cibws_case_3(self):
        part = (ExplicitPrefixSequence((1,)), ArithmeticSequence(2, 1))
        block = BlockDirectSum(
            (Diagonal(ExplicitThenRule((1,))), cibws().to_expr()), part)
        # oracle: both blocks are injective with dense range, so 0 stays out
        assert is_schauder(block)
        rep = schauder_spectrum(block, SMALL)
        assert rep.members == FiniteSetMembers((1,))
        assert is_compact_structural(block) is True
        assert classify_compact(rep, True) == 3

    def test_not_compact_rejected(self):
        rep = schauder_spectrum(Diagonal(RECIP))
        with pytest.raises(NotCompactError):
            classify_compact(rep, False)

    @given(st.sampled_from(["empty", "zero", "finite", "finite0", "seq", "seq0"]))
    @settings(max_examples=30)
    def test_totality_over_report_shapes(self, shape):
        members = {
            "empty": EmptySetMembers(),
            "zero": FiniteSetMembers((0,)),
            "finite": FiniteSetMembers((2, 1)),
            "finite0": FiniteSetMembers((2, 1, 0)),
            "seq": VanishingSequenceMembers(RECIP, False),
            "seq0": VanishingSequenceMembers(RECIP, True),
        }[shape]
        expected = {"empty": 1, "zero": 2, "finite": 3, "finite0": 4,
                    "seq": 5, "seq0": 6}[shape]
        case = classify_compact(SchauderSpectrumReport(members), True)
        assert case == expected

    def test_cases_exclusive_and_exhaustive(self):
        shapes = [
            EmptySetMembers(),
            FiniteSetMembers((0,)),
            FiniteSetMembers((1,)),
            FiniteSetMembers((1, 0)),
            VanishingSequenceMembers(RECIP, False),
            VanishingSequenceMembers(RECIP, True),
        ]
        cases = [classify_compact(SchauderSpectrumReport(m), True)
                 for m in shapes]
        assert sorted(cases) == [1, 2, 3, 4, 5, 6]


class TestDeflateBasic:
    def test_action_table_entries(self):
        res = deflate_basic(RECIP, SMALL)
        # t2 e1 on e2; t_{2k} e_{2k-2} on e_{2k}; t_{2k-1} e_{2k+1}
        assert entry(res.deflated, 1, 2) == Fraction(1, 2)
        assert entry(res.deflated, 2, 4) == Fraction(1, 4)
        assert entry(res.deflated, 5, 3) == Fraction(1, 3)
        assert res.lemma_path == "basic"
        exact, worst = audit_deflation(res, 64)
        assert exact and worst == 0.0

    def test_geometric_weights_full_default_grid(self):
        res = deflate_basic(GeometricRule(Fraction(1), Fraction(1, 2)))
        grid_points = {(c.lam.real, c.lam.imag) for c in res.certificates}
        assert len(grid_points) == 16 * 8
        for c in res.certificates:
            assert c.attained_magnitude > c.bound

    def test_constant_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_basic(ConstantRule(1), SMALL)

    def test_nonmonotone_rejected(self):
        rule = ExplicitThenRule((Fraction(1, 2), Fraction(1)), OffsetRule(RECIP, 2))
        with pytest.raises(PreconditionViolatedError):
            deflate_basic(rule, SMALL)

    def test_zero_check_certified(self):
        res = deflate_basic(RECIP, SMALL)
        assert res.zero_check.injective and res.zero_check.dense_range

    def test_spread_decomposition_attached(self):
        res = deflate_basic(RECIP, SMALL)
        assert len(res.spreads) == 2


class TestDeflateDiscrete:
    def test_tail_only_reduces_to_basic(self):
        m = MultiplicityList((), RECIP)
        res = deflate_discrete(m, SMALL)
        assert res.lemma_path == "basic"
        assert audit_deflation(res, 48) == (True, 0.0)

    def test_expanded_ordering_and_audit(self):
        entries = tuple((Fraction(1, k), 2) for k in range(1, 6))
        m = MultiplicityList(entries, OffsetRule(RECIP, 5))
        res = deflate_discrete(m, SMALL)
        assert res.lemma_path == "discrete"
        w = res.shift_form.weights
        vals = w.values(16)
        assert all(a >= b for a, b in zip(vals, vals[1:]))  # sort oracle
        assert vals[:4] == [1, 1, Fraction(1, 2), Fraction(1, 2)]
        assert audit_deflation(res, 48) == (True, 0.0)

    def test_infinite_block_with_borrowed_vector(self):
        m = MultiplicityList(((Fraction(1, 2), INFINITE), (Fraction(1, 3), 1)),
                             OffsetRule(RECIP, 3))
        res = deflate_discrete(m, SMALL)
        assert isinstance(res.deflated, BlockDirectSum)
        assert any("borrowed" in n for n in res.notes)
        # the borrowed copy of 1/2 leads the expanded block-0 weights
        first = [entry(res.operator, 2 * k - 1, 2 * k - 1) for k in range(1, 4)]
        assert first[0] == Fraction(1, 2)
        assert audit_deflation(res, 48) == (True, 0.0)
        blocks = {c.detail("block") for c in res.certificates}
        assert blocks == {0, 1}

    def test_zero_value_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_discrete(MultiplicityList(((0, 2),), RECIP), SMALL)

    def test_no_tail_delegates_to_finite_machinery(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_discrete(MultiplicityList(((1, 2), (2, INFINITE)),), SMALL)


class TestDeflateFiniteSpectrum:
    def test_single_infinite_value(self):
        res = deflate_finite_spectrum(MultiplicityList(((1, INFINITE),)), SMALL)
        c = res.certificates[0]
        assert c.detail("shields_c") == 1.0
        assert c.detail("shields_C") == 1.0
        assert audit_deflation(res, 48) == (True, 0.0)

    def test_finite_part_merged_with_explicit_bounds(self):
        res = deflate_finite_spectrum(
            MultiplicityList(((1, INFINITE), (2, 3))), SMALL, horizon=10_000)
        c = res.certificates[0]
        assert c.detail("via") == "shields-similarity"
        assert 0 < c.detail("shields_c") <= c.detail("shields_C") < math.inf
        assert c.detail("shields_C") == pytest.approx(8.0)  # windowed oracle: 2*2*2
        assert res.shift_form.weights.values(5) == [2, 2, 2, 1, 1]
        assert audit_deflation(res, 48) == (True, 0.0)

    def test_zero_value_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_finite_spectrum(
                MultiplicityList(((1, INFINITE), (0, 1))), SMALL)

    def test_no_infinite_block_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_finite_spectrum(MultiplicityList(((1, 2), (2, 3))), SMALL)

    def test_two_infinite_values_block_structure(self):
        res = deflate_finite_spectrum(
            MultiplicityList(((1, INFINITE), (Fraction(1, 2), INFINITE))), SMALL)
        assert isinstance(res.deflated, BlockDirectSum)
        assert audit_deflation(res, 48) == (True, 0.0)


class TestDeflateBlockContinuous:
    def test_three_regimes_over_custom_grid(self):
        blocks = [((0.4, 0.6), 3), ((0.5, 1.5), 3), ((0.5, 1.5), 3)]
        res = deflate_block_continuous(blocks, ALPHA_TO_ONE, 0.1, 2.0, SMALL)
        regimes = {c.regime for c in res.certificates}
        assert "forward" in regimes and "backward" in regimes
        assert audit_deflation(res, 9) == (True, 0.0)
        assert any("eigenvalues of magnitude" in n for n in res.notes)

    def test_single_block_far_lambda(self):
        from schauderspec import block_norm_blowup
        cert = block_norm_blowup(ALPHA_TO_ONE, 0.1, 2.0, 100.0)
        assert cert.regime == "backward"
        assert cert.witness_index <= 8  # norm bound forces a fast witness

    def test_harmonic_gaps_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_block_continuous([((0.5, 1.5), 2)],
                                     AffineRule(1, PowerLawRule(-1, 1)),
                                     0.1, 2.0, SMALL)

    def test_mismatched_dimensions_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate_block_continuous([((0.5, 1.5), 2), ((0.5, 1.5), 3)],
                                     ALPHA_TO_ONE, 0.1, 2.0, SMALL)


class TestDeflatePipeline:
    def test_reciprocal_diagonal_goes_basic(self):
        res = deflate(Diagonal(RECIP), SMALL)
        assert res.lemma_path == "recognize+basic"
        assert audit_deflation(res, 64) == (True, 0.0)
        rep = schauder_spectrum(res.deflated, SMALL)
        assert isinstance(rep.members, EmptySetMembers)

    def test_cibws_pipeline(self):
        res = deflate(cibws().to_expr(), SMALL)
        assert res.lemma_path == "recognize+discrete"
        assert audit_deflation(res, 64) == (True, 0.0)
        sides = {}
        for c in res.certificates:
            sides.setdefault((c.lam.real, c.lam.imag), set()).add(c.side)
        assert all(v == {"direct", "adjoint"} for v in sides.values())

    def test_backward_shift_rejected(self):
        with pytest.raises(PreconditionViolatedError):
            deflate(backward_unilateral_shift(), SMALL)

    def test_identity_rejected_as_unsupported(self):
        with pytest.raises(UnsupportedClassError) as err:
            deflate(PermutationUnitary(identity_permutation()), SMALL)
        assert "point spectrum {1}" in str(err.value)

    def test_negative_diagonal_folds_phase(self):
        # the polar split routes the signs into the unitary, so the
        # deflated shift carries the absolute values
        from schauderspec import ScaledRule

        res = deflate(Diagonal(ScaledRule(-1, RECIP)), SMALL)
        assert res.shift_form.weights.value(2) == Fraction(1, 2)
        assert audit_deflation(res, 48) == (True, 0.0)

    def test_scale_zero_is_degenerate_but_legal(self):
        from schauderspec import Scale, entry as entry_of

        Z = Scale(0, cibws().to_expr())
        assert all(entry_of(Z, i, j) == 0 for i in range(1, 6) for j in range(1, 6))
        v = is_schauder(Z)
        assert not v and v.reason == NOT_INJECTIVE

    def test_certificates_cover_grid_loudly(self):
        res = deflate(Diagonal(RECIP), SMALL)
        per_lam = {}
        for c in res.certificates:
            per_lam.setdefault((c.lam.real, c.lam.imag), set()).add(c.side)
        assert len(per_lam) == SMALL.moduli * SMALL.phases
        assert all(v == {"direct", "adjoint"} for v in per_lam.values())


class TestCompactnessFlag:
    def test_structural_verdicts(self):
        assert is_compact_structural(Diagonal(RECIP)) is True
        assert is_compact_structural(Diagonal(ConstantRule(1))) is False
        assert is_compact_structural(cibws()) is True
