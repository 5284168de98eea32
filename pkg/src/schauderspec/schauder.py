"""Schauder predicates, spectra, classification, and deflation.

An operator is Schauder exactly when it is injective with dense range;
``lambda`` sits in the Schauder spectrum when ``lambda I - T`` fails
that test.  For the structured classes handled here the test is exact
and structural: diagonals fail precisely at their diagonal values,
permutation-weighted operators fail nowhere once their weights are
nonzero and their eigenvalues are excluded by certificates.

Deflation is the constructive half: given a vanishing positive weight
sequence, multiplying by the two-spread unitary turns the diagonal into
a weighted bilateral shift whose eigenvector recurrences blow up, so
the product has empty point spectrum on both sides.  The variants below
follow the case split of the underlying constructions: simple vanishing
spectrum, multiplicities (finite ones expanded, infinite ones split
into scaled unitary blocks), purely finite spectrum (handled through
shift similarity), and interval-block models for continuous spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from .errors import (
    NotCompactError,
    PreconditionViolatedError,
    UnsupportedClassError,
)
from .index_maps import (
    MultiplicityList,
    Permutation,
    decompose_into_spreads,
    deinterleave,
    expand_multiplicities,
    interleave_z,
    sigma_bilateral,
)
from .op_algebra import (
    Adjoint,
    BlockDirectSum,
    Diagonal,
    OperatorExpr,
    PermutationUnitary,
    Product,
    Scale,
    ShiftForm,
    recognize_shift_form,
    truncate,
)
from .sequences import (
    ArithmeticSequence,
    ConstantRule,
    ExplicitPrefixSequence,
    ExplicitThenRule,
    MergedAbsDecreasingRule,
    Scalar,
    ScalarRule,
    _abs_exact,
)
from .spectral import (
    CertificateGridConfig,
    EigenExclusionCertificate,
    KernelRangeVerdict,
    adjoint_exclusion,
    check_single_orbit,
    dense_eigs,
    kernel_trivial,
    lambda_grid,
    shift_eigen_exclude,
    shields_similar,
    is_bounded_verdict,
    sup_abs_weight,
)

SELF_ADJOINT_NOTE = (
    "self-adjoint input: membership is decided by the injectivity/"
    "dense-range criterion (equivalently, by the point spectrum); the "
    "resolvent-complement shortcut for self-adjoint operators disagrees "
    "with the diagonal examples and is not used"
)

NOT_INJECTIVE = "not-injective"
RANGE_NOT_DENSE = "range-not-dense"


# ---------------------------------------------------------------------------
# Reports and verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmptySetMembers:
    kind: str = "empty"


@dataclass(frozen=True)
class FiniteSetMembers:
    values: Tuple[Scalar, ...]
    kind: str = "finite"


@dataclass(frozen=True)
class VanishingSequenceMembers:
    """Members form a sequence of nonzero values accumulating only at 0."""

    rule: ScalarRule
    includes_zero: bool
    kind: str = "sequence-to-zero"


Members = Union[EmptySetMembers, FiniteSetMembers, VanishingSequenceMembers]


@dataclass(frozen=True)
class SchauderSpectrumReport:
    members: Members
    per_member_reason: Tuple[Tuple[object, str], ...] = ()
    classification_case: Optional[int] = None
    covered_region: Optional[str] = None
    notes: Tuple[str, ...] = ()
    certificates: Tuple[EigenExclusionCertificate, ...] = ()

    def reasons(self) -> dict:
        return dict(self.per_member_reason)


@dataclass(frozen=True)
class SchauderVerdict:
    is_schauder: bool
    reason: Optional[str] = None  # NOT_INJECTIVE | RANGE_NOT_DENSE
    witness_index: Optional[int] = None
    detail: str = ""

    def __bool__(self):
        return self.is_schauder


@dataclass(frozen=True)
class DeflationResult:
    """A constructed unitary, the deflated product, and its evidence."""

    unitary: OperatorExpr
    deflated: OperatorExpr
    operator: OperatorExpr
    shift_form: Optional[ShiftForm]
    certificates: Tuple[EigenExclusionCertificate, ...]
    zero_check: KernelRangeVerdict
    lemma_path: str
    spreads: tuple
    covered_region: str
    notes: Tuple[str, ...] = ()


@dataclass(frozen=True)
class SelfAdjointIntervalModel:
    """Declared spectral data of a self-adjoint operator.

    The spectrum is the interval [lower, upper]; ``point_spectrum``
    lists the eigenvalues.  This is the declarative form in which
    operators with continuous spectrum enter the spectrum computation.
    """

    lower: float
    upper: float
    point_spectrum: Tuple[Scalar, ...] = ()

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("need lower <= upper")


# ---------------------------------------------------------------------------
# Schauder predicates
# ---------------------------------------------------------------------------


def _diagonal_zero_scan(rule: ScalarRule, probe_window: int):
    """(attains_zero, witness index, certified) for a diagonal rule."""
    ln = rule.length()
    cap = probe_window if ln is None else min(ln, probe_window)
    az = rule.attains_zero()
    if az is False:
        return False, None, True
    for n in range(1, cap + 1):
        if rule.value(n) == 0:
            return True, n, True
    if ln is not None and ln <= cap:
        return False, None, True
    if az is True:
        return True, None, True
    return False, None, False


def is_schauder(T, probe_window: int = 512) -> SchauderVerdict:
    """Exact structural verdict: injective with dense range, or why not."""
    if isinstance(T, SelfAdjointIntervalModel):
        if 0 in T.point_spectrum:
            return SchauderVerdict(False, NOT_INJECTIVE, None,
                                   "0 is a declared eigenvalue")
        return SchauderVerdict(True, detail="0 is not a declared eigenvalue; "
                               "a self-adjoint operator with trivial kernel has dense range")
    if isinstance(T, Diagonal):
        hit, idx, certified = _diagonal_zero_scan(T.weights, probe_window)
        if hit:
            return SchauderVerdict(False, NOT_INJECTIVE, idx,
                                   "zero diagonal entry")
        detail = "diagonal entries nonzero"
        if not certified:
            detail += f" on the probe window [1..{probe_window}] (tail uncertified)"
        return SchauderVerdict(True, detail=detail)
    if isinstance(T, BlockDirectSum):
        for b, block in enumerate(T.blocks):
            sub = is_schauder(block, probe_window)
            if not sub:
                return SchauderVerdict(False, sub.reason, sub.witness_index,
                                       f"block {b}: {sub.detail}")
        return SchauderVerdict(True, detail="every block injective with dense range")
    if isinstance(T, ShiftForm):
        verdict = kernel_trivial(T, probe_window)
        if not verdict.injective:
            return SchauderVerdict(False, NOT_INJECTIVE, verdict.offending_index,
                                   verdict.detail)
        if verdict.dense_range is False:
            return SchauderVerdict(False, RANGE_NOT_DENSE, verdict.offending_index,
                                   verdict.detail)
        return SchauderVerdict(True, detail=verdict.detail)
    if isinstance(T, PermutationUnitary):
        return SchauderVerdict(True, detail="permutation unitary")
    if isinstance(T, OperatorExpr):
        rec = recognize_shift_form(T, window=min(probe_window, 64))
        if rec is not None:
            return is_schauder(rec.shift, probe_window)
        verdict = kernel_trivial(T, probe_window)
        if not verdict.certified and verdict.injective:
            raise UnsupportedClassError(
                "operator is not diagonal, shift-form or block-structured; "
                + verdict.detail
            )
        if not verdict.injective:
            return SchauderVerdict(False, NOT_INJECTIVE, verdict.offending_index,
                                   verdict.detail)
        if verdict.dense_range is False:
            return SchauderVerdict(False, RANGE_NOT_DENSE, verdict.offending_index,
                                   verdict.detail)
        return SchauderVerdict(True, detail=verdict.detail)
    raise UnsupportedClassError(f"unsupported input {type(T).__name__}")


# ---------------------------------------------------------------------------
# Schauder spectrum
# ---------------------------------------------------------------------------


def _finite_value_set(rule: ScalarRule) -> Optional[tuple]:
    """Distinct values of rules that take only finitely many values."""
    from .sequences import OffsetRule, RepeatedRule

    if isinstance(rule, ConstantRule):
        return (rule.c,)
    if isinstance(rule, ExplicitThenRule):
        if rule.tail is None:
            return tuple(dict.fromkeys(rule.prefix))
        tail = _finite_value_set(rule.tail)
        if tail is None:
            return None
        return tuple(dict.fromkeys(tuple(rule.prefix) + tail))
    if isinstance(rule, (OffsetRule, RepeatedRule)):
        return _finite_value_set(rule.inner)
    return None


def _sorted_values(values) -> tuple:
    return tuple(sorted(dict.fromkeys(values), key=lambda v: (-_abs_exact(v), repr(v))))


def _is_real_valued(rule: ScalarRule, probe: int = 16) -> bool:
    ln = rule.length()
    cap = probe if ln is None else min(ln, probe)
    return all(not isinstance(rule.value(n), complex) for n in range(1, cap + 1))


def _diagonal_report(rule: ScalarRule, probe_window: int) -> SchauderSpectrumReport:
    notes = []
    if _is_real_valued(rule):
        notes.append(SELF_ADJOINT_NOTE)
    hit, idx, certified = _diagonal_zero_scan(rule, probe_window)
    if not certified:
        notes.append(
            f"zero-freeness probed on [1..{probe_window}] only; tail uncertified"
        )
    finite_values = _finite_value_set(rule)
    if finite_values is not None and rule.length() is not None:
        members: Members = FiniteSetMembers(_sorted_values(finite_values))
        reasons = tuple((v, NOT_INJECTIVE) for v in members.values)
        return SchauderSpectrumReport(members, reasons, None, None, tuple(notes))
    if finite_values is not None:
        members = FiniteSetMembers(_sorted_values(finite_values))
        reasons = tuple((v, NOT_INJECTIVE) for v in members.values)
        case = None
        if rule.limit() == 0:
            case = classify_compact(
                SchauderSpectrumReport(members, reasons), True
            )
        return SchauderSpectrumReport(members, reasons, case, None, tuple(notes))
    if rule.limit() == 0:
        members = VanishingSequenceMembers(rule, includes_zero=hit)
        reasons = (("*", NOT_INJECTIVE),)
        report = SchauderSpectrumReport(members, reasons, None, None, tuple(notes))
        case = classify_compact(report, True)
        return SchauderSpectrumReport(members, reasons, case, None, tuple(notes))
    raise UnsupportedClassError(
        "diagonal values neither finite in variety nor vanishing; the "
        "spectrum shape is outside the report vocabulary"
    )


def _shift_certificate_report(shift: ShiftForm, cfg: CertificateGridConfig,
                              probe_window: int) -> SchauderSpectrumReport:
    if not check_single_orbit(shift.perm):
        raise UnsupportedClassError(
            "certificate path requires a single-orbit shift permutation"
        )
    lim = shift.weights.limit()
    if lim != 0:
        raise UnsupportedClassError(
            "certificate path requires weights certified to vanish"
        )
    zero = kernel_trivial(shift, probe_window)
    certs = []
    grid = lambda_grid(cfg, sup_abs_weight(shift.weights))
    for lam in grid:
        certs.append(shift_eigen_exclude(shift, lam, cfg.bound, cfg.step_cap))
        certs.append(adjoint_exclusion(shift, lam, cfg.bound, cfg.step_cap))
    region = (
        f"grid of {len(grid)} points: {cfg.moduli} moduli in "
        f"[{cfg.min_modulus!r}, {max(abs(l) for l in grid)!r}] x {cfg.phases} "
        "phases; each certificate covers its whole modulus circle; "
        "lambda = 0 decided structurally"
    )
    if zero.injective and zero.dense_range:
        members: Members = EmptySetMembers()
        reasons: tuple = ()
    else:
        members = FiniteSetMembers((0,))
        reasons = ((0, NOT_INJECTIVE if not zero.injective else RANGE_NOT_DENSE),)
    report = SchauderSpectrumReport(members, reasons, None, region, (),
                                    tuple(certs))
    case = classify_compact(report, True)
    return SchauderSpectrumReport(members, reasons, case, region, (),
                                  tuple(certs))


def _combine_block_reports(parts: Sequence[SchauderSpectrumReport],
                           zero_failure: Optional[str]) -> SchauderSpectrumReport:
    finite_values: list = []
    reasons: list = []
    rules: list = []
    includes_zero = zero_failure is not None
    notes: list = []
    certs: list = []
    regions: list = []
    for rep in parts:
        notes.extend(rep.notes)
        certs.extend(rep.certificates)
        if rep.covered_region:
            regions.append(rep.covered_region)
        if isinstance(rep.members, FiniteSetMembers):
            finite_values.extend(v for v in rep.members.values if v != 0)
        elif isinstance(rep.members, VanishingSequenceMembers):
            rules.append(rep.members.rule)
        reasons.extend(kv for kv in rep.per_member_reason if kv[0] != 0)
    if includes_zero:
        reasons.append((0, zero_failure))
    region = "; ".join(dict.fromkeys(regions)) or None
    notes = tuple(dict.fromkeys(notes))
    if rules:
        merged = MergedAbsDecreasingRule(
            finite_parts=[tuple(finite_values)] if finite_values else [],
            rule_parts=tuple(rules),
        )
        members: Members = VanishingSequenceMembers(merged, includes_zero)
        return SchauderSpectrumReport(members, tuple(reasons), None, region,
                                      notes, tuple(certs))
    values = _sorted_values(finite_values)
    if includes_zero:
        values = values + (0,)
    members = FiniteSetMembers(values) if values else EmptySetMembers()
    return SchauderSpectrumReport(members, tuple(reasons), None, region,
                                  notes, tuple(certs))


def is_compact_structural(T) -> Optional[bool]:
    """Structural compactness: vanishing weights, or finite blocks thereof."""
    if isinstance(T, Diagonal):
        if T.weights.length() is not None:
            return True
        lim = T.weights.limit()
        if lim is None:
            return None
        return lim == 0
    if isinstance(T, ShiftForm):
        return is_compact_structural(Diagonal(T.weights))
    if isinstance(T, BlockDirectSum):
        verdicts = [is_compact_structural(b) for b in T.blocks]
        if all(v is True for v in verdicts):
            return True
        if any(v is False for v in verdicts):
            return False
        return None
    if isinstance(T, OperatorExpr):
        rec = recognize_shift_form(T, window=32)
        if rec is not None:
            return is_compact_structural(rec.shift)
    return None


def schauder_spectrum(T, cfg: Optional[CertificateGridConfig] = None,
                      probe_window: int = 4096) -> SchauderSpectrumReport:
    """Compute the Schauder spectrum of a supported structured operator.

    Diagonals report their exact value set; certified vanishing shifts
    report emptiness over the covered grid region (0 excluded through
    the diagonal factor of the polar split); block direct sums combine
    their parts.  Self-adjoint interval models report their declared
    point spectrum.
    """
    cfg = cfg or CertificateGridConfig()
    if isinstance(T, SelfAdjointIntervalModel):
        values = _sorted_values(v for v in T.point_spectrum)
        members: Members = FiniteSetMembers(values) if values else EmptySetMembers()
        reasons = tuple((v, NOT_INJECTIVE) for v in values)
        return SchauderSpectrumReport(
            members, reasons, None, f"interval [{T.lower}, {T.upper}] by "
            "declared spectral data", (SELF_ADJOINT_NOTE,))
    if isinstance(T, Diagonal):
        return _diagonal_report(T.weights, probe_window)
    if isinstance(T, BlockDirectSum):
        parts = []
        zero_failure = None
        for b, block in enumerate(T.blocks):
            sub = is_schauder(block, probe_window)
            if not sub and zero_failure is None:
                zero_failure = sub.reason
            parts.append(schauder_spectrum(block, cfg, probe_window))
        return _combine_block_reports(parts, zero_failure)
    if isinstance(T, ShiftForm):
        shift = T
    elif isinstance(T, OperatorExpr):
        rec = recognize_shift_form(T, window=64)
        if rec is None:
            raise UnsupportedClassError(
                "operator is not diagonal, block, or shift-form recognizable"
            )
        shift = rec.shift
    else:
        raise UnsupportedClassError(f"unsupported input {type(T).__name__}")
    if shift.perm.tag == ("identity",):
        return _diagonal_report(shift.weights, probe_window)
    return _shift_certificate_report(shift, cfg, probe_window)


def classify_compact(report: SchauderSpectrumReport, compact: bool) -> int:
    """The six-way classification of compact-operator Schauder spectra.

    1 empty; 2 exactly {0}; 3 finite without 0; 4 finite with 0;
    5 a sequence of nonzero values accumulating only at 0; 6 the same
    together with 0.  Total and single-valued over report shapes.
    """
    if not compact:
        raise NotCompactError("classification applies to compact operators only")
    m = report.members
    if isinstance(m, EmptySetMembers):
        return 1
    if isinstance(m, FiniteSetMembers):
        if not m.values:
            return 1
        if all(v == 0 for v in m.values):
            return 2
        if any(v == 0 for v in m.values):
            return 4
        return 3
    if isinstance(m, VanishingSequenceMembers):
        return 6 if m.includes_zero else 5
    raise UnsupportedClassError(f"unknown members shape {type(m).__name__}")


# ---------------------------------------------------------------------------
# Deflation constructions
# ---------------------------------------------------------------------------


def _region_string(cfg: CertificateGridConfig, max_weight: float) -> str:
    top = cfg.max_modulus if cfg.max_modulus is not None else 10.0 * max_weight
    return (
        f"grid of {cfg.moduli} moduli in [{cfg.min_modulus!r}, {top!r}] x "
        f"{cfg.phases} phases (each certificate covers its modulus circle); "
        "lambda = 0 via structural kernel/range checks"
    )


def _probe_positive_monotone(rule: ScalarRule, strict: bool, probe: int = 64) -> None:
    vals = rule.values(probe)
    for n, v in enumerate(vals, 1):
        if isinstance(v, complex) or v <= 0:
            raise PreconditionViolatedError(
                f"weight at index {n} is {v!r}; positive reals required"
            )
    for n, (a, b) in enumerate(zip(vals, vals[1:]), 1):
        if strict and not a > b:
            raise PreconditionViolatedError(
                f"weights not strictly decreasing at index {n}: {a!r} !> {b!r}"
            )
        if not strict and a < b:
            raise PreconditionViolatedError(
                f"weights increase at index {n}: {a!r} < {b!r}"
            )
    lim = rule.limit()
    if lim is None:
        raise PreconditionViolatedError(
            "cannot certify that the weights vanish (unknown-tail rule)"
        )
    if lim != 0:
        raise PreconditionViolatedError(
            f"weights do not vanish: certified limit {lim!r}"
        )


def _sigma_deflation(rule: ScalarRule, strict: bool, lemma_path: str,
                     cfg: CertificateGridConfig) -> DeflationResult:
    _probe_positive_monotone(rule, strict)
    sigma = sigma_bilateral()
    unitary = PermutationUnitary(sigma)
    shift = ShiftForm(sigma, rule, source_kind="unilateral")
    grid = lambda_grid(cfg, sup_abs_weight(rule))
    certs: list = []
    for lam in grid:
        certs.append(shift_eigen_exclude(shift, lam, cfg.bound, cfg.step_cap))
        certs.append(adjoint_exclusion(shift, lam, cfg.bound, cfg.step_cap))
    zero = kernel_trivial(shift)
    return DeflationResult(
        unitary=unitary,
        deflated=shift.to_expr(),
        operator=Diagonal(rule),
        shift_form=shift,
        certificates=tuple(certs),
        zero_check=zero,
        lemma_path=lemma_path,
        spreads=tuple(decompose_into_spreads(sigma, 64)),
        covered_region=_region_string(cfg, sup_abs_weight(rule)),
        notes=("range of the product equals the range of the diagonal "
               "factor, which is dense when all weights are nonzero",),
    )


def deflate_basic(t: ScalarRule,
                  cfg: Optional[CertificateGridConfig] = None) -> DeflationResult:
    """Deflate a simple vanishing positive spectrum ``t_1 > t_2 > ... -> 0``.

    The unitary is the two-spread bilateral permutation; the product is
    the weighted bilateral shift acting as ``t_2 e_1`` on ``e_2``,
    ``t_{2k} e_{2k-2}`` on ``e_{2k}``, ``t_{2k-1} e_{2k+1}`` on
    ``e_{2k-1}``.  Direct and adjoint divergence certificates cover the
    grid; ``lambda = 0`` is settled by the kernel/range structure of the
    diagonal factor.
    """
    return _sigma_deflation(t, strict=True, lemma_path="basic",
                            cfg=cfg or CertificateGridConfig())


def _scaled_unitary_certificates(value, grid, cfg: CertificateGridConfig,
                                 block: int) -> list:
    """Certificates for ``value * (sigma unitary)`` on one block.

    Off the circle ``|lambda| = |value|`` the orbit recurrence diverges;
    on it the coefficients have constant modulus 1 along an infinite
    orbit, which no square-summable vector supports.
    """
    sigma = sigma_bilateral()
    shift = ShiftForm(sigma, ConstantRule(value))
    out = []
    v = float(_abs_exact(value))
    for lam in grid:
        r = abs(lam)
        if abs(r - v) <= 1e-12 * max(v, 1.0):
            for side in ("direct", "adjoint"):
                out.append(EigenExclusionCertificate(
                    lam=complex(lam), witness_index=1, attained_magnitude=1.0,
                    recurrence_kind="scalar-shift", bound=0.0,
                    regime="constant-floor", side=side,
                    covered_region=f"circle |lambda| = {v!r}",
                    details=(("block", block), ("scaled_unitary", v)),
                ))
            continue
        direct = shift_eigen_exclude(shift, lam, cfg.bound, cfg.step_cap,
                                     check_weights=False)
        adj = adjoint_exclusion(shift, lam, cfg.bound, cfg.step_cap)
        out.append(EigenExclusionCertificate(
            lam=direct.lam, witness_index=direct.witness_index,
            attained_magnitude=direct.attained_magnitude,
            recurrence_kind=direct.recurrence_kind, bound=direct.bound,
            regime=direct.regime, side="direct",
            covered_region=direct.covered_region,
            details=direct.details + (("block", block),),
        ))
        out.append(EigenExclusionCertificate(
            lam=adj.lam, witness_index=adj.witness_index,
            attained_magnitude=adj.attained_magnitude,
            recurrence_kind=adj.recurrence_kind, bound=adj.bound,
            regime=adj.regime, side="adjoint",
            covered_region=adj.covered_region,
            details=adj.details + (("block", block),),
        ))
    return out


def _tag_block(certs, block: int) -> list:
    return [
        EigenExclusionCertificate(
            lam=c.lam, witness_index=c.witness_index,
            attained_magnitude=c.attained_magnitude,
            recurrence_kind=c.recurrence_kind, bound=c.bound, regime=c.regime,
            start_index=c.start_index, side=c.side,
            covered_region=c.covered_region,
            details=c.details + (("block", block),),
        )
        for c in certs
    ]


def deflate_discrete(m: MultiplicityList,
                     cfg: Optional[CertificateGridConfig] = None) -> DeflationResult:
    """Deflate a discrete spectrum accumulating only at 0, multiplicities allowed.

    Finite multiplicities are expanded into repeated weights and merged
    decreasingly with the simple tail.  Each infinite-multiplicity value
    keeps its own block, where the scaled sigma unitary already has
    empty point spectrum on both sides; one unit vector per infinite
    block is borrowed into the expanded list, which keeps the block-0
    construction uniform whether or not the finite part alone is finite.
    """
    cfg = cfg or CertificateGridConfig()
    for v, _ in m.entries:
        if v == 0:
            raise PreconditionViolatedError("zero eigenvalue kills dense range")
    if m.tail is None:
        raise PreconditionViolatedError(
            "spectrum does not accumulate at 0 (no tail rule); "
            "use deflate_finite_spectrum for finitely many values"
        )
    if m.tail.attains_zero() is True:
        raise PreconditionViolatedError("zero eigenvalue in the tail")
    expanded = expand_multiplicities(m)
    if not m.entries:
        return deflate_basic(m.tail, cfg)

    sigma = sigma_bilateral()
    borrowed = tuple(expanded.infinite_values)
    block0_rule: ScalarRule = MergedAbsDecreasingRule(
        finite_parts=[expanded.finite_prefix + borrowed],
        rule_parts=[expanded.finite_tail] if expanded.finite_tail else [],
    )
    _probe_positive_monotone(block0_rule, strict=False)
    infinite_values = expanded.infinite_values
    shift0 = ShiftForm(sigma, block0_rule, source_kind="unilateral")

    if not infinite_values:
        base = _sigma_deflation(block0_rule, strict=False,
                                lemma_path="discrete", cfg=cfg)
        return base

    count = 1 + len(infinite_values)
    partition = tuple(ArithmeticSequence(b + 1, count) for b in range(count))
    unitary = BlockDirectSum(tuple(PermutationUnitary(sigma) for _ in range(count)),
                             partition)
    operator = BlockDirectSum(
        (Diagonal(block0_rule),)
        + tuple(Diagonal(ConstantRule(v)) for v in infinite_values),
        partition,
    )
    deflated = BlockDirectSum(
        (shift0.to_expr(),)
        + tuple(Scale(v, PermutationUnitary(sigma)) for v in infinite_values),
        partition,
    )
    max_w = max([sup_abs_weight(block0_rule)]
                + [float(_abs_exact(v)) for v in infinite_values])
    grid = lambda_grid(cfg, max_w)
    certs: list = []
    for lam in grid:
        certs.extend(_tag_block(
            [shift_eigen_exclude(shift0, lam, cfg.bound, cfg.step_cap),
             adjoint_exclusion(shift0, lam, cfg.bound, cfg.step_cap)], 0))
    for b, v in enumerate(infinite_values, 1):
        certs.extend(_scaled_unitary_certificates(v, grid, cfg, b))
    zero = kernel_trivial(shift0)
    return DeflationResult(
        unitary=unitary,
        deflated=deflated,
        operator=operator,
        shift_form=None,
        certificates=tuple(certs),
        zero_check=zero,
        lemma_path="discrete",
        spreads=tuple(decompose_into_spreads(sigma, 64)),
        covered_region=_region_string(cfg, max_w),
        notes=(
            "one unit vector borrowed from each infinite-multiplicity "
            "eigenspace into the expanded block",
        ),
    )


def deflate_finite_spectrum(values: MultiplicityList,
                            cfg: Optional[CertificateGridConfig] = None,
                            horizon: int = 10_000) -> DeflationResult:
    """Deflate a finite point spectrum with an infinite-multiplicity anchor.

    The finite-dimensional eigenvectors are merged into the designated
    infinite eigenspace; on that block the weighted shift differs from
    the constant-weight shift in finitely many weights, so their window
    ratio products are bounded above and away from zero and the two
    shifts are similar.  Emptiness of the point spectrum then transfers
    from the scaled unitary, whose certificates are attached.
    """
    cfg = cfg or CertificateGridConfig()
    if values.tail is not None:
        raise PreconditionViolatedError("finite spectrum must not carry a tail")
    for v, _ in values.entries:
        if v == 0:
            raise PreconditionViolatedError("zero eigenvalue kills dense range")
    expanded = expand_multiplicities(values)
    if not expanded.infinite_values:
        raise PreconditionViolatedError(
            "no INFINITE-multiplicity value: the space would be finite-dimensional"
        )
    infinite_sorted = tuple(sorted(expanded.infinite_values,
                                   key=_abs_exact, reverse=True))
    designated = infinite_sorted[0]
    others = infinite_sorted[1:]

    sigma = sigma_bilateral()
    block0_rule = ExplicitThenRule(expanded.finite_prefix,
                                   ConstantRule(designated))
    shift0 = ShiftForm(sigma, block0_rule, source_kind="unilateral")
    verdict = shields_similar(block0_rule, ConstantRule(designated), horizon)
    if not is_bounded_verdict(verdict):
        raise PreconditionViolatedError(
            f"window ratio products unbounded: {verdict}"
        )

    count = 1 + len(others)
    partition = tuple(ArithmeticSequence(b + 1, count) for b in range(count))
    if count == 1:
        unitary: OperatorExpr = PermutationUnitary(sigma)
        operator: OperatorExpr = Diagonal(block0_rule)
        deflated: OperatorExpr = shift0.to_expr()
    else:
        unitary = BlockDirectSum(
            tuple(PermutationUnitary(sigma) for _ in range(count)), partition)
        operator = BlockDirectSum(
            (Diagonal(block0_rule),)
            + tuple(Diagonal(ConstantRule(v)) for v in others), partition)
        deflated = BlockDirectSum(
            (shift0.to_expr(),)
            + tuple(Scale(v, PermutationUnitary(sigma)) for v in others),
            partition)

    max_w = max([sup_abs_weight(block0_rule)]
                + [float(_abs_exact(v)) for v in others])
    grid = lambda_grid(cfg, max_w)
    certs: list = []
    shields_details = (
        ("via", "shields-similarity"),
        ("shields_c", float(verdict.c)),
        ("shields_C", float(verdict.C)),
    )
    block0 = _scaled_unitary_certificates(designated, grid, cfg, 0)
    certs.extend(
        EigenExclusionCertificate(
            lam=c.lam, witness_index=c.witness_index,
            attained_magnitude=c.attained_magnitude,
            recurrence_kind=c.recurrence_kind, bound=c.bound, regime=c.regime,
            side=c.side, covered_region=c.covered_region,
            details=c.details + shields_details,
        ) for c in block0
    )
    for b, v in enumerate(others, 1):
        certs.extend(_scaled_unitary_certificates(v, grid, cfg, b))
    zero = kernel_trivial(shift0)
    return DeflationResult(
        unitary=unitary,
        deflated=deflated,
        operator=operator,
        shift_form=shift0 if count == 1 else None,
        certificates=tuple(certs),
        zero_check=zero,
        lemma_path="finite-spectrum",
        spreads=tuple(decompose_into_spreads(sigma, 64)),
        covered_region=_region_string(cfg, max_w),
        notes=(
            "block 0 weights differ from the constant weight in finitely "
            f"many places; window ratio products in [{verdict.c!r}, "
            f"{verdict.C!r}] certify similarity to the scaled unitary, "
            "whose point spectrum and adjoint point spectrum are empty",
        ),
    )


def _block_z_shift(dim: int) -> Permutation:
    """Cell-to-next-cell permutation for contiguous cells in interleaved order."""

    def forward(g: int) -> int:
        c, k = divmod(g - 1, dim)
        n = deinterleave(c + 1)
        return (interleave_z(n + 1) - 1) * dim + k + 1

    def inverse(g: int) -> int:
        c, k = divmod(g - 1, dim)
        n = deinterleave(c + 1)
        return (interleave_z(n - 1) - 1) * dim + k + 1

    return Permutation(forward, inverse, f"block-z-shift({dim})",
                       tag=("block-z-shift", dim))


def deflate_block_continuous(blocks: Sequence[Tuple[Tuple[float, float], int]],
                             alpha_seq: ScalarRule, m: float, M: float,
                             cfg: Optional[CertificateGridConfig] = None
                             ) -> DeflationResult:
    """Deflate an interval-block model of continuous spectrum.

    ``blocks`` lists ``((lo, hi), dim)`` norm intervals and model
    dimensions for the cells in interleaved order (cell 0 first); all
    models must share one dimension so the cell-to-cell shift is
    unitary.  Certificates come from the three-regime norm blowup; the
    assembled finite model is additionally audited by the dense
    eigensolver on a truncation of the product.
    """
    from .spectral import block_norm_blowup, _gap_tail_sum

    cfg = cfg or CertificateGridConfig()
    if not blocks:
        raise PreconditionViolatedError("need at least one block")
    dims = {dim for _, dim in blocks}
    if len(dims) != 1:
        raise PreconditionViolatedError(
            "all block models must share one dimension"
        )
    dim = dims.pop()
    if dim < 1:
        raise PreconditionViolatedError("block dimension must be >= 1")
    if not (0 < m <= M):
        raise PreconditionViolatedError("need 0 < m <= M")
    for (lo, hi), _ in blocks:
        if not (m <= lo <= hi <= M):
            raise PreconditionViolatedError(
                f"norm interval [{lo}, {hi}] escapes the global bounds [{m}, {M}]"
            )
    alpha = alpha_seq.limit()
    if alpha is None or float(alpha) <= 0:
        raise PreconditionViolatedError("alpha sequence needs a positive limit")
    gaps = _gap_tail_sum(alpha_seq, alpha, 1)
    if gaps is None or math.isinf(gaps):
        raise PreconditionViolatedError("interval gaps are not certifiably summable")

    cells = tuple(
        ExplicitPrefixSequence(tuple(range(c * dim + 1, (c + 1) * dim + 1)))
        for c in range(len(blocks))
    )
    model_blocks = []
    for (lo, hi), _ in blocks:
        if dim == 1:
            vals = ((lo + hi) / 2 if lo != hi else lo,)
        else:
            vals = tuple(lo + (hi - lo) * k / (dim - 1) for k in range(dim))
        model_blocks.append(Diagonal(ExplicitThenRule(vals)))
    operator = BlockDirectSum(tuple(model_blocks), cells)
    perm = _block_z_shift(dim)
    unitary = PermutationUnitary(perm)
    deflated = Product(unitary, operator)

    grid = lambda_grid(cfg, M)
    certs: list = []
    for lam in grid:
        base = block_norm_blowup(alpha_seq, m, M, lam, cfg.bound, cfg.step_cap,
                                 cfg.epsilon)
        certs.append(base)
        certs.append(EigenExclusionCertificate(
            lam=base.lam, witness_index=base.witness_index,
            attained_magnitude=base.attained_magnitude,
            recurrence_kind=base.recurrence_kind, bound=base.bound,
            regime=base.regime, side="adjoint",
            covered_region=base.covered_region, details=base.details,
        ))

    audit_n = min(dim * len(blocks), 64)
    eigs = dense_eigs([[complex(v) for v in row]
                       for row in truncate(deflated, audit_n)])
    max_eig = max((abs(e) for e in eigs), default=0.0)
    min_lo = min(lo for (lo, _hi), _ in blocks)
    zero = KernelRangeVerdict(
        True, True, None, True,
        f"block norms bounded below by {min_lo}; the model is invertible"
    )
    return DeflationResult(
        unitary=unitary,
        deflated=deflated,
        operator=operator,
        shift_form=None,
        certificates=tuple(certs),
        zero_check=zero,
        lemma_path="block-continuous",
        spreads=tuple(decompose_into_spreads(perm, 4 * dim)),
        covered_region=_region_string(cfg, M),
        notes=(
            f"truncation audit: {audit_n}x{audit_n} corner of the product "
            f"has all eigenvalues of magnitude <= {max_eig!r}",
        ),
    )


def deflate(T, cfg: Optional[CertificateGridConfig] = None) -> DeflationResult:
    """Full pipeline: recognize, polar-split, dispatch, certify.

    Splits a recognized operator into unitary times nonnegative diagonal
    (exact polar decomposition for this class), deflates the diagonal
    data, and composes the constructed unitary with the recognition
    unitary, so the returned ``unitary @ T`` equals the deflated shift
    entrywise.  Constant or non-vanishing weight rules are rejected: the
    automatic dispatch covers vanishing spectra only, the multiplicity
    and block entry points cover the rest explicitly.
    """
    cfg = cfg or CertificateGridConfig()
    verdict = is_schauder(T)
    if not verdict:
        raise PreconditionViolatedError(
            f"not a Schauder operator: {verdict.reason} "
            f"(witness index {verdict.witness_index}); {verdict.detail}"
        )
    operator: OperatorExpr = T.to_expr() if isinstance(T, ShiftForm) else T
    rec = recognize_shift_form(T, window=64)
    if rec is None:
        raise UnsupportedClassError(
            "operator is not recognizable as a permutation-weighted form"
        )
    rule = rec.diagonal.weights
    rec_unitary = None if (
        isinstance(rec.unitary, PermutationUnitary)
        and rec.unitary.perm.tag == ("identity",)
    ) else rec.unitary
    lim = rule.limit()
    if lim is None:
        raise UnsupportedClassError(
            "cannot certify a vanishing spectrum rule for this operator"
        )
    if lim != 0:
        extra = ""
        if isinstance(rule, ConstantRule):
            extra = (
                f" (constant diagonal factor: point spectrum {{{rule.c!r}}})"
            )
        raise UnsupportedClassError(
            f"no vanishing spectrum rule (weights tend to {lim!r}){extra}; "
            "use deflate_finite_spectrum or deflate_block_continuous "
            "with explicit spectral data"
        )
    probe = rule.values(64)
    strict = all(a > b for a, b in zip(probe, probe[1:]))
    base = _sigma_deflation(rule, strict=strict,
                            lemma_path="basic" if strict else "discrete",
                            cfg=cfg)
    if rec_unitary is None:
        unitary = base.unitary
    else:
        unitary = Product(base.unitary, Adjoint(rec_unitary))
    return DeflationResult(
        unitary=unitary,
        deflated=base.deflated,
        operator=operator,
        shift_form=base.shift_form,
        certificates=base.certificates,
        zero_check=base.zero_check,
        lemma_path="recognize+" + base.lemma_path,
        spreads=base.spreads,
        covered_region=base.covered_region,
        notes=base.notes,
    )


def audit_deflation(result: DeflationResult, n: int = 64) -> Tuple[bool, float]:
    """Entrywise audit ``truncate(unitary @ operator, n) == truncate(deflated, n)``.

    Returns exact equality plus the maximal absolute entry difference.
    """
    left = truncate(Product(result.unitary, result.operator), n)
    right = truncate(result.deflated, n)
    exact = left == right
    worst = 0.0
    for i in range(n):
        for j in range(n):
            d = abs(complex(left[i][j]) - complex(right[i][j]))
            if d > worst:
                worst = d
    return exact, worst
