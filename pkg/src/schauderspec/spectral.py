"""Eigenvalue-exclusion certificates and supporting numerics.

The deflation constructions elsewhere in the package rest on a single
mechanism: for a permutation-weighted operator ``T e_j = w_j e_{perm(j)}``
an eigenvector equation ``T x = lambda x`` propagates coordinates along
the permutation orbit,

    x_{perm(j)} = (w_j / lambda) x_j,

so the coordinate at the k-th backward orbit step carries the factor
``lambda^k / (w_1' ... w_k')`` relative to the anchor coordinate.  When
that factor provably blows past a threshold ``B``, the anchor must be 0
and the whole orbit vanishes.  A certificate freezes the witness step,
the attained magnitude, and the replay parameters, turning the "tends
to infinity" argument into a finite checkable object.

Everything here works in log space; no product is ever formed whose
magnitude could overflow before its logarithm is examined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (
    ConvergenceFailureError,
    NotSummableError,
    PreconditionViolatedError,
    StepCapExceededError,
)
from .op_algebra import (
    Diagonal,
    OperatorExpr,
    ShiftForm,
    adjoint_shift_form,
    _column_scan,
    _row_scan,
)
from .sequences import (
    AffineRule,
    CallableRule,
    ConstantRule,
    ExplicitThenRule,
    Scalar,
    ScalarRule,
    log_abs,
)

DEFAULT_BOUND = 1e12
DEFAULT_STEP_CAP = 100_000
DEFAULT_EPSILON = 0.01


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenExclusionCertificate:
    """A divergence witness excluding eigenvalues on a lambda region.

    Replaying the recorded recurrence from a unit anchor up to
    ``witness_index`` must reproduce ``attained_magnitude`` to relative
    1e-12; ``attained_magnitude > bound`` always holds (for constancy
    certificates the bound is 0 and the magnitude is the positive floor
    that contradicts square-summability).
    """

    lam: complex
    witness_index: int
    attained_magnitude: float
    recurrence_kind: str  # "scalar-shift" | "block-norm"
    bound: float
    regime: str  # "backward-orbit" | "forward-orbit" | "forward" | "backward" | "constant-floor"
    start_index: int = 1
    side: str = "direct"  # "direct" | "adjoint"
    covered_region: str = ""
    details: Tuple[Tuple[str, object], ...] = ()

    def detail(self, key: str, default=None):
        for k, v in self.details:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class ProductEstimate:
    """Partial-product estimate with a certified tail when available.

    When ``convergent`` is True every later partial product differs from
    ``limit_estimate`` by at most ``tail_bound * limit_estimate *
    e^{tail_bound}``.  ``convergent=None`` marks a numeric-only estimate
    for rules whose tail the implementation cannot classify.
    """

    convergent: Optional[bool]
    limit_estimate: float
    tail_bound: Optional[float]
    terms_used: int


@dataclass(frozen=True)
class KernelRangeVerdict:
    """Structural injectivity/dense-range verdict for shift-like operators."""

    injective: bool
    dense_range: Optional[bool]
    offending_index: Optional[int]
    certified: bool
    detail: str

    def __bool__(self):
        return self.injective


def _safe_exp(x: float) -> float:
    """exp that saturates to inf instead of overflowing."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# Orbit-walk exclusions for weighted shifts
# ---------------------------------------------------------------------------


def _walk_logs(s: ShiftForm, lam: Scalar, direction: str, steps: int,
               start: int) -> float:
    """Log-magnitude of the orbit coefficient after ``steps`` steps."""
    la = log_abs(lam)
    total = 0.0
    if direction == "backward-orbit":
        idx = start
        for _ in range(steps):
            idx = s.perm.inverse(idx)
            w = s.weights.value(idx)
            if w == 0:
                raise PreconditionViolatedError(f"zero weight at index {idx}")
            total += la - log_abs(w)
    elif direction == "forward-orbit":
        idx = start
        for _ in range(steps):
            w = s.weights.value(idx)
            if w == 0:
                raise PreconditionViolatedError(f"zero weight at index {idx}")
            total += log_abs(w) - la
            idx = s.perm.forward(idx)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return total


def _orbit_divergence(s: ShiftForm, lam: Scalar, bound: float, step_cap: int,
                      start: int) -> Tuple[str, int, float]:
    la = log_abs(lam)
    log_bound = math.log(bound)
    fwd_idx, fwd_log = start, 0.0
    bwd_idx, bwd_log = start, 0.0
    for k in range(1, step_cap + 1):
        bwd_idx = s.perm.inverse(bwd_idx)
        w = s.weights.value(bwd_idx)
        if w == 0:
            raise PreconditionViolatedError(
                f"zero weight at index {bwd_idx}; run kernel_trivial instead"
            )
        bwd_log += la - log_abs(w)
        if bwd_log > log_bound:
            return "backward-orbit", k, bwd_log
        w = s.weights.value(fwd_idx)
        if w == 0:
            raise PreconditionViolatedError(
                f"zero weight at index {fwd_idx}; run kernel_trivial instead"
            )
        fwd_log += log_abs(w) - la
        fwd_idx = s.perm.forward(fwd_idx)
        if fwd_log > log_bound:
            return "forward-orbit", k, fwd_log
    raise StepCapExceededError(
        f"no divergence witness within {step_cap} steps for lambda={lam}; "
        "the bound/cap is too aggressive for these weights"
    )


def check_single_orbit(perm, window: int = 16, steps: int = 96) -> bool:
    """Whether the orbit of 1 visits all of [1..window] within ``steps``.

    The exclusion recurrence kills coordinates on one orbit; the full
    no-eigenvector claim needs the permutation to act with a single
    orbit, which the sigma-type constructions do.
    """
    visited = {1}
    f = b = 1
    for _ in range(steps):
        f = perm.forward(f)
        b = perm.inverse(b)
        visited.add(f)
        visited.add(b)
    return all(k in visited for k in range(1, window + 1))


def shift_eigen_exclude(s: ShiftForm, lam: Scalar, bound: float = DEFAULT_BOUND,
                        step_cap: int = DEFAULT_STEP_CAP, start: int = 1,
                        check_weights: bool = True,
                        require_single_orbit: bool = True
                        ) -> EigenExclusionCertificate:
    """Certify that ``lam != 0`` is not an eigenvalue of the shift ``s``.

    Walks the orbit of ``start`` in both directions and returns the
    first step at which the coefficient forced on an l2 eigenvector
    exceeds ``bound``; since all orbit coordinates are multiples of the
    anchor coordinate, the witness forces the anchor (and the orbit) to
    vanish.  The witness depends on ``|lam|`` only, so one certificate
    covers the whole circle of that modulus.

    With ``require_single_orbit=False`` the certificate's claim is
    scoped to the orbit of ``start`` (recorded in the details); the
    default insists the permutation act with a single orbit so the
    exclusion covers the whole space.
    """
    if lam == 0:
        raise PreconditionViolatedError(
            "lambda = 0 is handled structurally; use kernel_trivial"
        )
    if require_single_orbit and not check_single_orbit(s.perm):
        raise PreconditionViolatedError(
            "permutation is not single-orbit on the probe window; the "
            "orbit-local claim requires require_single_orbit=False"
        )
    if check_weights:
        lim = s.weights.limit()
        if lim is not None and lim != 0:
            raise PreconditionViolatedError(
                f"weights do not vanish (limit {lim}); this exclusion "
                "requires weights decreasing to 0"
            )
        probe = [abs(s.weights.value(n)) for n in range(1, 33)]
        if any(a < b for a, b in zip(probe, probe[1:])):
            if s.weights.abs_nonincreasing() is not True:
                raise PreconditionViolatedError(
                    "weight magnitudes are not nonincreasing on the probe window"
                )
    direction, k, log_mag = _orbit_divergence(s, lam, bound, step_cap, start)
    details = (("log_magnitude", log_mag),)
    if not require_single_orbit:
        details += (("orbit_local", True),)
    return EigenExclusionCertificate(
        lam=complex(lam),
        witness_index=k,
        attained_magnitude=_safe_exp(log_mag),
        recurrence_kind="scalar-shift",
        bound=bound,
        regime=direction,
        start_index=start,
        side="direct",
        covered_region=f"circle |lambda| = {abs(complex(lam))!r}",
        details=details,
    )


def replay_shift_certificate(s: ShiftForm, cert: EigenExclusionCertificate) -> float:
    """Re-run a scalar-shift certificate's recurrence; returns the magnitude."""
    if cert.recurrence_kind != "scalar-shift":
        raise ValueError("not a scalar-shift certificate")
    shift = adjoint_shift_form(s) if cert.side == "adjoint" else s
    lam = cert.lam.conjugate() if cert.side == "adjoint" else cert.lam
    log_mag = _walk_logs(shift, lam, cert.regime, cert.witness_index,
                         cert.start_index)
    return _safe_exp(log_mag)


def kernel_trivial(s: Union[ShiftForm, OperatorExpr],
                   probe_window: int = 4096) -> KernelRangeVerdict:
    """Structural injectivity check, with a dense-range flag.

    For a total shift form, the kernel is trivial exactly when every
    weight is nonzero; the permutation being a bijection, the range then
    contains every basis vector, so the dense-range flag coincides.  For
    column-sparse expression trees, an empty column kills injectivity
    and an empty row kills dense range.
    """
    if isinstance(s, ShiftForm):
        az = s.weights.attains_zero()
        if az is False:
            return KernelRangeVerdict(True, True, None, True,
                                      "weights certified nonzero; permutation total")
        cap = probe_window
        for n in range(1, cap + 1):
            if s.weights.value(n) == 0:
                return KernelRangeVerdict(
                    False, False, n, True, f"weight at index {n} is zero"
                )
        if az is True:
            return KernelRangeVerdict(
                False, False, None, False,
                f"a zero weight exists beyond the probe window {cap}"
            )
        return KernelRangeVerdict(
            True, True, None, False,
            f"no zero weight on the probe window [1..{cap}]; tail uncertified"
        )
    # expression tree: structural column/row coverage on a window
    window = min(probe_window, 512)
    for j in range(1, window + 1):
        nz = _column_scan(s, j)
        if len(nz) == 0:
            return KernelRangeVerdict(
                False, None, j, True, f"column {j} is zero: e_{j} lies in the kernel"
            )
        if len(nz) > 1:
            return KernelRangeVerdict(
                True, None, j, False,
                f"column {j} has {len(nz)} entries; only shift-like trees are"
                " decided structurally"
            )
    for i in range(1, window + 1):
        if len(_row_scan(s, i)) == 0:
            return KernelRangeVerdict(
                True, False, i, True,
                f"row {i} is unreachable: the range misses e_{i}"
            )
    return KernelRangeVerdict(True, True, None, False,
                              f"columns and rows covered on [1..{window}]")


def adjoint_exclusion(s: ShiftForm, lam: Scalar, bound: float = DEFAULT_BOUND,
                      step_cap: int = DEFAULT_STEP_CAP, start: int = 1,
                      require_single_orbit: bool = True
                      ) -> EigenExclusionCertificate:
    """Exclusion on the adjoint shift, certifying dense range of ``lam I - s``.

    The closure of the range of ``lam I - T`` is the orthocomplement of
    ``ker(conj(lam) I - T*)``, so a divergence witness for the adjoint
    shift at ``conj(lam)`` certifies density.
    """
    adj = adjoint_shift_form(s)
    conj_lam = complex(lam).conjugate()
    base = shift_eigen_exclude(adj, conj_lam, bound, step_cap, start,
                               check_weights=False,
                               require_single_orbit=require_single_orbit)
    return EigenExclusionCertificate(
        lam=complex(lam),
        witness_index=base.witness_index,
        attained_magnitude=base.attained_magnitude,
        recurrence_kind="scalar-shift",
        bound=bound,
        regime=base.regime,
        start_index=start,
        side="adjoint",
        covered_region=base.covered_region,
        details=(("adjoint_lambda", conj_lam),) + base.details,
    )


# ---------------------------------------------------------------------------
# Infinite products and the window-product estimate
# ---------------------------------------------------------------------------

_PRODUCT_ITER_CAP = 500_000


def infinite_product(a: ScalarRule, t0: Scalar, tol: float) -> ProductEstimate:
    """Estimate ``prod_{j>=1} (t0 - a_j)/t0`` with a certified tail.

    Convergence is decided by tail analysis of the named rule families:
    the product converges absolutely iff ``sum |a_j|`` does.  Rules with
    no tail bound produce a numeric-only estimate (``convergent=None``).
    """
    if t0 == 0:
        raise PreconditionViolatedError("t0 must be nonzero")
    if tol <= 0:
        raise ValueError("tol must be positive")
    abs_t0 = abs(complex(t0)) if isinstance(t0, complex) else abs(float(t0))

    classification = a.tail_abs_sum(1)
    partial = 1.0
    n = 0
    if classification is not None and math.isfinite(classification):
        while n < _PRODUCT_ITER_CAP:
            tail = a.tail_abs_sum(n + 1)
            if tail is not None and tail / abs_t0 < 0.5:
                s = tail / abs_t0
                tail_bound = s / (1.0 - s)
                if tail_bound <= tol:
                    return ProductEstimate(True, partial, tail_bound, n)
            n += 1
            factor = 1.0 - complex(a.value(n)) / complex(t0)
            if factor.imag == 0:
                factor = factor.real
                if factor <= 0:
                    raise PreconditionViolatedError(
                        f"a_{n}/t0 >= 1: factor {factor} not positive"
                    )
            partial = partial * factor
        raise ConvergenceFailureError(
            f"tail tolerance {tol} not reached within {_PRODUCT_ITER_CAP} terms"
        )

    # divergent or unknown tail: numeric partial products only; factors
    # touching 0 just drive the product there, which is the conclusion
    cap = 100_000
    while n < cap:
        n += 1
        factor = 1.0 - complex(a.value(n)) / complex(t0)
        if factor.imag == 0:
            factor = factor.real
        partial = partial * factor
        if abs(partial) < 1e-30:
            break
    if classification is not None and math.isinf(classification):
        return ProductEstimate(False, abs(partial), math.inf, n)
    return ProductEstimate(None, abs(partial), None, n)


def _gap_tail_sum(alpha_seq: ScalarRule, alpha, start: int) -> Optional[float]:
    """Bound on ``sum_{n>=start} (1 - alpha_n/alpha)`` from the rule family."""
    if isinstance(alpha_seq, ConstantRule):
        return 0.0 if alpha_seq.c == alpha else None
    if isinstance(alpha_seq, AffineRule) and alpha_seq.base == alpha:
        inner_tail = alpha_seq.inner.tail_abs_sum(start)
        if inner_tail is None:
            return None
        return inner_tail / float(abs(alpha))
    if isinstance(alpha_seq, ExplicitThenRule) and alpha_seq.tail is not None:
        if start <= len(alpha_seq.prefix):
            head = sum(
                abs(1.0 - float(v) / float(alpha))
                for v in alpha_seq.prefix[start - 1:]
            )
            rest = _gap_tail_sum(alpha_seq.tail, alpha, 1)
        else:
            head = 0.0
            rest = _gap_tail_sum(alpha_seq.tail, alpha, start - len(alpha_seq.prefix))
        return None if rest is None else head + rest
    return None


def claim1_find_N(alpha_seq: ScalarRule, alpha, epsilon: float) -> int:
    """Smallest cutoff (within the rule's tail slack) for near-unit products.

    Returns ``N`` such that for every finite index set ``D`` contained in
    ``[N, inf)``, the product of ``alpha_n / alpha`` over ``D`` lies in
    ``[1 - epsilon, 1 + epsilon]``: it suffices that the remaining
    absolute log sum not exceed ``min(log(1+eps), -log(1-eps))``.
    """
    if not (0 < epsilon < 1):
        raise PreconditionViolatedError("epsilon must lie in (0, 1)")
    alpha_f = float(alpha)
    if alpha_f <= 0:
        raise PreconditionViolatedError("alpha must be positive")
    lim = alpha_seq.limit()
    if lim is not None and abs(float(lim) - alpha_f) > 1e-12 * alpha_f:
        raise PreconditionViolatedError(
            f"rule limit {lim} disagrees with alpha = {alpha}"
        )
    total_gap = _gap_tail_sum(alpha_seq, alpha, 1)
    if total_gap is None or math.isinf(total_gap):
        raise NotSummableError(
            "sum(1 - alpha_n/alpha) has no finite certified bound"
        )
    probe = alpha_seq.values(16)
    for v in probe:
        if isinstance(v, complex) or not (0 < float(v) <= alpha_f * (1 + 1e-12)):
            raise PreconditionViolatedError(
                "alpha_n must be positive and bounded by alpha"
            )

    eta = min(math.log1p(epsilon), -math.log1p(-epsilon))

    def log_tail(start: int) -> Optional[float]:
        g = _gap_tail_sum(alpha_seq, alpha, start)
        if g is None or math.isinf(g):
            return None
        if g >= 0.5:
            return math.inf
        return g / (1.0 - g)

    cutoff = 1
    while True:
        lt = log_tail(cutoff)
        if lt is not None and lt <= eta * 1e-3:
            break
        cutoff *= 2
        if cutoff > 1 << 40:
            raise NotSummableError(
                "gap tail does not become summably small; series diverges"
            )
    slack = log_tail(cutoff)
    # absolute log terms on [1, cutoff)
    terms = []
    for n in range(1, cutoff):
        v = float(alpha_seq.value(n))
        terms.append(abs(math.log(v / alpha_f)))
    suffix = slack
    best = cutoff
    for n in range(cutoff - 1, 0, -1):
        suffix += terms[n - 1]
        if suffix <= eta:
            best = n
        else:
            break
    return best


# ---------------------------------------------------------------------------
# Window products of weight ratios (similarity of weighted shifts)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundedCertified:
    c: float
    C: float
    horizon: int
    tail_log_bound: float


@dataclass(frozen=True)
class BoundedNumerically:
    c: float
    C: float
    horizon: int


@dataclass(frozen=True)
class UnboundedWitness:
    window: Tuple[int, int]
    value: float
    horizon: int


ShieldsVerdict = Union[BoundedCertified, BoundedNumerically, UnboundedWitness]


def is_bounded_verdict(v: ShieldsVerdict) -> bool:
    return isinstance(v, (BoundedCertified, BoundedNumerically))


def _ratio_deviation_tail(w: ScalarRule, v: ScalarRule, start: int) -> Optional[float]:
    """Bound on ``sum_{j>=start} |w_j/v_j - 1|`` for supported rule pairs."""
    if w == v:
        return 0.0
    if isinstance(v, ConstantRule) and v.c != 0:
        if isinstance(w, ConstantRule):
            return 0.0 if w.c == v.c else math.inf
        if isinstance(w, AffineRule) and w.base == v.c:
            t = w.inner.tail_abs_sum(start)
            return None if t is None else t / float(abs(v.c))
        if isinstance(w, ExplicitThenRule) and w.tail is not None:
            if start > len(w.prefix):
                return _ratio_deviation_tail(w.tail, v, start - len(w.prefix))
            head = sum(
                abs(complex(x) / complex(v.c) - 1.0)
                for x in w.prefix[start - 1:]
            )
            rest = _ratio_deviation_tail(w.tail, v, 1)
            return None if rest is None else head + rest
    return None


def shields_similar(w: ScalarRule, v: ScalarRule, horizon: int,
                    witness_floor: float = 1e-6) -> ShieldsVerdict:
    """Extremes of ``|prod_{j=k}^{k+l} w_j / v_j|`` over windows in [1, horizon].

    Two injective weighted shifts are similar exactly when all window
    products of their weight ratios stay bounded above and away from 0.
    A zero weight makes the ratio products degenerate and is reported
    immediately as an unbounded witness.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    cum = 0.0
    run_min, run_min_at = 0.0, 0
    run_max, run_max_at = 0.0, 0
    best_lo, best_lo_win = math.inf, (1, 1)
    best_hi, best_hi_win = -math.inf, (1, 1)
    for j in range(1, horizon + 1):
        wj, vj = w.value(j), v.value(j)
        if vj == 0:
            return UnboundedWitness((j, j), math.inf, horizon)
        if wj == 0:
            return UnboundedWitness((j, j), 0.0, horizon)
        cum += log_abs(wj) - log_abs(vj)
        lo = cum - run_max
        if lo < best_lo:
            best_lo, best_lo_win = lo, (run_max_at + 1, j)
        hi = cum - run_min
        if hi > best_hi:
            best_hi, best_hi_win = hi, (run_min_at + 1, j)
        if cum < run_min:
            run_min, run_min_at = cum, j
        if cum > run_max:
            run_max, run_max_at = cum, j

    tail_dev = _ratio_deviation_tail(w, v, horizon + 1)
    if tail_dev is None:
        tail_dev = _ratio_deviation_tail(v, w, horizon + 1)
    if tail_dev is not None and tail_dev < 0.5:
        tail_log = tail_dev / (1.0 - tail_dev)
        return BoundedCertified(
            c=math.exp(best_lo - tail_log),
            C=math.exp(best_hi + tail_log),
            horizon=horizon,
            tail_log_bound=tail_log,
        )
    c, C = math.exp(best_lo), math.exp(best_hi)
    if c < witness_floor:
        return UnboundedWitness(best_lo_win, c, horizon)
    if C > 1.0 / witness_floor:
        return UnboundedWitness(best_hi_win, C, horizon)
    return BoundedNumerically(c, C, horizon)


def similarity_diagonal(w: ScalarRule, v: ScalarRule,
                        horizon: int = 10_000) -> Diagonal:
    """Diagonal intertwiner between weighted shifts with ratio-bounded weights.

    Entries ``x_1 = 1`` and ``x_{n+1} = x_n * v_n / w_n`` (so ``x_n`` is a
    window product of weight ratios); conjugating the forward shift with
    weights ``w`` by this diagonal yields the shift with weights ``v``
    entrywise.  Rejects pairs whose window products are unbounded.
    """
    verdict = shields_similar(w, v, horizon)
    if not is_bounded_verdict(verdict):
        raise PreconditionViolatedError(
            f"weight ratios unbounded: window {verdict.window} attains "
            f"{verdict.value}"
        )
    cache: list = [1]

    def value(n: int):
        while len(cache) < n:
            m = len(cache)
            cache.append(cache[-1] * v.value(m) / w.value(m))
        return cache[n - 1]

    return Diagonal(CallableRule(value, "similarity intertwiner prod_{j<n} v_j/w_j"))


def orbit_similarity_diagonal(perm, w: ScalarRule, v: ScalarRule,
                              anchor: int = 1, cap: int = 1_000_000) -> Diagonal:
    """Intertwiner for shifts along an arbitrary single-orbit permutation.

    Solves ``x_{perm(j)} = x_j v_j / w_j`` along the orbit of ``anchor``
    with ``x_anchor = 1``; then ``X (perm-shift with weights w) X^{-1}``
    equals the perm-shift with weights ``v`` entrywise.
    """
    cache = {anchor: 1}
    state = {"fwd": anchor, "bwd": anchor}

    def value(n: int):
        steps = 0
        while n not in cache:
            f = state["fwd"]
            nxt = perm.forward(f)
            cache[nxt] = cache[f] * v.value(f) / w.value(f)
            state["fwd"] = nxt
            b = state["bwd"]
            prv = perm.inverse(b)
            cache[prv] = cache[b] * w.value(prv) / v.value(prv)
            state["bwd"] = prv
            steps += 1
            if steps > cap:
                raise PreconditionViolatedError(
                    f"index {n} not reached on the orbit of {anchor}"
                )
        return cache[n]

    return Diagonal(CallableRule(value, "orbit similarity intertwiner"))


# ---------------------------------------------------------------------------
# Block-model norm blowup (continuous case)
# ---------------------------------------------------------------------------


def block_norm_blowup(alpha_seq: ScalarRule, m: float, M: float, lam: Scalar,
                      bound: float = DEFAULT_BOUND,
                      step_cap: int = DEFAULT_STEP_CAP,
                      epsilon: float = DEFAULT_EPSILON) -> EigenExclusionCertificate:
    """Norm blowup certificate for the block bilateral shift model.

    Cell norms sit in shrinking symmetric intervals around a limit
    ``alpha``; an eigenvector's block norms obey

        ||x^(n)||  >=  m ||x^(0)|| |lam|^{-n} prod_{k<n} alpha_{2k-1}   (n >= 1)
        ||x^(n)||  >=  ||x^(0)|| (|lam| / ((1+g_k) alpha))^{|n|}-style  (n <= -1)

    so three regimes arise: ``|lam| < alpha`` diverges forward,
    ``|lam| > alpha`` diverges backward (the correction product over the
    summable gaps ``g_k`` converges), and on ``|lam| = alpha`` the
    forward bound has a positive constant floor past the Claim-1 cutoff,
    contradicting square-summability.
    """
    if not (0 < m <= M):
        raise PreconditionViolatedError("need 0 < m <= M")
    if lam == 0:
        raise PreconditionViolatedError("lambda must be nonzero")
    alpha = alpha_seq.limit()
    if alpha is None:
        raise PreconditionViolatedError("alpha sequence has no certified limit")
    alpha_f = float(alpha)
    if alpha_f <= 0:
        raise PreconditionViolatedError("alpha must be positive")
    gap_total = _gap_tail_sum(alpha_seq, alpha, 1)
    if gap_total is None or math.isinf(gap_total):
        raise PreconditionViolatedError(
            "interval gaps are not certifiably summable"
        )

    r = abs(complex(lam))
    base_details = (
        ("alpha", alpha_f), ("m", float(m)), ("M", float(M)),
        ("epsilon", float(epsilon)),
    )
    log_bound = math.log(bound)

    if abs(r - alpha_f) <= 1e-12 * alpha_f:
        N = claim1_find_N(alpha_seq, alpha, epsilon)
        floor_log = math.log(m) + math.log1p(-epsilon) - N * math.log(r)
        for k in range(1, N):
            floor_log += math.log(float(alpha_seq.value(2 * k - 1)))
        return EigenExclusionCertificate(
            lam=complex(lam),
            witness_index=N,
            attained_magnitude=_safe_exp(floor_log),
            recurrence_kind="block-norm",
            bound=0.0,
            regime="constant-floor",
            covered_region=f"circle |lambda| = {alpha_f!r}",
            details=base_details + (("claim1_N", N),),
        )

    if r < alpha_f:
        log_r = math.log(r)
        total = math.log(m) - log_r
        if total > log_bound:
            return EigenExclusionCertificate(
                complex(lam), 1, _safe_exp(total), "block-norm", bound,
                "forward", covered_region=f"0 < |lambda| <= {r!r}",
                details=base_details,
            )
        for n in range(2, step_cap + 1):
            total += math.log(float(alpha_seq.value(2 * (n - 1) - 1))) - log_r
            if total > log_bound:
                return EigenExclusionCertificate(
                    complex(lam), n, _safe_exp(total), "block-norm", bound,
                    "forward", covered_region=f"0 < |lambda| <= {r!r}",
                    details=base_details,
                )
        raise StepCapExceededError(
            f"no forward blowup witness within {step_cap} steps for |lambda|={r}"
        )

    log_r = math.log(r)
    log_alpha = math.log(alpha_f)
    total = 0.0
    for k in range(1, step_cap + 1):
        g = 1.0 - float(alpha_seq.value(k)) / alpha_f
        total += log_r - log_alpha - math.log1p(g)
        if total > log_bound:
            return EigenExclusionCertificate(
                complex(lam), k, _safe_exp(total), "block-norm", bound,
                "backward", covered_region=f"|lambda| >= {r!r}",
                details=base_details,
            )
    raise StepCapExceededError(
        f"no backward blowup witness within {step_cap} steps for |lambda|={r}"
    )


def replay_block_certificate(alpha_seq: ScalarRule,
                             cert: EigenExclusionCertificate) -> float:
    """Re-run a block-norm certificate's recurrence; returns the magnitude."""
    if cert.recurrence_kind != "block-norm":
        raise ValueError("not a block-norm certificate")
    alpha_f = cert.detail("alpha")
    m = cert.detail("m")
    epsilon = cert.detail("epsilon")
    r = abs(cert.lam)
    if cert.regime == "constant-floor":
        N = cert.witness_index
        total = math.log(m) + math.log1p(-epsilon) - N * math.log(r)
        for k in range(1, N):
            total += math.log(float(alpha_seq.value(2 * k - 1)))
        return _safe_exp(total)
    if cert.regime == "forward":
        total = math.log(m) - math.log(r)
        for n in range(2, cert.witness_index + 1):
            total += math.log(float(alpha_seq.value(2 * (n - 1) - 1))) - math.log(r)
        return _safe_exp(total)
    if cert.regime == "backward":
        total = 0.0
        for k in range(1, cert.witness_index + 1):
            g = 1.0 - float(alpha_seq.value(k)) / alpha_f
            total += math.log(r) - math.log(alpha_f) - math.log1p(g)
        return _safe_exp(total)
    raise ValueError(f"unknown regime {cert.regime!r}")


# ---------------------------------------------------------------------------
# Dense eigensolver for truncations
# ---------------------------------------------------------------------------

_EIG_MAX_DIM = 512
_EIG_RESIDUAL_TOL = 1e-8


def dense_eigs(M) -> list:
    """Eigenvalues of a dense matrix with a residual guarantee.

    Each returned eigenvalue comes from a pair ``(lam, x)`` with
    ``||Mx - lam x|| <= 1e-8 ||M|| ||x||``; the list is sorted by real
    part, then imaginary part, for deterministic output.
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionViolatedError("matrix must be square")
    n = A.shape[0]
    if n > _EIG_MAX_DIM:
        raise PreconditionViolatedError(f"dimension {n} exceeds cap {_EIG_MAX_DIM}")
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(f"eigensolver failed: {exc}") from exc
    norm = np.linalg.norm(A, 2)
    residuals = np.linalg.norm(A @ vecs - vecs * vals, axis=0)
    scale = norm * np.linalg.norm(vecs, axis=0)
    bad = residuals > _EIG_RESIDUAL_TOL * np.maximum(scale, 1e-300)
    if norm > 0 and np.any(bad):
        raise ConvergenceFailureError(
            f"residual guarantee violated for {int(bad.sum())} eigenpairs"
        )
    return sorted((complex(v) for v in vals), key=lambda z: (z.real, z.imag))


# ---------------------------------------------------------------------------
# Lambda grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateGridConfig:
    """Grid + certificate parameters shared by the deflation pipelines."""

    moduli: int = 16
    phases: int = 8
    min_modulus: float = 1e-3
    max_modulus: Optional[float] = None
    bound: float = DEFAULT_BOUND
    step_cap: int = DEFAULT_STEP_CAP
    epsilon: float = DEFAULT_EPSILON


def sup_abs_weight(rule: ScalarRule, probe: int = 64) -> float:
    if rule.abs_nonincreasing() is True:
        return float(abs(rule.value(1)))
    return max(float(abs(rule.value(n))) for n in range(1, probe + 1))


def lambda_grid(cfg: CertificateGridConfig, max_weight: float) -> Tuple[complex, ...]:
    """Logarithmically spaced moduli times equally spaced phases."""
    top = cfg.max_modulus if cfg.max_modulus is not None else 10.0 * max_weight
    if top <= cfg.min_modulus:
        top = cfg.min_modulus * 10.0
    if cfg.moduli == 1:
        radii = [cfg.min_modulus]
    else:
        lo, hi = math.log(cfg.min_modulus), math.log(top)
        radii = [
            math.exp(lo + (hi - lo) * i / (cfg.moduli - 1))
            for i in range(cfg.moduli)
        ]
    out = []
    for rr in radii:
        for q in range(cfg.phases):
            theta = 2.0 * math.pi * q / cfg.phases
            out.append(complex(rr * math.cos(theta), rr * math.sin(theta)))
    return tuple(out)


def grid_certificates(s: ShiftForm, cfg: Optional[CertificateGridConfig] = None
                      ) -> Tuple[Tuple[EigenExclusionCertificate, ...],
                                 Tuple[EigenExclusionCertificate, ...]]:
    """Direct and adjoint certificates for every grid point, or fail loudly."""
    cfg = cfg or CertificateGridConfig()
    grid = lambda_grid(cfg, sup_abs_weight(s.weights))
    direct = tuple(
        shift_eigen_exclude(s, lam, cfg.bound, cfg.step_cap) for lam in grid
    )
    adjoint = tuple(
        adjoint_exclusion(s, lam, cfg.bound, cfg.step_cap) for lam in grid
    )
    return direct, adjoint
