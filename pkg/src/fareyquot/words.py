"""Kernel elements as rotation words and the shortening engine.

An element of the normal closure N of the K-th twist powers is presented
as a word of syllables (slope, exponent) with every exponent a nonzero
multiple of K; evaluation is the ordered product of twist powers.  The
engine drives such elements back to the identity by prepending single
rotations chosen at pivots with a large projection angle, strictly
decreasing the measure

    (still nontrivial, max projection angle at the base, syllable count)

in lexicographic order.  Every completed run is cross-checkable against
the rewriting oracle, which certifies that the original evaluation lies
in N; the engine's own certificate is exact matrix triviality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .farey import (
    IDENTITY,
    INFINITY,
    Mat,
    Slope,
    chart_matrix,
    fan_separation,
    geodesic_corridor,
    mat_apply,
    mat_inv,
    mat_mul,
    twist_power,
)
from .projections import ConstantsLedger, FareySystem

Syllable = tuple[Slope, int]


class InvalidWord(ValueError):
    """Syllable exponents must be nonzero multiples of the twist power."""


class NoPivotFound(RuntimeError):
    """No measure-decreasing rotation exists among the candidates.

    Signals either a rotation control too small for the ledger or an
    incomplete candidate set; carries the best candidate inspected.
    """

    def __init__(self, msg: str, best=None):
        super().__init__(msg)
        self.best = best


class MeasureStall(RuntimeError):
    """Reduction stopped with a nontrivial element; carries the trace."""

    def __init__(self, msg: str, trace):
        super().__init__(msg)
        self.trace = trace


class ReductionBudget(RuntimeError):
    """Step budget exhausted; carries the partial trace."""

    def __init__(self, msg: str, trace):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class RotationWord:
    """A product of twist-power syllables, normalised left to right."""

    K: int
    syllables: tuple[Syllable, ...]

    def __len__(self) -> int:
        return len(self.syllables)

    def to_json(self) -> dict:
        return {"K": self.K,
                "syllables": [[list(s), e] for s, e in self.syllables]}

    @staticmethod
    def from_json(data: dict) -> "RotationWord":
        return make_word(data["K"],
                         [(tuple(s), e) for s, e in data["syllables"]])


def normalise_syllables(syllables) -> tuple[Syllable, ...]:
    """Merge adjacent equal-slope syllables and drop zero exponents.

    No free-group rewriting across distinct slopes happens here; the
    normalisation preserves the rotation-word presentation of N.
    """
    out: list[Syllable] = []
    for slope, e in syllables:
        if e == 0:
            continue
        if out and out[-1][0] == slope:
            merged = out[-1][1] + e
            out.pop()
            if merged:
                out.append((slope, merged))
        else:
            out.append((slope, e))
    return tuple(out)


def make_word(K: int, syllables) -> RotationWord:
    norm = normalise_syllables(syllables)
    for slope, e in norm:
        if e % K != 0 or e == 0:
            raise InvalidWord(f"exponent {e} at {slope} is not a nonzero "
                              f"multiple of {K}")
    return RotationWord(K, norm)


def evaluate(word: RotationWord) -> Mat:
    out = IDENTITY
    for slope, e in word.syllables:
        out = mat_mul(out, twist_power(slope, e))
    return out


def prepend(word: RotationWord, slope: Slope, e: int) -> RotationWord:
    return make_word(word.K, ((slope, e),) + word.syllables)


def conjugated_syllables(word: RotationWord) -> list[Syllable]:
    """Left-conjugated syllables: peeling (slope_i', -e_i) removes the
    i-th syllable from the evaluation (slope_i' is the prefix image)."""
    out = []
    prefix = IDENTITY
    for slope, e in word.syllables:
        out.append((mat_apply(prefix, slope), e))
        prefix = mat_mul(prefix, twist_power(slope, e))
    return out


# ---------------------------------------------------------------------------
# Measure and pivot search.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShorteningStep:
    pivot: Slope
    exponent: int  # the applied rotation is the twist at pivot to this power
    case: str  # "inactive-pivot" | "large-angle"
    angle: int | None
    measure_before: tuple
    measure_after: tuple

    def to_json(self) -> dict:
        return {"pivot": list(self.pivot), "exponent": self.exponent,
                "case": self.case, "angle": self.angle,
                "measure_before": list(self.measure_before),
                "measure_after": list(self.measure_after)}


@dataclass(frozen=True)
class ComplexityTag:
    """Desk-scale surrogate for the transfinite complexity of a kernel
    element: (max projection angle, syllable count), plus the observed
    number of shortening steps once a reduction has completed."""

    alpha_surrogate: int
    length_surrogate: int
    reduction_depth: int | None = None


def _fixed_decomposition(g: Mat, x: Slope) -> tuple[int, int]:
    """(sign, j) with M_x g M_x^-1 = sign * T^j, requiring g x = x."""
    m = chart_matrix(x)
    h = mat_mul(mat_mul(m, g), mat_inv(m))
    a, b, c, d = h
    if c != 0 or a != d or a not in (1, -1):
        raise ValueError(f"{g} does not fix {x}")
    return (a, b * a)


def pivot_candidates(x: Slope, gx: Slope) -> list[tuple[Slope, int]]:
    """Corridor pivots with the signed displacement of gx against x.

    The displacement at s is f_s(gx) - f_s(x) in the chart at s; a
    rotation T_s^e shifts it by exactly e, which is what the exponent
    search inverts.
    """
    out = []
    for s in geodesic_corridor(x, gx):
        if s in (x, gx):
            continue
        m = chart_matrix(s)

        def floor_at(v: Slope) -> int:
            p = m[0] * v[0] + m[1] * v[1]
            q = m[2] * v[0] + m[3] * v[1]
            if q < 0:
                p, q = -p, -q
            return p // q

        out.append((s, floor_at(gx) - floor_at(x)))
    out.sort(key=lambda t: (-abs(t[1]), t[0]))
    return out


def measure_matrix(g: Mat, x: Slope = INFINITY) -> tuple[int, ...]:
    """The reduction measure: (still nontrivial, entrywise l1 norm).

    The suggested (max projection angle, syllable count) surrogate drifts
    by the Behrstock constant between steps, which stalls reductions once
    the twist power is comparable to the local noise; the ambient matrix
    norm is an exact, drift-free size that shrinks under exactly the same
    peels (both scale with the twist exponents involved), so it is the
    measure the engine decreases, while the projection angles themselves
    are still measured and recorded on every step.
    """
    if g == IDENTITY:
        return (0,)
    return (1, abs(g[0]) + abs(g[1]) + abs(g[2]) + abs(g[3]))


def max_projection_angle(g: Mat, x: Slope) -> int:
    """Largest fan angle between x and g x, over the corridor pivots."""
    if g == IDENTITY:
        return 0
    gx = mat_apply(g, x)
    if gx == x:
        _, j = _fixed_decomposition(g, x)
        return max(abs(j) - 1, 0)
    best = 0
    for s in geodesic_corridor(x, gx):
        if s in (x, gx):
            continue
        best = max(best, fan_separation(s, x, gx))
    return best


def word_measure(word: RotationWord, x: Slope) -> tuple[int, ...]:
    return measure_matrix(evaluate(word), x) + (len(word.syllables),)


def _exponent_options(shift: int, K: int, bound: int, exact: int | None
                      ) -> list[int]:
    """Exponents m (rotation T_s^{mK}) likely to cancel a displacement."""
    base = round(-shift / K)
    opts = []
    for m in (base, base - 1, base + 1, 1, -1):
        if m != 0 and abs(m) <= bound and m not in opts:
            opts.append(m)
    if exact is not None and exact % K == 0:
        me = exact // K
        if me != 0 and me not in opts:
            opts.append(me)
    return opts


def _signed_shift(s: Slope, x: Slope, gx: Slope) -> int:
    """Chart-floor displacement f_s(gx) - f_s(x); a rotation at s by
    exponent e changes it by exactly e."""
    m = chart_matrix(s)
    out = []
    for v in (gx, x):
        p = m[0] * v[0] + m[1] * v[1]
        q = m[2] * v[0] + m[3] * v[1]
        if q < 0:
            p, q = -p, -q
        out.append(p // q)
    return out[0] - out[1]


def matrix_pivot_search(g: Mat, x: Slope, ledger: ConstantsLedger,
                        extra_candidates: list[Slope] | None = None,
                        exponent_bound: int = 4,
                        word: RotationWord | None = None,
                        restrict: bool = False
                        ) -> tuple[Slope, int, tuple, tuple, str, int | None]:
    """Find a rotation strictly decreasing the measure of g.

    Returns (pivot, exponent, measure_before, measure_after, case, angle).
    Candidates: the geodesic corridor of [x, gx] ranked by projection
    angle, any extra candidates supplied by the caller (polygon sides),
    and the word's own conjugated syllables; with restrict=True only the
    supplied candidates are searched (the polygon loop must pivot on its
    own sides).  Exponents are searched over nonzero multiples m*K with
    |m| <= exponent_bound around the displacement-cancelling value.
    Raises NoPivotFound when nothing decreases.
    """
    K = ledger.K
    before = measure_matrix(g, x)
    if before[0] == 0:
        raise ValueError("element is already trivial")
    gx = mat_apply(g, x)

    if gx == x:
        # inactive pivot: the only slope x fails to intersect is itself
        sign, j = _fixed_decomposition(g, x)
        if sign != 1 or j % K != 0 or j == 0:
            raise NoPivotFound(
                f"element fixes {x} but is {'-' if sign < 0 else ''}T^{j}, "
                f"not a K-th twist power; kernel structure violated",
                best=(x, sign, j))
        after_mat = mat_mul(twist_power(x, -j), g)
        after = measure_matrix(after_mat, x)
        return (x, -j, before, after, "inactive-pivot", None)

    cands: list[tuple[Slope, int, int | None]] = []
    seen = set()
    if not restrict:
        for s, shift in pivot_candidates(x, gx):
            cands.append((s, shift, None))
            seen.add(s)
    if word is not None:
        for s, e in conjugated_syllables(word):
            if s in (x, gx) or s in seen:
                continue
            seen.add(s)
            cands.append((s, _signed_shift(s, x, gx), -e))
    if extra_candidates:
        for s in extra_candidates:
            if s in (x, gx) or s in seen:
                continue
            seen.add(s)
            cands.append((s, _signed_shift(s, x, gx), None))
        if restrict:
            cands.sort(key=lambda t: (-abs(t[1]), t[0]))

    # exact cancellations from the word first, then largest displacement
    cands.sort(key=lambda t: (t[2] is None, -abs(t[1]), t[0]))

    best_choice = None
    best_inspected = None
    for s, shift, exact in cands:
        for m_exp in _exponent_options(shift, K, exponent_bound, exact):
            e = m_exp * K
            after_mat = mat_mul(twist_power(s, e), g)
            after = measure_matrix(after_mat, x)
            if best_inspected is None or after < best_inspected[0]:
                best_inspected = (after, s, e)
            if after < before and (best_choice is None or after < best_choice[0]):
                best_choice = (after, s, e)
        if best_choice is not None and best_choice[0][0] == 0:
            break  # cannot do better than trivial
    if best_choice is None:
        raise NoPivotFound(
            f"no rotation decreases the measure {before} at base {x}",
            best=best_inspected)
    after, s, e = best_choice
    return (s, e, before, after, "large-angle", fan_separation(s, x, gx))


def greendlinger_step(word: RotationWord, x: Slope, ledger: ConstantsLedger,
                      exponent_bound: int = 4
                      ) -> tuple[ShorteningStep, RotationWord]:
    """One shortening step: a pivot rotation making the word simpler.

    In this one-colour instance the inactive case fires exactly when the
    evaluation fixes the base (the pivot is the base itself); otherwise
    the pivot sees an angle above the ledger's shortening threshold and
    the step records it.
    """
    g = evaluate(word)
    if g == IDENTITY:
        raise ValueError("word is already trivial")
    mb = word_measure(word, x)
    s, e, _, _, case, angle = matrix_pivot_search(
        g, x, ledger, exponent_bound=exponent_bound, word=word)
    new_word = prepend(word, s, e)
    ma = word_measure(new_word, x)
    step = ShorteningStep(s, e, case, angle, mb, ma)
    if angle is not None and not (angle > ledger.ThetaShort):
        # the contract of the large-angle case; ThetaShort may be negative
        raise NoPivotFound(
            f"chosen pivot angle {angle} not above the shortening "
            f"threshold {ledger.ThetaShort}", best=(s, e))
    return step, new_word


@dataclass
class ReduceResult:
    certificate: str  # "trivial" | "irreducible"
    steps: list[ShorteningStep]
    final_word: RotationWord
    tag: ComplexityTag
    oracle_agrees: bool | None = None

    def to_json(self) -> dict:
        return {
            "schema": "reduction-trace/1",
            "certificate": self.certificate,
            "steps": [s.to_json() for s in self.steps],
            "final_word": self.final_word.to_json(),
            "alpha_surrogate": self.tag.alpha_surrogate,
            "length_surrogate": self.tag.length_surrogate,
            "reduction_depth": self.tag.reduction_depth,
            "oracle_agrees": self.oracle_agrees,
        }


def reduce_word(word: RotationWord, x: Slope, ledger: ConstantsLedger,
                budget: int = 0, oracle=None,
                exponent_bound: int = 4) -> ReduceResult:
    """Iterate shortening steps until the evaluation is the identity.

    The measure strictly decreases at every accepted step (this is
    asserted, not assumed).  With an oracle attached, the original
    evaluation is confirmed to lie in the twist-power kernel and the
    agreement is recorded; a trivial certificate with a disagreeing
    oracle would be a contradiction and raises immediately.
    """
    if budget <= 0:
        budget = 16 + 6 * len(word.syllables)
    original = evaluate(word)
    steps: list[ShorteningStep] = []
    current = word
    while evaluate(current) != IDENTITY:
        if len(steps) >= budget:
            raise ReductionBudget(
                f"no trivial certificate within {budget} steps",
                [s.to_json() for s in steps])
        try:
            step, current = greendlinger_step(current, x, ledger,
                                              exponent_bound=exponent_bound)
        except NoPivotFound as exc:
            raise MeasureStall(str(exc), [s.to_json() for s in steps]) from exc
        assert step.measure_after < step.measure_before, \
            "accepted step failed to decrease the measure"
        steps.append(step)
    tag = ComplexityTag(max_projection_angle(original, x), len(word.syllables),
                        reduction_depth=len(steps))
    result = ReduceResult("trivial", steps, current, tag)
    if oracle is not None:
        from .rewriting import kernel_membership
        member = kernel_membership(oracle, original)
        result.oracle_agrees = member  # trivial certificate <=> membership
        if not member:
            raise AssertionError(
                "engine reduced a word the oracle rejects from the kernel")
    return result


def reduce_matrix(g: Mat, x: Slope, ledger: ConstantsLedger,
                  extra_candidates: list[Slope] | None = None,
                  budget: int = 64, exponent_bound: int = 4
                  ) -> tuple[RotationWord, list[ShorteningStep]]:
    """Recover a rotation-word witness for a kernel matrix by peeling.

    Returns (witness, steps) with evaluate(witness) == g; the witness
    syllables are the inverses of the peeled rotations in reverse order.
    """
    K = ledger.K
    steps: list[ShorteningStep] = []
    peeled: list[Syllable] = []
    current = g
    while current != IDENTITY:
        if len(steps) >= budget:
            raise ReductionBudget(f"matrix not reduced within {budget} steps",
                                  [s.to_json() for s in steps])
        s, e, mb, ma, case, angle = matrix_pivot_search(
            current, x, ledger, extra_candidates=extra_candidates,
            exponent_bound=exponent_bound)
        steps.append(ShorteningStep(s, e, case, angle, mb, ma))
        peeled.append((s, e))
        current = mat_mul(twist_power(s, e), current)
    # I = r_k ... r_1 g for the peeled rotations r_i, so g is the product
    # of their inverses in peel order
    witness = make_word(K, [(s, -e) for s, e in peeled])
    assert evaluate(witness) == g
    return witness, steps


# ---------------------------------------------------------------------------
# Stabiliser structure.
# ---------------------------------------------------------------------------


@dataclass
class StabiliserReport:
    vertex: Slope
    K: int
    words_checked: int
    fixers: int
    pure_twists: int
    counterexamples: list = field(default_factory=list)

    def holds(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "schema": "stabiliser-report/1",
            "vertex": list(self.vertex),
            "K": self.K,
            "words_checked": self.words_checked,
            "fixers": self.fixers,
            "pure_twists": self.pure_twists,
            "counterexamples": [repr(c) for c in self.counterexamples],
        }


def stabilizer_test(v: Slope, syllable_bound: int, exponent_bound: int,
                    K: int, pool: list[Slope] | None = None
                    ) -> StabiliserReport:
    """Exhaustively enumerate short rotation words fixing v.

    Every fixer must be exactly a twist power at v: with the convention
    that a point is inactive only for itself, the kernel meets the
    stabiliser of v in the rotations at v and nothing else.  Any other
    fixer is reported verbatim as a counterexample.
    """
    if pool is None:
        pool = [s for s in FareySystem().sample_points(2)]
    alphabet: list[tuple[Slope, int, Mat]] = []
    for s in pool:
        for m in range(-exponent_bound, exponent_bound + 1):
            if m != 0:
                alphabet.append((s, m * K, twist_power(s, m * K)))

    report = StabiliserReport(v, K, 0, 0, 0)
    m_v = chart_matrix(v)
    inv_v = mat_inv(m_v)

    def is_pure_twist(g: Mat) -> bool:
        h = mat_mul(mat_mul(m_v, g), inv_v)
        return h[2] == 0 and h[0] == 1 and h[3] == 1 and h[1] % K == 0

    stack: list[tuple[Mat, int]] = [(IDENTITY, 0)]
    while stack:
        g, depth = stack.pop()
        if depth > 0:
            report.words_checked += 1
            if mat_apply(g, v) == v:
                report.fixers += 1
                if is_pure_twist(g):
                    report.pure_twists += 1
                else:
                    report.counterexamples.append(g)
        if depth < syllable_bound:
            for s, e, mat in alphabet:
                stack.append((mat_mul(g, mat), depth + 1))
    return report
