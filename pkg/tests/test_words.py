"""Rotation words, the shortening engine and stabiliser structure."""

import random

import pytest

from fareyquot.farey import (
    IDENTITY,
    T_MAT,
    farey_geodesic,
    intersection_det,
    mat_apply,
    mat_mul,
    mat_pow,
    slope_matrix,
    slopes_in_box,
    twist_power,
)
from fareyquot.projections import derive_constants
from fareyquot.words import (
    InvalidWord,
    MeasureStall,
    NoPivotFound,
    ReductionBudget,
    RotationWord,
    conjugated_syllables,
    evaluate,
    greendlinger_step,
    make_word,
    matrix_pivot_search,
    max_projection_angle,
    measure_matrix,
    reduce_matrix,
    reduce_word,
    stabilizer_test,
    word_measure,
)

K = 7


@pytest.fixture(scope="module")
def ledger():
    return derive_constants(2, K=K, bgitC=3, lox_bounds=(2, 2))


def test_word_validation():
    with pytest.raises(InvalidWord):
        make_word(K, [((1, 0), 3)])  # not a multiple of K
    w = make_word(K, [((1, 0), K), ((1, 0), K)])
    assert w.syllables == (((1, 0), 2 * K),)  # adjacent merge
    w2 = make_word(K, [((0, 1), K), ((0, 1), -K)])
    assert w2.syllables == ()  # free cancellation


def test_evaluate_homomorphic():
    assert evaluate(make_word(K, [])) == IDENTITY
    assert evaluate(make_word(K, [((1, 0), K)])) == (1, K, 0, 1)
    a = make_word(K, [((0, 1), K), ((2, 1), -K)])
    b = make_word(K, [((1, 2), 2 * K)])
    ab = make_word(K, list(a.syllables) + list(b.syllables))
    assert evaluate(ab) == mat_mul(evaluate(a), evaluate(b))


def test_word_json_round_trip():
    w = make_word(K, [((0, 1), K), ((3, 2), -2 * K)])
    assert RotationWord.from_json(w.to_json()) == w


def test_conjugated_syllables_peel():
    w = make_word(K, [((0, 1), K), ((3, 2), -2 * K), ((1, 0), K)])
    conj = conjugated_syllables(w)
    g = evaluate(w)
    # peeling the i-th conjugated rotation removes that factor
    for i, (s, e) in enumerate(conj):
        peeled = mat_mul(twist_power(s, -e), g)
        rest = [syl for j, syl in enumerate(w.syllables) if j != i]
        assert peeled == evaluate(make_word(K, rest))


def test_greendlinger_worked_examples(ledger):
    # a K-th twist at the zero slope, seen from the vertical slope
    w = make_word(K, [((0, 1), K)])
    step, w2 = greendlinger_step(w, (1, 0), ledger)
    assert step.pivot == (0, 1)
    assert step.exponent == -K
    assert step.case == "large-angle"
    assert step.angle is not None and step.angle > ledger.ThetaShort
    assert evaluate(w2) == IDENTITY
    # the symmetric picture
    w = make_word(K, [((1, 0), K)])
    step, w2 = greendlinger_step(w, (0, 1), ledger)
    assert step.pivot == (1, 0) and step.exponent == -K
    assert evaluate(w2) == IDENTITY


def test_greendlinger_rejects_trivial(ledger):
    w = make_word(K, [((0, 1), K), ((0, 1), -K)])
    with pytest.raises(ValueError):
        greendlinger_step(w, (1, 0), ledger)


def test_inactive_pivot_case(ledger):
    # an element fixing the base can only be unwound at the base itself
    g = twist_power((1, 0), 2 * K)
    s, e, mb, ma, case, angle = matrix_pivot_search(g, (1, 0), ledger)
    assert case == "inactive-pivot"
    assert s == (1, 0) and e == -2 * K
    assert ma < mb


def test_kernel_structure_guard(ledger):
    # an element fixing the base that is not a twist power of K signals a
    # violated kernel assumption rather than a silent wrong answer
    with pytest.raises(NoPivotFound):
        matrix_pivot_search(twist_power((1, 0), K + 1), (1, 0), ledger)
    with pytest.raises(NoPivotFound):
        matrix_pivot_search((-1, -K, 0, -1), (1, 0), ledger)


def test_single_conjugate_reduces_in_one_step(ledger):
    g = (2, 1, 1, 1)
    w = make_word(K, [(mat_apply(g, (1, 0)), K)])
    res = reduce_word(w, (0, 1), ledger)
    assert res.certificate == "trivial"
    assert len(res.steps) == 1
    assert res.tag.reduction_depth == 1


def test_reduce_seeded_words_with_oracle(ledger, oracle7):
    rng = random.Random(11)
    pool = slopes_in_box(8)
    reduced = 0
    for _ in range(120):
        n = rng.randrange(1, 7)
        sylls = [(rng.choice(pool), rng.choice((-3, -2, -1, 1, 2, 3)) * K)
                 for _ in range(n)]
        try:
            w = make_word(K, sylls)
        except InvalidWord:
            continue
        if not w.syllables:
            continue
        res = reduce_word(w, (1, 0), ledger, oracle=oracle7)
        assert res.certificate == "trivial"
        assert res.oracle_agrees
        for step in res.steps:
            assert step.measure_after < step.measure_before
        reduced += 1
    assert reduced > 100


def test_pivot_location_invariant(ledger):
    """Accepted pivots stay within distance 1 of the canonical geodesic
    from the base to the current image (or are the base in the inactive
    case)."""
    rng = random.Random(12)
    pool = slopes_in_box(8)
    checked = 0
    for _ in range(60):
        n = rng.randrange(1, 6)
        sylls = [(rng.choice(pool), rng.choice((-2, -1, 1, 2)) * K)
                 for _ in range(n)]
        try:
            w = make_word(K, sylls)
        except InvalidWord:
            continue
        if not w.syllables:
            continue
        cur = w
        while evaluate(cur) != IDENTITY:
            g = evaluate(cur)
            step, cur = greendlinger_step(cur, (1, 0), ledger)
            gx = mat_apply(g, (1, 0))
            if gx == (1, 0):
                assert step.pivot == (1, 0)
                assert step.case == "inactive-pivot"
                continue
            path = farey_geodesic((1, 0), gx)
            assert any(v == step.pivot or
                       intersection_det(v, step.pivot) == 1 for v in path)
            checked += 1
    assert checked > 50


def test_reduce_budget_error(ledger):
    rng = random.Random(13)
    pool = slopes_in_box(6)
    sylls = [(rng.choice(pool), rng.choice((-2, -1, 1, 2)) * K)
             for _ in range(6)]
    w = make_word(K, sylls)
    if w.syllables:
        with pytest.raises(ReductionBudget):
            reduce_word(w, (1, 0), ledger, budget=1)


def test_reduce_matrix_witness(ledger):
    g = mat_mul(twist_power((0, 1), K), twist_power((2, 1), -2 * K))
    witness, steps = reduce_matrix(g, (1, 0), ledger)
    assert evaluate(witness) == g
    assert all(e % K == 0 and e != 0 for _, e in witness.syllables)
    assert steps


def test_measures():
    assert measure_matrix(IDENTITY) == (0,)
    assert measure_matrix((1, K, 0, 1)) == (1, K + 2)
    assert max_projection_angle(twist_power((0, 1), K), (1, 0)) in (K - 1, K)
    w = make_word(K, [((0, 1), K)])
    flag, norm, length = word_measure(w, (1, 0))
    assert flag == 1 and length == 1


def test_replay_measures_match(ledger):
    # the serialised trace carries measures that recompute on replay
    w = make_word(K, [((0, 1), K), ((2, 1), -K)])
    res = reduce_word(w, (1, 0), ledger)
    blob = res.to_json()
    cur = w
    for srec in blob["steps"]:
        assert tuple(srec["measure_before"]) == word_measure(cur, (1, 0))
        cur = make_word(K, ((tuple(srec["pivot"]), srec["exponent"]),)
                        + cur.syllables)
        assert tuple(srec["measure_after"]) == word_measure(cur, (1, 0))
    assert evaluate(cur) == IDENTITY


# -- stabiliser structure ------------------------------------------------------


def test_stabilizer_examples():
    report = stabilizer_test((1, 0), syllable_bound=2, exponent_bound=2, K=K)
    assert report.holds()
    assert report.fixers > 0
    assert report.fixers == report.pure_twists


def test_stabilizer_pure_twist_detected():
    # a twist power at the vertex fixes it and is recognised as pure
    report = stabilizer_test((1, 0), syllable_bound=1, exponent_bound=1, K=K,
                             pool=[(1, 0), (0, 1)])
    assert report.holds()
    assert report.fixers == 2  # T^K and T^-K


def test_stabilizer_moving_word_excluded():
    # the twist at the zero slope moves the vertical slope
    g = twist_power((0, 1), K)
    assert mat_apply(g, (1, 0)) != (1, 0)
