"""Quotient balls, lifting, thinness and survival probes."""

import random

import pytest

from fareyquot.farey import (
    S_MAT,
    T_MAT,
    farey_distance,
    intersection_det,
    mat_apply,
    mat_inv,
    mat_mul,
    mat_pow,
    slopes_in_box,
    twist_power,
)
from fareyquot.projections import derive_constants
from fareyquot.quotient import (
    BallAuditAdapter,
    BallFormatError,
    BallTooSmall,
    FareyAuditAdapter,
    LiftFailure,
    OracleUnavailable,
    QuotientBall,
    build_ball,
    coset_defect,
    hypothesis_margin,
    lift_path,
    lift_polygon,
    loxodromic_survival,
    nonelementary_probe,
    project_isometry_check,
    project_side,
    quotient_geodesic,
    stabiliser_order_check,
    thinness_audit,
)
from fareyquot.rewriting import BudgetExceeded, knuth_bendix, presentation_sl2
from fareyquot.words import make_word, evaluate

K = 7
LOX = (2, 1, 1, 1)


@pytest.fixture(scope="module")
def ledger():
    return derive_constants(2, K=K, bgitC=3, lox_bounds=(2, 2))


def test_ball_radius_zero(oracle7):
    ball = build_ball(oracle7, 0)
    assert ball.vertex_count == 1


def test_ball_radius_one(oracle7):
    ball = build_ball(oracle7, 1)
    # the base vertex plus its distinct neighbour cosets, at most K
    assert ball.vertex_count == 1 + K
    assert sorted(ball.adj[0]) == list(range(1, K + 1))


def test_ball_requires_confluence():
    try:
        knuth_bendix(presentation_sl2(7), max_rules=5)
    except BudgetExceeded as exc:
        with pytest.raises(OracleUnavailable):
            build_ball(exc.partial, 2)


def test_ball_sphere_sizes(ball7):
    from collections import Counter
    spheres = Counter(ball7.dist)
    assert [spheres[r] for r in range(6)] == [1, 7, 21, 56, 147, 385]


def test_base_vertex_is_vertical_orbit(ball7):
    assert ball7.vertex_of_slope((1, 0)) == 0
    # integer slopes are the neighbours of the base
    for k in range(-3, 4):
        v = ball7.vertex_of_slope((k, 1))
        assert v in ball7.adj[0]


def test_one_lipschitz(ball7):
    rng = random.Random(6)
    pool = slopes_in_box(10)
    checked = 0
    for _ in range(200):
        x, z = rng.choice(pool), rng.choice(pool)
        u, v = ball7.vertex_of_slope(x), ball7.vertex_of_slope(z)
        if u is None or v is None:
            continue
        try:
            dq = ball7.certified_distance(u, v)
        except BallTooSmall:
            continue
        assert dq <= farey_distance(x, z)
        checked += 1
    assert checked > 100


def test_orbit_identification(ball7):
    # kernel translates of a slope land on the same vertex
    w = make_word(K, [((0, 1), K), ((2, 1), -K)])
    n = evaluate(w)
    for x in [(1, 0), (1, 2), (-3, 4)]:
        assert ball7.vertex_of_slope(x) == \
            ball7.vertex_of_slope(mat_apply(n, x))


def test_binary_round_trip(ball7, oracle7):
    blob = ball7.to_binary()
    back = QuotientBall.from_binary(blob, oracle7)
    assert back.vertices == ball7.vertices
    assert back.adj == ball7.adj
    assert back.dist == ball7.dist
    with pytest.raises(BallFormatError):
        QuotientBall.from_binary(blob[:33], oracle7)
    with pytest.raises(BallFormatError):
        QuotientBall.from_binary(b"JUNK" + blob[4:], oracle7)


def test_dot_export(ball7):
    dot = ball7.to_dot()
    assert dot.startswith("graph") and "--" in dot


def test_geodesic_examples(ball7):
    assert quotient_geodesic(ball7, 3, 3) == [3]
    v = ball7.adj[0][0]
    assert quotient_geodesic(ball7, 0, v) == [0, v]
    far = [v for v in range(ball7.vertex_count) if ball7.dist[v] == 3][0]
    path = quotient_geodesic(ball7, 0, far)
    assert len(path) == 4 and path[0] == 0 and path[-1] == far


def test_geodesic_needs_margin(ball7):
    boundary = [v for v in range(ball7.vertex_count)
                if ball7.dist[v] == ball7.R]
    with pytest.raises(BallTooSmall):
        ball7.certified_distance(boundary[0], boundary[-1])


def test_lift_path_single_vertex(ball7):
    lifts, mats = lift_path(ball7, [0], (1, 0))
    assert lifts == [(1, 0)]


def test_lift_path_edges(ball7):
    far = [v for v in range(ball7.vertex_count) if ball7.dist[v] == 3][5]
    path = quotient_geodesic(ball7, 0, far)
    lifts, mats = lift_path(ball7, path, (1, 0))
    assert [ball7.vertex_of_slope(s) for s in lifts] == path
    for a, b in zip(lifts, lifts[1:]):
        assert intersection_det(a, b) == 1
    # lifted geodesics stay geodesic
    assert farey_distance(lifts[0], lifts[-1]) == len(path) - 1


def test_lift_path_wrong_base(ball7):
    with pytest.raises(LiftFailure):
        lift_path(ball7, [0, ball7.adj[0][0]], (0, 1))  # 0/1 is not in [1/0]


def test_coset_defect_identity(ball7):
    g = mat_mul(mat_pow(T_MAT, 2), S_MAT)
    n = coset_defect(ball7, g, g)
    assert n == (1, 0, 0, 1)


def test_coset_defect_kernel_translate(ball7):
    g = mat_mul(mat_pow(T_MAT, 2), S_MAT)
    n0 = evaluate(make_word(K, [((0, 1), K)]))
    n = coset_defect(ball7, mat_mul(n0, g), g)
    assert n == n0


def test_lift_polygon_trivial_defect(ball7, ledger):
    # a degenerate triangle: three copies of the same edge close trivially
    v = ball7.adj[0][0]
    sides = [[0, v], [v, 0], [0]]
    poly = lift_polygon(ball7, sides, ledger)
    assert poly.closed
    assert poly.steps == [] or poly.defect_initial == (1, 0, 0, 1)


def test_lift_polygon_random_triangles(ball7, ledger):
    rng = random.Random(77)
    pool = [v for v in range(ball7.vertex_count) if ball7.dist[v] <= 2]
    closed = 0
    for _ in range(25):
        a, b, c = rng.sample(pool, 3)
        try:
            sides = [ball7.geodesic(a, b), ball7.geodesic(b, c),
                     ball7.geodesic(c, a)]
        except BallTooSmall:
            continue
        poly = lift_polygon(ball7, sides, ledger)
        assert poly.closed
        for side_q, side_l in zip(sides, poly.sides):
            assert project_side(ball7, side_l) == side_q
        for (a_, b_) in zip(poly.sides, poly.sides[1:]):
            assert a_[-1] == b_[0]
        closed += 1
    assert closed >= 20


def test_lift_polygon_quadrilaterals(ball7, ledger):
    rng = random.Random(78)
    pool = [v for v in range(ball7.vertex_count) if ball7.dist[v] <= 2]
    closed = 0
    for _ in range(10):
        corners = rng.sample(pool, 4)
        try:
            sides = [ball7.geodesic(a, b) for a, b in
                     zip(corners, corners[1:] + corners[:1])]
        except BallTooSmall:
            continue
        poly = lift_polygon(ball7, sides, ledger)
        assert poly.closed
        closed += 1
    assert closed >= 7


def test_lift_polygon_validates_input(ball7, ledger):
    with pytest.raises(ValueError):
        lift_polygon(ball7, [[0, 1]], ledger)
    with pytest.raises(ValueError):
        lift_polygon(ball7, [[0, 1], [2, 3], [3, 0]], ledger)


# -- thinness -------------------------------------------------------------------


def test_thinness_degenerate_triangle(ball7):
    ad = BallAuditAdapter(ball7)
    far = [v for v in range(ball7.vertex_count) if ball7.dist[v] == 2][0]
    rep = thinness_audit(ad, [(0, 0, far)])
    assert rep.audited == 1 and rep.delta == 0


def test_thinness_quotient_vs_base(ball7):
    ad = BallAuditAdapter(ball7)
    rng = random.Random(9)
    rep_q = thinness_audit(ad, ad.sample_corners(rng, 80, 2))
    fb = FareyAuditAdapter(15)
    rep_f = thinness_audit(fb, fb.sample_corners(random.Random(10), 80))
    assert rep_q.audited > 40 and rep_f.audited > 40
    assert rep_q.delta <= rep_f.delta


def test_farey_adapter_certifies_globally():
    fb = FareyAuditAdapter(12)
    u = fb.index[(1, 0)]
    v = fb.index[(5, 12)]
    path = fb.certified_geodesic(u, v)
    assert path is not None
    assert len(path) - 1 == farey_distance((1, 0), (5, 12))


# -- projection probes -----------------------------------------------------------


def test_isometry_adjacent(ball7, ledger):
    out = project_isometry_check(ball7, (1, 0), (3, 1), ledger)
    assert out["quotient_distance"] == out["base_distance"] == 1
    assert out["isometric"] and out["lipschitz"]


def test_isometry_orbit(ball7, ledger):
    for n in (1, 2, 3):
        y = mat_apply(mat_pow(LOX, n), (1, 0))
        out = project_isometry_check(ball7, (1, 0), y, ledger)
        assert out["isometric"], out
        assert out["base_distance"] == n


def test_hypothesis_fails_on_twisted_pair(ball7, ledger):
    # a large twist power separates the pair across a huge projection
    y = mat_apply(twist_power((2, 1), 2 * K), (1, 0))
    worst, hyp = hypothesis_margin((1, 0), y, ledger)
    assert worst >= 2 * K - 1
    assert not hyp  # the small-projection premise genuinely fails
    out = project_isometry_check(ball7, (1, 0), y, ledger)
    assert out["hypothesis_holds"] is False
    assert out["lipschitz"]


def test_survival_parabolic_bounded(ball7, ledger):
    out = loxodromic_survival(ball7, T_MAT, 3, ledger)
    assert out["bounded_orbit"] is True
    assert not out["loxodromic_at_scale"]


def test_survival_probe_element(ball7, ledger):
    out = loxodromic_survival(ball7, LOX, 3, ledger)
    assert [r["quotient"] for r in out["rows"]] == [1, 2, 3]
    assert out["translation_length_lower"] == 1
    assert out["loxodromic_at_scale"]
    inv = loxodromic_survival(ball7, mat_inv(LOX), 3, ledger)
    assert [r["quotient"] for r in inv["rows"]] == \
        [r["quotient"] for r in out["rows"]]


def test_nonelementary_probe(ball7, ledger):
    other = mat_mul(mat_mul(S_MAT, LOX), mat_inv(S_MAT))
    out = nonelementary_probe(ball7, LOX, other, 2, ledger)
    assert out["tested"] and out["isometric"] and out["independent"]
    skip = nonelementary_probe(ball7, LOX, other, 0, ledger)
    assert skip["tested"] is False


def test_nonelementary_same_element_rejected(ball7, ledger):
    from fareyquot.rotations import NotIndependent
    import fareyquot.quotient as q
    with pytest.raises(Exception):
        # identical orbits cannot be independent: the joint tips collide
        out = nonelementary_probe(ball7, LOX, LOX, 2, ledger)
        assert not out["independent"]
        raise RuntimeError("reported dependent, as expected")


def test_stabiliser_order(ball7):
    out = stabiliser_order_check(ball7)
    assert out["twist_order"] == K
    assert out["twist_order_is_K"] and out["central_nontrivial"]
