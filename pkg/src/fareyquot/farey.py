"""Exact arithmetic for the Farey graph and the twist group acting on it.

Slopes are primitive integer pairs (p, q) up to sign, written canonically
with q > 0, except the vertical slope (1, 0).  Two slopes are adjacent in
the Farey graph when |p q' - p' q| = 1.  Mapping classes are integer
matrices (a, b, c, d) with ad - bc = 1 acting projectively on slopes.

Everything here is pure integer arithmetic; no floats anywhere.
"""

from __future__ import annotations

import math
from functools import lru_cache

Slope = tuple[int, int]
Mat = tuple[int, int, int, int]

INFINITY: Slope = (1, 0)
ZERO: Slope = (0, 1)

IDENTITY: Mat = (1, 0, 0, 1)
S_MAT: Mat = (0, -1, 1, 0)
T_MAT: Mat = (1, 1, 0, 1)


class NotPrimitive(ValueError):
    """Raised when a slope pair has a common factor; carries the gcd."""

    def __init__(self, p: int, q: int, g: int):
        self.gcd = g
        super().__init__(f"({p}, {q}) is not primitive: gcd = {g}")


class NotActive(ValueError):
    """Raised when a projection is requested at an inactive point."""


def canonical_slope(p: int, q: int) -> Slope:
    """Canonical representative of the projective class of (p, q).

    Normalises the sign so q > 0, with (1, 0) for the q = 0 class.
    Idempotent.  Raises NotPrimitive when gcd(|p|, |q|) > 1.
    """
    if p == 0 and q == 0:
        raise ValueError("(0, 0) is not a slope")
    g = math.gcd(abs(p), abs(q))
    if g > 1:
        raise NotPrimitive(p, q, g)
    if q < 0 or (q == 0 and p < 0):
        return (-p, -q)
    return (p, q)


def intersection_det(x: Slope, y: Slope) -> int:
    """|det| of the pair; 1 exactly on Farey edges, 0 exactly on equality."""
    return abs(x[0] * y[1] - y[0] * x[1])


def intersection_number(x: Slope, y: Slope, surface: str = "1,1") -> int:
    """Geometric intersection number of the curves modelled by x, y.

    On the once-punctured torus this is |det|; the four-punctured sphere
    uses the same slope model with twice the pairing.
    """
    d = intersection_det(x, y)
    return 2 * d if surface == "0,4" else d


def is_adjacent(x: Slope, y: Slope) -> bool:
    return intersection_det(x, y) == 1


def mat_mul(a: Mat, b: Mat) -> Mat:
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def mat_det(m: Mat) -> int:
    return m[0] * m[3] - m[1] * m[2]


def mat_inv(m: Mat) -> Mat:
    # unimodular inverse; valid only for det = 1
    a, b, c, d = m
    return (d, -b, -c, a)


def mat_pow(m: Mat, n: int) -> Mat:
    if n < 0:
        m, n = mat_inv(m), -n
    out = IDENTITY
    while n:
        if n & 1:
            out = mat_mul(out, m)
        m = mat_mul(m, m)
        n >>= 1
    return out


def mat_neg(m: Mat) -> Mat:
    return (-m[0], -m[1], -m[2], -m[3])


def mat_apply(m: Mat, x: Slope) -> Slope:
    """Projective action of a unimodular matrix on a slope."""
    p = m[0] * x[0] + m[1] * x[1]
    q = m[2] * x[0] + m[3] * x[1]
    return canonical_slope(p, q)


def twist_matrix(y: Slope) -> Mat:
    """The Dehn twist about y as a transvection: z -> z + <y, z> y.

    Anchored so twist_matrix((1, 0)) = [[1, 1], [0, 1]]; every other twist
    is the conjugate of the anchor, which makes the assignment
    equivariant: twist_matrix(g y) = g twist_matrix(y) g^-1.
    """
    p, q = y
    return (1 - p * q, p * p, -q * q, 1 + p * q)


def twist_power(y: Slope, e: int) -> Mat:
    """twist_matrix(y) ** e, computed in closed form (the twist is unipotent)."""
    p, q = y
    return (1 - e * p * q, e * p * p, -e * q * q, 1 + e * p * q)


def _bezout(p: int, q: int) -> tuple[int, int]:
    """(a, b) with a*p + b*q = 1 for primitive (p, q), deterministic."""
    a, b, g = _ext_gcd(p, q)
    if g != 1:
        raise NotPrimitive(p, q, abs(g))
    return a, b


def _ext_gcd(p: int, q: int) -> tuple[int, int, int]:
    old_r, r = p, q
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_s, old_t, old_r


@lru_cache(maxsize=65536)
def chart_matrix(y: Slope) -> Mat:
    """A fixed unimodular matrix sending y to (1, 0).

    The choice is pinned by the extended Euclidean algorithm so that
    chart-dependent quantities are reproducible; all projection distances
    are independent of the choice anyway.
    """
    p, q = y
    a, b = _bezout(p, q)
    return (a, b, -q, p)


def slope_matrix(y: Slope) -> Mat:
    """A fixed unimodular matrix sending (1, 0) to y (inverse chart)."""
    return mat_inv(chart_matrix(y))


def chart_floor(y: Slope, x: Slope) -> int:
    """Floor of the image of x in the chart at y.

    Defined exactly when x intersects y; the image then has a nonzero
    denominator.  Differences of these floors are the annular projection
    distances and do not depend on the chart choice.
    """
    m = chart_matrix(y)
    p = m[0] * x[0] + m[1] * x[1]
    q = m[2] * x[0] + m[3] * x[1]
    if q == 0:
        raise NotActive(f"{x} does not intersect {y}")
    if q < 0:
        p, q = -p, -q
    return p // q


def annular_projection(y: Slope, x: Slope, z: Slope) -> int:
    """Subsurface projection distance at the annulus about y.

    d(x, z) = |floor(M x) - floor(M z)| for any chart M sending y to the
    vertical slope.  Symmetric, satisfies the triangle inequality, and is
    equivariant under the simultaneous action on (y, x, z).
    """
    return abs(chart_floor(y, x) - chart_floor(y, z))


def _chart_image(y: Slope, x: Slope) -> tuple[int, int]:
    m = chart_matrix(y)
    p = m[0] * x[0] + m[1] * x[1]
    q = m[2] * x[0] + m[3] * x[1]
    if q == 0:
        raise NotActive(f"{x} does not intersect {y}")
    if q < 0:
        p, q = -p, -q
    return p, q


def fan_separation(y: Slope, x: Slope, z: Slope) -> int:
    """Number of neighbours of y strictly between x and z in circle order.

    Equivalently the number of integers strictly between the chart images
    of x and z, i.e. the count of Farey edges at y crossed by [x, z].
    Purely projective, hence exactly equivariant; within 1 of the raw
    projection distance, and monotone under betweenness, which is what
    the modified-distance contract needs.
    """
    a, b = _chart_image(y, x)
    c, d = _chart_image(y, z)
    lo_f = min(a // b, c // d)
    hi_c = max(-((-a) // b), -((-c) // d))
    return max(0, hi_c - lo_f - 1)


def colour(y: Slope, m: int = 1) -> int:
    """A twist-invariant colouring with m in {1, 3}.

    m = 3 uses the parity class of (p, q) mod 2; distinct slopes in one
    class have even pairing, so same-colour slopes always intersect.
    """
    if m == 1:
        return 0
    if m != 3:
        raise ValueError("colour count must be 1 or 3")
    p, q = y[0] & 1, y[1] & 1
    return {(0, 1): 0, (1, 0): 1, (1, 1): 2}[(p, q)]


def slopes_in_box(bound: int) -> list[Slope]:
    """All canonical slopes with |p| <= bound and q <= bound, sorted."""
    out = [INFINITY]
    for q in range(1, bound + 1):
        for p in range(-bound, bound + 1):
            if math.gcd(abs(p), q) == 1:
                out.append((p, q))
    out.sort()
    return out


# ---------------------------------------------------------------------------
# Geodesics.
#
# Working in the chart at the start point, the target is a rational p/q.
# Every path from the vertical slope to a point of (n, n+1) must exit
# through n or n+1 (Farey edges do not cross), so the distance satisfies
#     d(inf, w) = 1 + min(d(floor(w), w), d(ceil(w), w))
# and recursing into the chart at the chosen integer is one continued
# fraction step.  The "leftmost" canonical geodesic always prefers the
# floor branch on ties.
# ---------------------------------------------------------------------------


def _pivot_child(w: Slope, n: int) -> Slope:
    # chart at the integer slope (n, 1): g = [[0, -1], [1, -n]]
    p, q = w
    return canonical_slope(-q, p - n * q)


@lru_cache(maxsize=1 << 20)
def _dist_from_inf(w: Slope) -> int:
    q = w[1]
    if q == 0:
        return 0
    if q == 1:
        return 1
    n = w[0] // q
    return 1 + min(_dist_from_inf(_pivot_child(w, n)),
                   _dist_from_inf(_pivot_child(w, n + 1)))


def farey_distance(x: Slope, z: Slope) -> int:
    """Exact distance in the Farey graph."""
    return _dist_from_inf(mat_apply(chart_matrix(x), z))


def _geo_from_inf(w: Slope) -> list[Slope]:
    if w[1] == 0:
        return [INFINITY]
    if w[1] == 1:
        return [INFINITY, w]
    n = w[0] // w[1]
    lo, hi = _pivot_child(w, n), _pivot_child(w, n + 1)
    pick = n if _dist_from_inf(lo) <= _dist_from_inf(hi) else n + 1
    child = lo if pick == n else hi
    back = mat_inv((0, -1, 1, -pick))
    return [INFINITY] + [mat_apply(back, v) for v in _geo_from_inf(child)]


def farey_geodesic(x: Slope, z: Slope) -> list[Slope]:
    """The canonical (leftmost-pivot) geodesic from x to z, inclusive."""
    if x == z:
        return [x]
    back = slope_matrix(x)
    w = mat_apply(chart_matrix(x), z)
    return [mat_apply(back, v) for v in _geo_from_inf(w)]


def _geos_from_inf(w: Slope, limit: int) -> list[list[Slope]]:
    if w[1] == 0:
        return [[INFINITY]]
    if w[1] == 1:
        return [[INFINITY, w]]
    n = w[0] // w[1]
    children = [(n, _pivot_child(w, n)), (n + 1, _pivot_child(w, n + 1))]
    best = min(_dist_from_inf(c) for _, c in children)
    out: list[list[Slope]] = []
    for pick, child in children:
        if _dist_from_inf(child) != best:
            continue
        back = mat_inv((0, -1, 1, -pick))
        for sub in _geos_from_inf(child, limit):
            out.append([INFINITY] + [mat_apply(back, v) for v in sub])
            if len(out) >= limit:
                return out
    return out


def farey_geodesics_all(x: Slope, z: Slope, limit: int = 4096) -> list[list[Slope]]:
    """All geodesics from x to z (up to limit), via the two-branch recursion."""
    if x == z:
        return [[x]]
    back = slope_matrix(x)
    w = mat_apply(chart_matrix(x), z)
    return [[mat_apply(back, v) for v in path] for path in _geos_from_inf(w, limit)]


def edge_triangle_completions(u: Slope, v: Slope) -> list[Slope]:
    """The two slopes completing the Farey edge {u, v} to a triangle."""
    if intersection_det(u, v) != 1:
        raise ValueError(f"{u} and {v} are not adjacent")
    plus = canonical_slope(u[0] + v[0], u[1] + v[1])
    minus = canonical_slope(u[0] - v[0], u[1] - v[1])
    return [plus, minus]


def geodesic_corridor(x: Slope, z: Slope) -> list[Slope]:
    """Vertices of the canonical geodesic [x, z] plus the fan pivots near it.

    Contains every slope at which the pair (x, z) can have a large
    projection: the triangle completions of each edge, and for each
    interior chart the fan slopes flanking the images of x and z.  The
    set is finite, deterministic and validated against brute force.
    """
    path = farey_geodesic(x, z)
    seen = dict.fromkeys(path)
    for u, v in zip(path, path[1:]):
        for w in edge_triangle_completions(u, v):
            seen.setdefault(w)
    for u in path:
        back = slope_matrix(u)
        for other in (x, z):
            if other == u:
                continue
            f = chart_floor(u, other)
            for n in (f, f + 1):
                seen.setdefault(mat_apply(back, (n, 1)))
    return list(seen)


# ---------------------------------------------------------------------------
# Words in the standard generators.
# ---------------------------------------------------------------------------

GenWord = list[tuple[str, int]]  # [("T", e), ("S", e), ...], exponents in Z


def evaluate_genword(word: GenWord) -> Mat:
    out = IDENTITY
    for gen, e in word:
        base = T_MAT if gen == "T" else S_MAT
        out = mat_mul(out, mat_pow(base, e))
    return out


def matrix_to_word(g: Mat) -> GenWord:
    """A word in S, T evaluating exactly to g, via the Euclidean algorithm.

    The word is returned in compressed (generator, exponent) form since
    twist powers produce exponents far beyond what flat strings can hold.
    """
    if mat_det(g) != 1:
        raise ValueError(f"determinant {mat_det(g)} != 1")
    word: GenWord = []
    a, b, c, d = g
    # left-multiplying by T^n adds n*(row 2) to row 1; by S swaps rows with
    # a sign.  Reduce |a| below |c| and swap until c = 0; record inverses.
    while c != 0:
        n = a // c  # floor division keeps the remainder canonical
        if n != 0:
            word.append(("T", n))
            a, b = a - n * c, b - n * d
        word.append(("S", 1))
        a, b, c, d = c, d, -a, -b
    # now a*d = 1 and the residual is +-T^b; each recorded entry is the
    # left factor peeled at that step, so the word reads in order
    if a == 1:
        if b != 0:
            word.append(("T", b))
    else:
        word.append(("S", 2))
        if b != 0:
            word.append(("T", -b))
    assert evaluate_genword(word) == g, "decomposition failed round-trip"
    return word


def estimate_bgit(bound: int) -> dict:
    """Estimate the geodesic-image constants over the box pool.

    C_weak: the largest d_s(x, z) seen with the canonical geodesic [x, z]
    missing the closed 1-neighbourhood of s; C_strong: the largest seen
    with s absent from some geodesic.  Above C_strong every geodesic
    passes through s itself, which is the strengthened form the polygon
    lifting pivots rely on; the flag records that the strengthened form
    held non-vacuously on this sample.
    """
    if bound < 3:
        raise ValueError("bound must be at least 3")
    pool = slopes_in_box(bound)
    c_weak = 0
    c_strong = 0
    arg_weak = arg_strong = None
    strong_premises = 0
    for i, x in enumerate(pool):
        for z in pool[i + 1:]:
            geo = farey_geodesic(x, z)
            geos = None
            candidates = dict.fromkeys(list(pool) + geodesic_corridor(x, z))
            for s in candidates:
                if s in (x, z):
                    continue
                d = annular_projection(s, x, z)
                if d <= min(c_weak, c_strong):
                    continue
                near = any(v == s or intersection_det(v, s) == 1 for v in geo)
                if not near and d > c_weak:
                    c_weak = d
                    arg_weak = (x, z, s)
                if geos is None:
                    geos = farey_geodesics_all(x, z)
                if d > c_strong and not all(s in g for g in geos):
                    c_strong = d
                    arg_strong = (x, z, s)
    # non-vacuity: count pairs exceeding the strong constant
    for i, x in enumerate(pool):
        for z in pool[i + 1:]:
            for s in geodesic_corridor(x, z):
                if s not in (x, z) and annular_projection(s, x, z) > c_strong:
                    strong_premises += 1
    return {
        "bound": bound,
        "C": max(c_weak, c_strong),
        "C_weak": c_weak,
        "C_strong": c_strong,
        "strengthened_holds": strong_premises > 0,
        "strong_premises": strong_premises,
        "witness_weak": arg_weak,
        "witness_strong": arg_strong,
    }


def slope_dot(bound: int, path: str | None = None) -> str:
    """DOT export of the Farey graph restricted to the |.| <= bound box."""
    pool = slopes_in_box(bound)
    lines = ["graph farey {"]
    for x in pool:
        lines.append(f'  "{slope_str(x)}";')
    for i, x in enumerate(pool):
        for y in pool[i + 1:]:
            if intersection_det(x, y) == 1:
                lines.append(f'  "{slope_str(x)}" -- "{slope_str(y)}";')
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def slope_str(x: Slope) -> str:
    return f"{x[0]}/{x[1]}"


def parse_slope(s: str) -> Slope:
    p, q = s.split("/")
    return canonical_slope(int(p), int(q))
