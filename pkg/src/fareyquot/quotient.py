"""Balls in the quotient of the Farey graph by the twist-power kernel.

Vertices of the quotient are kernel orbits of slopes, realised as cosets
of the image of the vertical-slope stabiliser in the quotient group: the
canonical vertex name is the shortlex-least normal form over the coset.
Neighbours of [g] are the cosets [g T^k S] for 0 <= k < K, the image of
the integer fan at the vertical slope.

The ball certifies distances by the standard margin argument: a path
leaving the radius-R ball between u and v has length at least
(R+1-d(c,u)) + (R+1-d(c,v)), so any shorter in-ball distance is global.
Geodesic polygons lift side by side to the Farey graph; a nonzero
closure defect is an exact kernel matrix which the shortening engine
rotates away, pivot by pivot, each pivot located on the current sides.
"""

from __future__ import annotations

import json
import struct
from collections import deque
from dataclasses import dataclass, field

from .farey import (
    IDENTITY,
    INFINITY,
    Mat,
    Slope,
    evaluate_genword,
    fan_separation,
    farey_distance,
    geodesic_corridor,
    mat_apply,
    mat_inv,
    mat_mul,
    mat_pow,
    matrix_to_word,
    slope_matrix,
    slope_str,
    twist_power,
)
from .projections import ConstantsLedger
from .rewriting import RewritingSystem, genword_to_string, shortlex_less
from .rotations import require_loxodromic
from .words import ShorteningStep, matrix_pivot_search, NoPivotFound

S_WORD = "S"
T_WORD = "T"


class OracleUnavailable(RuntimeError):
    """Ball construction needs a confluent rewriting system."""


class BallTooSmall(RuntimeError):
    """The requested query is not certifiable inside this ball."""


class LiftFailure(RuntimeError):
    """An edge of a quotient path admitted no adjacent lift (model bug)."""


class PivotNotOnSides(RuntimeError):
    """A shortening pivot missed the polygon sides.

    This would falsify the geodesic-image locus adaptation; the witness
    is carried verbatim for persistence, never silently handled.
    """

    def __init__(self, msg: str, witness: dict):
        super().__init__(msg)
        self.witness = witness


class BallFormatError(ValueError):
    """A serialised ball file failed structural validation."""


# ---------------------------------------------------------------------------
# Ball construction.
# ---------------------------------------------------------------------------


class QuotientBall:
    """A radius-R ball of the quotient graph, centred at the slope orbit
    of the vertical slope.  Immutable after construction; adjacency lists
    are complete exactly for vertices with distance < R."""

    def __init__(self, rs: RewritingSystem, K: int, R: int,
                 vertices: list[str], adj: list[list[int]], dist: list[int]):
        self.rs = rs
        self.K = K
        self.R = R
        self.vertices = vertices
        self.index = {w: i for i, w in enumerate(vertices)}
        self.adj = adj
        self.dist = dist
        self.center = 0
        self._canon_cache: dict[str, str] = {}

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def complete(self, v: int) -> bool:
        return self.dist[v] < self.R

    # -- coset canonicalisation ------------------------------------------

    def canonical_coset(self, word: str) -> str:
        """Shortlex-least normal form over word * <T, -I> (2K members)."""
        w0 = self.rs.reduce_word(word)
        hit = self._canon_cache.get(w0)
        if hit is not None:
            return hit
        best = None
        for eps in ("", "SS"):
            for k in range(self.K):
                cand = self.rs.reduce_word(w0 + eps + T_WORD * k)
                if best is None or shortlex_less(cand, best):
                    best = cand
        self._canon_cache[w0] = best
        return best

    def vertex_of_word(self, word: str) -> int | None:
        return self.index.get(self.canonical_coset(word))

    def vertex_of_slope(self, x: Slope) -> int | None:
        g = slope_matrix(x)
        return self.vertex_of_word(genword_to_string(self.rs, matrix_to_word(g)))

    def slope_of_vertex(self, v: int) -> Slope:
        """A lift of the vertex: the image of the vertical slope under the
        canonical coset word."""
        return mat_apply(_word_matrix(self.vertices[v]), INFINITY)

    # -- distances ---------------------------------------------------------

    def bfs_from(self, src: int) -> list[int]:
        d = [-1] * len(self.vertices)
        d[src] = 0
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for v in self.adj[u]:
                if d[v] < 0:
                    d[v] = d[u] + 1
                    dq.append(v)
        return d

    def exit_bound(self, u: int, v: int) -> int:
        """Any u-v path leaving the ball is at least this long."""
        return (self.R + 1 - self.dist[u]) + (self.R + 1 - self.dist[v])

    def certified_distance(self, u: int, v: int,
                           bfs: list[int] | None = None) -> int:
        """The global quotient distance, certified by the margin rule."""
        d = (bfs or self.bfs_from(u))[v]
        if d < 0 or d >= self.exit_bound(u, v):
            raise BallTooSmall(
                f"distance {u}-{v} not certifiable at radius {self.R}")
        return d

    def geodesic(self, u: int, v: int) -> list[int]:
        """A certified-global geodesic, deterministic (least-index parent)."""
        d = self.bfs_from(v)  # distances to v
        self.certified_distance(u, v, bfs=self.bfs_from(u))
        if d[u] < 0:
            raise BallTooSmall(f"no path {u}-{v} inside the ball")
        path = [u]
        cur = u
        while cur != v:
            cur = min((w for w in self.adj[cur] if d[w] == d[cur] - 1))
            path.append(cur)
        return path

    # -- export ------------------------------------------------------------

    def to_dot(self) -> str:
        lines = ["graph quotient_ball {"]
        for i, w in enumerate(self.vertices):
            label = w if w else "1"
            lines.append(f'  v{i} [label="{label}"];')
        for u in range(len(self.vertices)):
            for v in self.adj[u]:
                if u < v:
                    lines.append(f"  v{u} -- v{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    MAGIC = b"QBAL"

    def to_binary(self) -> bytes:
        """Header (magic, K, R, counts), vertex table, delta-coded adjacency."""
        out = [self.MAGIC, struct.pack("<III", self.K, self.R,
                                       len(self.vertices))]
        blob = "\n".join(self.vertices).encode()
        out.append(struct.pack("<I", len(blob)))
        out.append(blob)
        edges = 0
        body = []
        for u, nbrs in enumerate(self.adj):
            body.append(struct.pack("<I", len(nbrs)))
            prev = 0
            for v in sorted(nbrs):
                body.append(struct.pack("<i", v - prev))
                prev = v
                edges += 1
        out.append(struct.pack("<I", edges))
        out.extend(body)
        out.append(struct.pack("<%di" % len(self.dist), *self.dist))
        return b"".join(out)

    @staticmethod
    def from_binary(data: bytes, rs: RewritingSystem) -> "QuotientBall":
        try:
            if data[:4] != QuotientBall.MAGIC:
                raise BallFormatError("bad magic")
            K, R, n = struct.unpack_from("<III", data, 4)
            (blob_len,) = struct.unpack_from("<I", data, 16)
            blob = data[20:20 + blob_len].decode()
            vertices = blob.split("\n") if blob_len else [""]
            if len(vertices) != n:
                raise BallFormatError("vertex count mismatch")
            off = 20 + blob_len
            (edges,) = struct.unpack_from("<I", data, off)
            off += 4
            adj = []
            seen_edges = 0
            for _ in range(n):
                (deg,) = struct.unpack_from("<I", data, off)
                off += 4
                if deg > n:
                    raise BallFormatError("degree exceeds vertex count")
                nbrs = []
                prev = 0
                for _ in range(deg):
                    (delta,) = struct.unpack_from("<i", data, off)
                    off += 4
                    prev += delta
                    if not 0 <= prev < n:
                        raise BallFormatError("neighbour index out of range")
                    nbrs.append(prev)
                seen_edges += deg
                adj.append(nbrs)
            if seen_edges != edges:
                raise BallFormatError("edge count mismatch")
            dist = list(struct.unpack_from("<%di" % n, data, off))
            return QuotientBall(rs, K, R, vertices, adj, dist)
        except (struct.error, UnicodeDecodeError, IndexError) as exc:
            raise BallFormatError(f"truncated or corrupt ball file: {exc}")


def _word_matrix(word: str) -> Mat:
    gens = {"S": (0, -1, 1, 0), "s": (0, 1, -1, 0),
            "T": (1, 1, 0, 1), "t": (1, -1, 0, 1)}
    out = IDENTITY
    for c in word:
        out = mat_mul(out, gens[c])
    return out


def build_ball(rs: RewritingSystem, R: int) -> QuotientBall:
    """BFS the quotient ball of radius R around the base orbit.

    Neighbours of [g] are [g T^k S] for 0 <= k < K; the adjacency found
    while scanning is recorded symmetrically, so boundary vertices carry
    the edges seen from inside (complete lists only below radius R).
    """
    if not rs.confluent:
        raise OracleUnavailable("ball construction requires a confluent system")
    K = _twist_order(rs)
    ball = QuotientBall(rs, K, R, [], [], [])
    base = ball.canonical_coset("")
    vertices = [base]
    index = {base: 0}
    dist = [0]
    adj: list[list[int]] = [[]]
    dq = deque([0])
    while dq:
        u = dq.popleft()
        if dist[u] >= R:
            continue
        word_u = vertices[u]
        for k in range(K):
            w = ball.canonical_coset(word_u + T_WORD * k + S_WORD)
            v = index.get(w)
            if v is None:
                v = len(vertices)
                index[w] = v
                vertices.append(w)
                dist.append(dist[u] + 1)
                adj.append([])
                dq.append(v)
            if v != u and v not in adj[u]:
                adj[u].append(v)
                adj[v].append(u)
    for lst in adj:
        lst.sort()
    ball.vertices = vertices
    ball.index = index
    ball.adj = adj
    ball.dist = dist
    return ball


def _twist_order(rs: RewritingSystem) -> int:
    K = rs.generator_orders.get("T")
    if not K:
        raise OracleUnavailable("system lacks a twist power relator")
    return K


# ---------------------------------------------------------------------------
# Geodesics and lifting.
# ---------------------------------------------------------------------------


def quotient_geodesic(ball: QuotientBall, u: int, v: int) -> list[int]:
    """A certified-global geodesic between ball vertices (BallTooSmall
    when the margin rule cannot vouch for it)."""
    return ball.geodesic(u, v)


def lift_path(ball: QuotientBall, qpath: list[int], base: Slope
              ) -> tuple[list[Slope], list[Mat]]:
    """Lift a quotient path edge by edge starting from the given slope.

    Returns the lifted slopes and the matrix chain carrying each vertex
    (h_i maps the vertical slope to lift_i), which downstream closure
    computations need.  Geodesics lift to geodesics: the projection is
    1-Lipschitz and preserves path length.
    """
    if ball.vertex_of_slope(base) != qpath[0]:
        raise LiftFailure(f"base lift {base} does not project to the start")
    K = ball.K
    lifts = [base]
    mats = [slope_matrix(base)]
    for step, target in enumerate(qpath[1:], 1):
        h = mats[-1]
        found = None
        for k in _fan_order(K):
            cand = mat_mul(h, mat_mul(mat_pow((1, 1, 0, 1), k), (0, -1, 1, 0)))
            y = mat_apply(cand, INFINITY)
            if ball.vertex_of_slope(y) == target:
                found = (y, cand)
                break
        if found is None:
            raise LiftFailure(f"no adjacent lift at step {step} of {qpath}")
        lifts.append(found[0])
        mats.append(found[1])
    return lifts, mats


def _fan_order(K: int) -> list[int]:
    """All residues mod K by increasing absolute value: fan exponents j
    and j + mK lift to the same neighbouring coset, so the smallest |j|
    keeps lifted configurations compact."""
    out = [0]
    step = 1
    while len(out) < K:
        out.append(step)
        if len(out) < K:
            out.append(-step)
        step += 1
    return out


@dataclass
class LiftedPolygon:
    sides: list[list[Slope]]
    defect_initial: Mat
    steps: list[ShorteningStep] = field(default_factory=list)
    pivots_located: list[tuple[int, int]] = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return all(a[-1] == b[0] for a, b in
                   zip(self.sides, self.sides[1:] + self.sides[:1]))

    def to_json(self) -> dict:
        return {
            "schema": "lifted-polygon/1",
            "sides": [[slope_str(v) for v in side] for side in self.sides],
            "defect_initial": list(self.defect_initial),
            "steps": [s.to_json() for s in self.steps],
            "pivots_located": [list(p) for p in self.pivots_located],
            "closed": self.closed,
        }


def coset_defect(ball: QuotientBall, g_end: Mat, g_start: Mat) -> Mat:
    """The kernel element n with n * (g_start inf) = g_end inf, given that
    both matrices project to the same coset vertex."""
    rs = ball.rs
    K = ball.K
    w = rs.reduce_word(genword_to_string(
        rs, matrix_to_word(mat_inv(g_end)) + matrix_to_word(g_start)))
    for eps in (0, 1):
        for k in range(K):
            if rs.reduce_word("SS" * eps + T_WORD * k) == w:
                sign = 1 if eps == 0 else -1
                u = mat_pow((1, 1, 0, 1), k)
                if sign < 0:
                    u = (-u[0], -u[1], -u[2], -u[3])
                n = mat_mul(mat_mul(g_end, u), mat_inv(g_start))
                return n
    raise LiftFailure("endpoints do not lie in the same coset")


def lift_polygon(ball: QuotientBall, sides: list[list[int]],
                 ledger: ConstantsLedger, budget: int = 64) -> LiftedPolygon:
    """Lift a geodesic polygon (3 or 4 certified sides forming a cycle).

    Sides are lifted in sequence; the closure defect is an exact kernel
    matrix.  While it is nontrivial, a shortening pivot is located on the
    current concatenation and its rotation is applied to everything after
    the pivot's first occurrence, strictly decreasing the engine measure.
    A pivot missing the sides raises PivotNotOnSides with the witness.
    """
    if len(sides) not in (3, 4):
        raise ValueError("polygon must have 3 or 4 sides")
    for a, b in zip(sides, sides[1:]):
        if a[-1] != b[0]:
            raise ValueError("sides do not concatenate")
    if sides[-1][-1] != sides[0][0]:
        raise ValueError("sides do not close up in the quotient")

    base = ball.slope_of_vertex(sides[0][0])
    lifted: list[list[Slope]] = []
    mats: list[list[Mat]] = []
    cur = base
    for side in sides:
        ls, ms = lift_path(ball, side, cur)
        lifted.append(ls)
        mats.append(ms)
        cur = ls[-1]

    defect = coset_defect(ball, mats[-1][-1], mats[0][0])
    poly = LiftedPolygon([list(s) for s in lifted], defect)
    x = base
    while defect != IDENTITY:
        if len(poly.steps) >= budget:
            raise PivotNotOnSides(
                f"budget {budget} exhausted with nontrivial defect",
                witness={"defect": list(defect),
                         "steps": [s.to_json() for s in poly.steps]})
        step = _polygon_step(poly, defect, x, ledger)
        s, e, mb, ma, case, angle, pos, move = step
        if move == "suffix":
            _apply_suffix(poly.sides, pos, twist_power(s, e))
        # gauge moves at the two junction corners change no lift at all
        if move == "right":
            defect = mat_mul(defect, twist_power(s, e))
        else:
            defect = mat_mul(twist_power(s, e), defect)
        poly.steps.append(ShorteningStep(s, e, case, angle, mb, ma))
        poly.pivots_located.append(pos)

    if poly.sides[-1][-1] != poly.sides[0][0]:
        raise LiftFailure("trivial defect but polygon failed to close")
    return poly


def _polygon_step(poly: LiftedPolygon, defect: Mat, x: Slope,
                  ledger: ConstantsLedger):
    """One measure-decreasing move with its pivot on the current sides.

    Moves: rotate the suffix after the pivot's first occurrence on the
    sides (the proof's mechanism), or apply a gauge rotation at one of
    the two junction corners -- the defect is only defined modulo
    rotations at the closing corner (left) and the base corner (right),
    neither of which moves any lifted vertex.  Raises PivotNotOnSides
    when nothing on the sides decreases the measure.
    """
    from .words import measure_matrix
    K = ledger.K
    endpoint = poly.sides[-1][-1]
    side_slopes = [v for side in poly.sides for v in side]
    before = measure_matrix(defect, x)
    best = None

    def consider(after, payload):
        nonlocal best
        if after < before and (best is None or after < best[0]):
            best = (after, payload)

    try:
        s, e, mb, ma, case, angle = matrix_pivot_search(
            defect, x, ledger, extra_candidates=side_slopes, restrict=True)
        pos = _locate(poly.sides, s)
        if pos is not None:
            consider(ma, (s, e, mb, case, angle, pos, "suffix"))
    except NoPivotFound:
        pass
    for m in range(-4, 5):
        if m == 0:
            continue
        left = mat_mul(twist_power(endpoint, m * K), defect)
        consider(measure_matrix(left, x),
                 (endpoint, m * K, before, "large-angle", None,
                  _locate(poly.sides, endpoint), "left"))
        right = mat_mul(defect, twist_power(x, m * K))
        consider(measure_matrix(right, x),
                 (x, m * K, before, "large-angle", None,
                  _locate(poly.sides, x), "right"))
    if best is None:
        raise PivotNotOnSides(
            "no measure-decreasing pivot on the sides",
            witness={"defect": list(defect),
                     "sides": [[slope_str(v) for v in sd]
                               for sd in poly.sides]})
    after, (s, e, mb, case, angle, pos, move) = best
    return s, e, mb, after, case, angle, pos, move


def _locate(sides: list[list[Slope]], s: Slope) -> tuple[int, int] | None:
    for i, side in enumerate(sides):
        for j, v in enumerate(side):
            if v == s:
                return (i, j)
    return None


def _apply_suffix(sides: list[list[Slope]], pos: tuple[int, int], rot: Mat):
    i0, j0 = pos
    for i in range(i0, len(sides)):
        start = j0 if i == i0 else 0
        for j in range(start, len(sides[i])):
            if (i, j) == (i0, j0):
                continue  # the pivot itself is fixed by its rotation
            sides[i][j] = mat_apply(rot, sides[i][j])


def project_side(ball: QuotientBall, side: list[Slope]) -> list[int]:
    return [ball.vertex_of_slope(v) for v in side]


# ---------------------------------------------------------------------------
# Thinness audit (shared between the quotient ball and the base graph).
# ---------------------------------------------------------------------------


@dataclass
class ThinnessReport:
    audited: int
    skipped: int
    delta: int
    worst: tuple | None = None

    def to_json(self) -> dict:
        return {"schema": "thinness-report/1", "audited": self.audited,
                "skipped": self.skipped, "delta": self.delta,
                "worst": repr(self.worst)}


def thinness_audit(graph, corners_list: list[tuple]) -> ThinnessReport:
    """Max thinness defect over certified geodesic triangles.

    `graph` provides certified_geodesic(u, v) -> path or None, and
    set_distance(v, targets) -> exact or certified distance from v to a
    vertex set.  Each triangle side must sit within distance delta of
    the union of the other two sides; the report carries the max defect.
    """
    audited = skipped = 0
    delta = 0
    worst = None
    for corners in corners_list:
        a, b, c = corners
        sides = []
        ok = True
        for u, v in ((a, b), (b, c), (c, a)):
            p = graph.certified_geodesic(u, v)
            if p is None:
                ok = False
                break
            sides.append(p)
        if not ok:
            skipped += 1
            continue
        defect = 0
        for i in range(3):
            others = set(sides[(i + 1) % 3]) | set(sides[(i + 2) % 3])
            for v in sides[i]:
                d = graph.set_distance(v, others)
                if d is None:
                    defect = None
                    break
                defect = max(defect, d)
            if defect is None:
                break
        if defect is None:
            skipped += 1
            continue
        audited += 1
        if defect > delta:
            delta = defect
            worst = corners
    return ThinnessReport(audited, skipped, delta, worst)


class BallAuditAdapter:
    """Thinness adapter for a quotient ball, margin-certified."""

    def __init__(self, ball: QuotientBall):
        self.ball = ball
        self._bfs_cache: dict[int, object] = {}

    def _bfs(self, v: int):
        if v not in self._bfs_cache:
            import numpy as np
            self._bfs_cache[v] = np.array(self.ball.bfs_from(v),
                                          dtype=np.int16)
        return self._bfs_cache[v]

    def certified_geodesic(self, u: int, v: int) -> list[int] | None:
        try:
            return self.ball.geodesic(u, v)
        except BallTooSmall:
            return None

    def set_distance(self, v: int, targets: set[int]) -> int | None:
        best = None
        for t in targets:
            d = self._bfs(t)[v]
            if d < 0:
                continue
            if d >= self.ball.exit_bound(v, t):
                continue  # not certified
            if best is None or d < best:
                best = d
        return best

    def sample_corners(self, rng, count: int, max_dist: int) -> list[tuple]:
        pool = [v for v in range(self.ball.vertex_count)
                if self.ball.dist[v] <= max_dist]
        out = []
        for _ in range(count):
            tri = tuple(sorted(rng.sample(pool, 3)))
            out.append(tri)
        return out


class FareyAuditAdapter:
    """Thinness adapter for the base graph restricted to a box.

    Geodesics come from in-box BFS certified against the exact global
    distance; point-to-set distances use the exact distance outright.
    """

    def __init__(self, bound: int):
        from .farey import slopes_in_box, intersection_det
        self.pool = slopes_in_box(bound)
        self.index = {s: i for i, s in enumerate(self.pool)}
        n = len(self.pool)
        self.adj: list[list[int]] = [[] for _ in range(n)]
        import numpy as np
        P = np.array([s[0] for s in self.pool], dtype=np.int64)
        Q = np.array([s[1] for s in self.pool], dtype=np.int64)
        for i in range(n):
            det = np.abs(P[i] * Q - P * Q[i])
            for j in np.nonzero(det == 1)[0]:
                self.adj[i].append(int(j))

    def certified_geodesic(self, u: int, v: int) -> list[int] | None:
        target = farey_distance(self.pool[u], self.pool[v])
        dist = {v: 0}
        dq = deque([v])
        while dq:
            w = dq.popleft()
            if dist[w] >= target:
                continue
            for nb in self.adj[w]:
                if nb not in dist:
                    dist[nb] = dist[w] + 1
                    dq.append(nb)
        if dist.get(u) != target:
            return None  # the box misses every global geodesic
        path = [u]
        cur = u
        while cur != v:
            cur = min(nb for nb in self.adj[cur] if dist.get(nb) == dist[cur] - 1)
            path.append(cur)
        return path

    def set_distance(self, v: int, targets: set[int]) -> int:
        sv = self.pool[v]
        return min(farey_distance(sv, self.pool[t]) for t in targets)

    def sample_corners(self, rng, count: int, max_index: int | None = None
                       ) -> list[tuple]:
        out = []
        for _ in range(count):
            out.append(tuple(sorted(rng.sample(range(len(self.pool)), 3))))
        return out


# ---------------------------------------------------------------------------
# Projection and survival probes.
# ---------------------------------------------------------------------------


def hypothesis_margin(x: Slope, y: Slope, ledger: ConstantsLedger) -> tuple[int, bool]:
    """Largest projection between x and y vs the tenth of the rotation
    control; the small-projection hypothesis of the isometric-projection
    statements."""
    if x == y:
        return 0, True
    worst = 0
    for s in geodesic_corridor(x, y):
        if s in (x, y):
            continue
        worst = max(worst, fan_separation(s, x, y))
    return worst, 10 * worst < ledger.ThetaRot


def project_isometry_check(ball: QuotientBall, x: Slope, y: Slope,
                           ledger: ConstantsLedger) -> dict:
    """Compare the certified quotient distance with the exact base
    distance.  The hypothesis flag reports whether the small-projection
    premise held; a failed premise is a report, not an error."""
    worst, hyp = hypothesis_margin(x, y, ledger)
    u = ball.vertex_of_slope(x)
    v = ball.vertex_of_slope(y)
    if u is None or v is None:
        raise BallTooSmall(f"{x} or {y} falls outside the ball")
    dq = ball.certified_distance(u, v)
    df = farey_distance(x, y)
    return {
        "x": slope_str(x), "y": slope_str(y),
        "max_projection": worst, "hypothesis_holds": hyp,
        "quotient_distance": dq, "base_distance": df,
        "isometric": dq == df, "lipschitz": dq <= df,
    }


def loxodromic_survival(ball: QuotientBall, g: Mat, n_max: int,
                        ledger: ConstantsLedger) -> dict:
    """Orbit displacements of the image of g in the quotient.

    Reports the certified quotient displacement sequence next to the
    base one, the min increment (the desk-scale lower bound on stable
    translation length: positive increments on the whole horizon rule
    out a bounded orbit at this scale) and the subadditive upper bound.
    """
    x0 = INFINITY
    rows = []
    for n in range(1, n_max + 1):
        z = mat_apply(mat_pow(g, n), x0)
        if z == x0:
            rows.append({"n": n, "base": 0, "quotient": 0, "isometric": True})
            continue
        u = ball.vertex_of_slope(x0)
        v = ball.vertex_of_slope(z)
        if v is None:
            raise BallTooSmall(f"orbit point {z} at n={n} left the ball")
        dq = ball.certified_distance(u, v)
        rows.append({"n": n, "base": farey_distance(x0, z), "quotient": dq,
                     "isometric": dq == farey_distance(x0, z)})
    seq = [r["quotient"] for r in rows]
    increments = [seq[0]] + [b - a for a, b in zip(seq, seq[1:])]
    tau_lower = min(increments) if increments else 0
    tau_upper = min((d / (i + 1) for i, d in enumerate(seq)), default=0)
    bounded = seq and max(seq) == 0
    return {
        "element": list(g), "rows": rows,
        "translation_length_lower": tau_lower,
        "translation_length_upper": tau_upper,
        "bounded_orbit": bool(bounded),
        "loxodromic_at_scale": tau_lower > 0,
    }


def nonelementary_probe(ball: QuotientBall, ga: Mat, gb: Mat, n_max: int,
                        ledger: ConstantsLedger) -> dict:
    """Isometric embedding of the joint orbit sample of two loxodromics.

    When the projection restricted to both orbits is isometric, the
    images stay independent loxodromics, which is the non-elementarity
    mechanism at desk scale.  n_max = 0 is reported as untested.
    """
    if n_max == 0:
        return {"tested": False, "isometric": None, "pairs": 0}
    x0 = INFINITY
    require_loxodromic(ga, x0, max(4, n_max))
    require_loxodromic(gb, x0, max(4, n_max))
    orbit_a = {n: mat_apply(mat_pow(ga, n), x0) for n in range(-n_max, n_max + 1)}
    orbit_b = {n: mat_apply(mat_pow(gb, n), x0) for n in range(-n_max, n_max + 1)}
    pairs = 0
    worst = None
    isometric = True
    for na, u in sorted(orbit_a.items()):
        for nb, v in sorted(orbit_b.items()):
            pu = ball.vertex_of_slope(u)
            pv = ball.vertex_of_slope(v)
            if pu is None or pv is None:
                raise BallTooSmall(f"joint orbit point outside ball "
                                   f"(n_a={na}, n_b={nb})")
            dq = ball.certified_distance(pu, pv)
            df = farey_distance(u, v)
            pairs += 1
            if dq != df:
                isometric = False
                worst = (na, nb, dq, df)
    return {"tested": True, "isometric": isometric, "pairs": pairs,
            "witness": worst,
            "independent": isometric and orbit_a[n_max] != orbit_b[n_max]}


def stabiliser_order_check(ball: QuotientBall) -> dict:
    """The base vertex stabiliser contains the twist image of order
    exactly K (oracle check), matching the finite-stabiliser picture."""
    rs = ball.rs
    K = ball.K
    orders = [j for j in range(1, 4 * K + 1)
              if rs.reduce_word(T_WORD * j) == ""]
    order_T = orders[0] if orders else 0
    central = rs.reduce_word("SS")
    return {"twist_order": order_T, "twist_order_is_K": order_T == K,
            "central_nontrivial": central != ""}
