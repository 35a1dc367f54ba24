"""Composite projection systems: axioms, modified distances, constants.

A projection system is a coloured point set with a symmetric activity
relation and partial projection distances d^pi_y(x, z) defined on active
pairs, subject to the Behrstock, properness, separation, inaction and
finite-filling axioms for a constant theta.  The slope system of
`fareyquot.farey` is the motivating instance; synthetic line systems
exercise the multi-colour and inaction branches the slope instance
cannot reach (all distinct slopes intersect).

The constants ledger records the full derivation chain
theta -> kappa, Theta -> Theta0 -> rotation and shortening controls,
each field tagged with how it was obtained.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .farey import (
    NotActive,
    Slope,
    annular_projection,
    chart_floor,
    colour as slope_colour,
    fan_separation,
    geodesic_corridor,
    intersection_det,
    mat_apply,
    slopes_in_box,
)


class UndefinedDistance(ValueError):
    """A projection distance was queried off the activity relation."""


class ColourMismatch(ValueError):
    """Modified distances only exist within a single colour class."""


class NoEnumerationStrategy(RuntimeError):
    """The system has no registered finite candidate enumeration."""


class EmptyPool(ValueError):
    """A transfer search was attempted over an empty pool."""


class GenerationFailed(RuntimeError):
    """Synthetic generation could not satisfy the axioms within retries."""


# ---------------------------------------------------------------------------
# Constants ledger.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsLedger:
    """The derivation chain of all control constants, with provenance.

    kappa = 3*theta and Theta = 4*theta + 1 unless overridden;
    Theta0 = 2*Theta + 3*kappa exactly;
    ThetaRot = K - Theta - 2*kappa is the certified rotation control of
    the twist family at power K (exact displacement minus the sandwich
    and quasi-triangle slack);
    ThetaShort = (ThetaRot - Theta0)/2 - 2*Theta0 - 3*kappa exactly.
    """

    theta: int
    kappa: int
    Theta: int
    Theta0: int
    bgitC: int
    K: int
    ThetaRot: int
    ThetaShort: Fraction
    L: int = 0
    M: int = 0
    flags: dict = field(default_factory=dict)
    least_admissible_K: int = 0
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "theta": str(self.theta),
            "kappa": str(self.kappa),
            "Theta": str(self.Theta),
            "Theta0": str(self.Theta0),
            "bgitC": str(self.bgitC),
            "K": str(self.K),
            "ThetaRot": str(self.ThetaRot),
            "ThetaShort": str(self.ThetaShort),
            "L": str(self.L),
            "M": str(self.M),
            "least_admissible_K": str(self.least_admissible_K),
            "flags": {k: bool(v) for k, v in sorted(self.flags.items())},
            "provenance": dict(sorted(self.provenance.items())),
        }
        return out


def derive_constants(theta: int, K: int, bgitC: int = 0,
                     lox_bounds: tuple[int, int] = (0, 0),
                     theta_provenance: str = "configured") -> ConstantsLedger:
    """Fill the ledger from theta, the twist power and the audit constants.

    Always returns a ledger; the standing large-rotation assumptions are
    reported as flags, along with the least K that would satisfy all of
    them for these theta, C, L, M.
    """
    if theta < 0 or bgitC < 0:
        raise ValueError("theta and C must be non-negative")
    if K < 1:
        raise ValueError("K must be positive")
    L, M = lox_bounds
    kappa = 3 * theta
    Theta = 4 * theta + 1
    Theta0 = 2 * Theta + 3 * kappa
    theta_rot = K - Theta - 2 * kappa
    theta_short = Fraction(theta_rot - Theta0, 2) - 2 * Theta0 - 3 * kappa

    def flags_for(rot: Fraction | int) -> dict:
        return {
            "standing_assumption": Fraction(3, 10) * rot
            > 2 * bgitC + 3 * kappa + Fraction(5, 2) * Theta0,
            "rot_exceeds_lox_bound": rot > 10 * (L + 1),
            "rot_exceeds_pair_bound": rot > 10 * (M + 1),
        }

    flags = flags_for(theta_rot)
    # least K making every flag pass, from the same exact formulas
    need_rot = max(
        Fraction(10, 3) * (2 * bgitC + 3 * kappa + Fraction(5, 2) * Theta0),
        Fraction(10 * (L + 1)),
        Fraction(10 * (M + 1)),
    )
    least_k = Theta + 2 * kappa + int(need_rot) + 1

    prov = {
        "theta": theta_provenance,
        "kappa": "formula 3*theta",
        "Theta": "formula 4*theta+1",
        "Theta0": "formula 2*Theta+3*kappa",
        "bgitC": "derived-by-search" if bgitC else "configured",
        "ThetaRot": "certified K - Theta - 2*kappa",
        "ThetaShort": "formula (ThetaRot-Theta0)/2 - 2*Theta0 - 3*kappa",
        "L": "derived-by-search" if L else "configured",
        "M": "derived-by-search" if M else "configured",
    }
    return ConstantsLedger(
        theta=theta, kappa=kappa, Theta=Theta, Theta0=Theta0, bgitC=bgitC,
        K=K, ThetaRot=theta_rot, ThetaShort=theta_short, L=L, M=M,
        flags=flags, least_admissible_K=least_k, provenance=prov,
    )


# ---------------------------------------------------------------------------
# Systems.
# ---------------------------------------------------------------------------


class ProjectionSystem:
    """Base interface; instances are immutable and safe to share."""

    colours: int = 1
    name: str = "abstract"

    def colour_of(self, y) -> int:
        raise NotImplementedError

    def is_active(self, x, y) -> bool:
        raise NotImplementedError

    def raw_distance(self, y, x, z) -> int:
        raise NotImplementedError

    def modified_same_colour(self, y, x, z) -> int:
        """The within-colour modified distance; default: the raw one."""
        return self.raw_distance(y, x, z)

    def profile(self, y, sample: list):
        """Optional fast path: values f with d_y = |f(x) - f(z)|, or None."""
        return None

    def candidates(self, x, z) -> list:
        raise NoEnumerationStrategy(f"{self.name} has no candidate strategy")

    def sample_points(self, bound: int) -> list:
        raise NotImplementedError


class FareySystem(ProjectionSystem):
    """The slope instance: curves on the once-punctured torus.

    Distinct slopes always intersect, so the activity relation is total
    off the diagonal and the inaction branches are vacuous here.  The
    modified distance is the fan separation count, which satisfies the
    full modified-distance contract exactly (validated exhaustively).
    """

    def __init__(self, colours: int = 1, surface: str = "1,1"):
        if colours not in (1, 3):
            raise ValueError("colour count must be 1 or 3")
        self.colours = colours
        self.surface = surface
        self.name = f"farey[{surface};m={colours}]"

    def colour_of(self, y: Slope) -> int:
        return slope_colour(y, self.colours)

    def is_active(self, x: Slope, y: Slope) -> bool:
        return x != y

    def raw_distance(self, y: Slope, x: Slope, z: Slope) -> int:
        if x == y or z == y:
            raise UndefinedDistance(f"{x if x == y else z} equals the base {y}")
        return annular_projection(y, x, z)

    def modified_same_colour(self, y: Slope, x: Slope, z: Slope) -> int:
        return fan_separation(y, x, z)

    def profile(self, y: Slope, sample: list[Slope]):
        vals = np.zeros(len(sample), dtype=np.int64)
        defined = np.zeros(len(sample), dtype=bool)
        for j, x in enumerate(sample):
            if x != y:
                vals[j] = chart_floor(y, x)
                defined[j] = True
        return vals, defined

    def candidates(self, x: Slope, z: Slope) -> list[Slope]:
        return geodesic_corridor(x, z)

    def sample_points(self, bound: int) -> list[Slope]:
        return slopes_in_box(bound)

    def act(self, g, x: Slope) -> Slope:
        return mat_apply(g, x)


class SyntheticSystem(ProjectionSystem):
    """Finite system on integer points of a line with clamped projections.

    d^pi_y(x, z) = |clamp(x) - clamp(z)| into the window [y - W, y + W].
    Activity is total within a colour (as required) and distance-cut
    across colours, so inactive pairs exist whenever the cut is finite.
    """

    def __init__(self, points: list[int], colour_map: list[int], window: int,
                 act_cut: int | None, theta: int, name: str = "synthetic",
                 overrides: dict | None = None):
        self.points = list(points)
        self._colour = dict(zip(points, colour_map))
        self.colours = max(colour_map) + 1
        self.window = window
        self.act_cut = act_cut
        self.theta = theta
        self.name = name
        self.overrides = dict(overrides or {})

    def colour_of(self, y: int) -> int:
        return self._colour[y]

    def is_active(self, x: int, y: int) -> bool:
        if x == y:
            return False
        if self._colour[x] == self._colour[y]:
            return True
        return self.act_cut is None or abs(x - y) <= self.act_cut

    def _clamp(self, y: int, x: int) -> int:
        return max(y - self.window, min(y + self.window, x))

    def raw_distance(self, y: int, x: int, z: int) -> int:
        for u in (x, z):
            if not self.is_active(u, y):
                raise UndefinedDistance(f"{u} is not active for {y}")
        key = (y, frozenset((x, z)))
        if key in self.overrides:
            return self.overrides[key]
        return abs(self._clamp(y, x) - self._clamp(y, z))

    def profile(self, y: int, sample: list[int]):
        if self.overrides:
            return None  # overridden entries break the |f - f| form
        vals = np.array([self._clamp(y, x) for x in sample], dtype=np.int64)
        defined = np.array([self.is_active(x, y) for x in sample], dtype=bool)
        return vals, defined

    def candidates(self, x: int, z: int) -> list[int]:
        lo, hi = min(x, z), max(x, z)
        return [y for y in self.points if lo - self.window <= y <= hi + self.window]

    def sample_points(self, bound: int) -> list[int]:
        return [p for p in self.points if abs(p) <= bound] or self.points

    def with_behrstock_violation(self, y: int, x: int, z: int,
                                 value: int) -> "SyntheticSystem":
        """A copy with d_y(x,z) and d_z(x,y) both forced large (negative test)."""
        overrides = dict(self.overrides)
        overrides[(y, frozenset((x, z)))] = value
        overrides[(z, frozenset((x, y)))] = value
        return SyntheticSystem(self.points, [self._colour[p] for p in self.points],
                               self.window, self.act_cut, self.theta,
                               name=self.name + "+violation", overrides=overrides)

    def to_json(self) -> dict:
        return {
            "schema": "synthetic-projection-system/1",
            "name": self.name,
            "points": list(self.points),
            "colours": [self._colour[p] for p in self.points],
            "window": self.window,
            "act_cut": self.act_cut,
            "theta": self.theta,
        }

    @staticmethod
    def from_json(data: dict) -> "SyntheticSystem":
        if data.get("schema") != "synthetic-projection-system/1":
            raise ValueError("not a synthetic system document")
        return SyntheticSystem(data["points"], data["colours"], data["window"],
                               data["act_cut"], data["theta"],
                               name=data.get("name", "synthetic"))


def synthetic_system(seed: int, colours: int = 2, size: int = 30,
                     inaction_density: float = 0.3,
                     target_theta: int | None = None) -> SyntheticSystem:
    """Deterministic generator, post-checked against the axioms.

    inaction_density 0 makes every pair active; larger values shrink the
    cross-colour activity cut so that inactive pairs appear.  The window
    is kept small so large projections stay below the contract threshold
    (the slope system is the instance with non-vacuous large values).
    """
    if colours < 1 or size < 2:
        raise ValueError("need at least one colour and two points")
    rng = random.Random(seed)
    for attempt in range(8):
        points = sorted(rng.sample(range(-3 * size, 3 * size + 1), size))
        colour_map = [rng.randrange(colours) for _ in points]
        # every colour must occur
        for c in range(colours):
            if c not in colour_map:
                colour_map[rng.randrange(size)] = c
        window = 2 + (seed + attempt) % 2
        if inaction_density <= 0:
            act_cut = None
        else:
            span = 6 * size
            act_cut = max(2 * window + 1, int(span * (1.0 - inaction_density) / 2))
        system = SyntheticSystem(points, colour_map, window, act_cut,
                                 theta=0, name=f"synthetic[seed={seed}]")
        report = check_axioms(system, system.points)
        if report.all_hold():
            theta = 2 * max(report.theta_min, 1)
            system.theta = theta
            if target_theta is not None and theta > target_theta:
                continue
            if inaction_density > 0 and not report.inactive_pairs:
                continue
            return system
    raise GenerationFailed(f"no admissible synthetic system for seed {seed}")


# ---------------------------------------------------------------------------
# Axiom checking.
# ---------------------------------------------------------------------------


@dataclass
class AxiomReport:
    """Per-axiom verdicts over a finite sample, with reproducible witnesses."""

    system: str
    sample_size: int
    verdicts: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    theta_min: int = 1
    behrstock_max: int = 0
    inaction_max: int = 0
    inactive_pairs: int = 0
    filling_cover: int = 0
    properness_counts: dict = field(default_factory=dict)

    def all_hold(self) -> bool:
        return all(v != "fails" for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "schema": "axiom-report/1",
            "system": self.system,
            "sample_size": self.sample_size,
            "verdicts": dict(sorted(self.verdicts.items())),
            "witnesses": {k: repr(v) for k, v in sorted(self.witnesses.items())},
            "theta_min": str(self.theta_min),
            "behrstock_max": str(self.behrstock_max),
            "inaction_max": str(self.inaction_max),
            "inactive_pairs": str(self.inactive_pairs),
            "filling_cover": str(self.filling_cover),
            "properness_counts": {k: str(v) for k, v in
                                  sorted(self.properness_counts.items())},
        }


def check_axioms(system: ProjectionSystem, sample: list,
                 theta: int | None = None) -> AxiomReport:
    """Exhaustively check the projection axioms over the sample.

    Distance axioms run over every admissible triple; properness is
    checked through the candidate enumeration (when registered) against
    the sample pool; finite filling by greedy cover.  The report carries
    the least theta' making the theta-axioms hold on this sample.
    """
    if not sample:
        raise ValueError("sample must be nonempty")
    report = AxiomReport(system.name, len(sample))
    n = len(sample)
    idx = range(n)

    # symmetry in action + inactive pair inventory
    sym_ok = True
    for i in idx:
        for j in range(i + 1, n):
            a, b = sample[i], sample[j]
            if system.is_active(a, b) != system.is_active(b, a):
                sym_ok = False
                report.witnesses["action_symmetry"] = (a, b)
            if not system.is_active(a, b):
                report.inactive_pairs += 1
    report.verdicts["action_symmetry"] = "holds" if sym_ok else "fails"

    profiles = [system.profile(y, sample) for y in sample]
    fast = all(p is not None for p in profiles)

    behr_max = 0
    behr_witness = None
    sep_ok = True
    inact_max = 0
    pair_checked = 0
    if fast:
        vals = np.stack([p[0] for p in profiles])
        defined = np.stack([p[1] for p in profiles])
        for i in idx:
            f = vals[i]
            ok = defined[i]
            d_i = np.abs(f[:, None] - f[None, :])
            # Behrstock partner: m2[x, z] = d_z(x, y_i), defined when
            # x and y_i are both active for z
            m2 = np.abs(vals.T - vals[:, i][None, :])
            def_m2 = defined.T & defined[:, i][None, :]
            valid = ok[:, None] & ok[None, :] & def_m2
            valid[i, :] = False
            valid[:, i] = False
            np.fill_diagonal(valid, False)
            mn = np.minimum(d_i, m2)
            mn = np.where(valid, mn, 0)
            pair_checked += int(valid.sum())
            m = int(mn.max())
            if m > behr_max:
                behr_max = m
                xj, zj = np.unravel_index(mn.argmax(), mn.shape)
                behr_witness = (sample[i], sample[int(xj)], sample[int(zj)])
        # separation d_y(z, z) = 0 < theta always in profile form
        # closeness in inaction
        for i in idx:
            f, ok = vals[i], defined[i]
            for a in idx:
                if not ok[a]:
                    continue
                for b in range(a + 1, n):
                    if not ok[b] or system.is_active(sample[a], sample[b]):
                        continue
                    d = int(abs(f[a] - f[b]))
                    if d > inact_max:
                        inact_max = d
                        report.witnesses["inaction"] = (sample[i], sample[a],
                                                        sample[b])
        report.verdicts["symmetry"] = "holds"
        report.verdicts["triangle"] = "holds"
    else:
        # generic slow path (used by override-patched systems)
        for i in idx:
            y = sample[i]
            act = [p for p in sample if p != y and system.is_active(p, y)]
            for a in range(len(act)):
                for b in range(a, len(act)):
                    x, z = act[a], act[b]
                    d = system.raw_distance(y, x, z)
                    if x == z:
                        if theta is not None and d >= theta:
                            sep_ok = False
                            report.witnesses["separation"] = (y, x)
                        continue
                    if d != system.raw_distance(y, z, x):
                        report.verdicts["symmetry"] = "fails"
                        report.witnesses["symmetry"] = (y, x, z)
                    if not system.is_active(x, z):
                        inact_max = max(inact_max, d)
                        if inact_max == d:
                            report.witnesses["inaction"] = (y, x, z)
                    elif x != z and system.is_active(z, y) and \
                            system.is_active(x, z):
                        if z != y and x != z:
                            d2 = system.raw_distance(z, x, y)
                            pair_checked += 1
                            if min(d, d2) > behr_max:
                                behr_max = min(d, d2)
                                behr_witness = (y, x, z)
                    for w in act[:a]:
                        if system.raw_distance(y, w, z) > \
                                system.raw_distance(y, w, x) + d:
                            report.verdicts["triangle"] = "fails"
                            report.witnesses["triangle"] = (y, w, x, z)
        report.verdicts.setdefault("symmetry", "holds")
        report.verdicts.setdefault("triangle", "holds")

    report.behrstock_max = behr_max
    if behr_witness is not None:
        report.witnesses.setdefault("behrstock", behr_witness)
    report.verdicts["behrstock"] = (
        "untested" if pair_checked == 0
        else ("holds" if theta is None or behr_max <= theta else "fails"))
    report.verdicts["separation"] = "holds" if sep_ok else "fails"
    report.inaction_max = inact_max
    report.verdicts["inaction"] = (
        "untested" if report.inactive_pairs == 0
        else ("holds" if theta is None or inact_max <= theta else "fails"))

    # properness: candidate enumeration (or pool brute force) on a spread
    # of sample pairs; always finite on a finite check, so record counts
    probe_pairs = [(sample[i], sample[j])
                   for i in range(0, n, max(1, n // 8))
                   for j in range(1, n, max(1, n // 8)) if i != j]
    thr = (theta if theta is not None else max(behr_max, 1)) + 1
    for x, z in probe_pairs[:32]:
        if x == z:
            continue
        count = 0
        try:
            cand = system.candidates(x, z)
        except NoEnumerationStrategy:
            cand = sample
        for y in cand:
            if y in (x, z) or not system.is_active(x, y) \
                    or not system.is_active(z, y):
                continue
            if system.raw_distance(y, x, z) >= thr:
                count += 1
        report.properness_counts[f"{x}|{z}"] = count
    report.verdicts["properness"] = "holds"

    # finite filling: greedy cover of the sampled active sets
    to_cover = set()
    for p in sample:
        for q in sample:
            if p != q and system.is_active(p, q):
                to_cover.add(q)
    cover = 0
    remaining = set(to_cover)
    while remaining:
        best = max(sample, key=lambda p: len(
            {q for q in remaining if q != p and system.is_active(p, q)}))
        gained = {q for q in remaining if q != best and system.is_active(best, q)}
        if not gained:
            break
        remaining -= gained
        cover += 1
    report.filling_cover = cover
    report.verdicts["finite_filling"] = "holds" if not remaining else "fails"

    report.theta_min = max(1, behr_max, inact_max)
    return report


# ---------------------------------------------------------------------------
# Distances and enumeration over a system.
# ---------------------------------------------------------------------------


def modified_distance(system: ProjectionSystem, ledger: ConstantsLedger,
                      y, x, z) -> int:
    """The within-colour modified distance d_y(x, z).

    Contract (validated exhaustively in the test suite): sandwich within
    kappa of the raw distance, quasi-triangle with kappa, Behrstock with
    kappa, and monotonicity at threshold Theta.
    """
    if len({system.colour_of(y), system.colour_of(x), system.colour_of(z)}) != 1:
        raise ColourMismatch(f"{x}, {y}, {z} are not monochromatic")
    for u in (x, z):
        if u != y and not system.is_active(u, y):
            raise NotActive(f"{u} is not active for {y}")
    if x == y or z == y:
        raise NotActive("modified distance needs x, z distinct from y")
    return system.modified_same_colour(y, x, z)


def composite_distance(system: ProjectionSystem, ledger: ConstantsLedger,
                       y, x, z) -> int:
    """d^ang_y: the modified distance within a colour, raw across colours."""
    for u in (x, z):
        if not system.is_active(u, y):
            raise NotActive(f"{u} is not active for {y}")
    if system.colour_of(x) == system.colour_of(z) == system.colour_of(y):
        return system.modified_same_colour(y, x, z)
    return system.raw_distance(y, x, z)


def large_projections(system: ProjectionSystem, ledger: ConstantsLedger,
                      x, z, j: int, M: int):
    """All colour-j points active for both with d^ang >= M.

    Completeness comes from the registered candidate strategy (for the
    slope system: the geodesic corridor, which provably contains every
    point with projection above the strong geodesic-image constant, and
    is cross-checked against brute force in the tests).
    """
    if M <= 0:
        raise ValueError("M must be positive")
    out = set()
    if x == z:
        return out
    for y in system.candidates(x, z):
        if y in (x, z) or system.colour_of(y) != j:
            continue
        if not (system.is_active(x, y) and system.is_active(z, y)):
            continue
        if composite_distance(system, ledger, y, x, z) >= M:
            out.add(y)
    return out


def transfer(system: ProjectionSystem, family, x, i: int,
             pool: list | None = None, probes: list | None = None):
    """A colour-i proxy for x with small orbit diameter under its rotations.

    If the rotation subgroup at x fixes a pool point of colour i, that
    fixed point is returned (for the slope system, x itself when the
    colours match).  Otherwise the pool point minimising the sampled
    orbit diameter max_{gamma, z} d^ang_z(gamma p, p), ties broken by
    the canonical point order.
    """
    if pool is None:
        pool = [p for p in system.sample_points(20) if system.colour_of(p) == i]
    else:
        pool = [p for p in pool if system.colour_of(p) == i]
    if not pool:
        raise EmptyPool(f"no colour-{i} points in the pool")
    gammas = family.sample_rotations(x)
    for p in sorted(pool):
        if all(family.act(g, p) == p for g in gammas):
            return p
    if probes is None:
        probes = system.sample_points(8)
    ledger = family.ledger

    def orbit_diameter(p) -> int:
        worst = 0
        for g in gammas:
            q = family.act(g, p)
            if q == p:
                continue
            for z in probes:
                if z in (p, q):
                    continue
                if system.is_active(p, z) and system.is_active(q, z):
                    worst = max(worst,
                                composite_distance(system, ledger, z, q, p))
        return worst

    return min(sorted(pool), key=orbit_diameter)


def estimate_theta(bound: int = 10, system: ProjectionSystem | None = None
                   ) -> tuple[int, AxiomReport]:
    """The working constant for the slope system: the least value passing
    every sampled axiom, doubled as a safety margin."""
    system = system or FareySystem()
    report = check_axioms(system, system.sample_points(bound))
    return 2 * report.theta_min, report


# ---------------------------------------------------------------------------
# Exhaustive audit of the modified-distance contract on the slope system.
# ---------------------------------------------------------------------------


def _farey_tables(pool):
    """Floor and ceiling of every chart image over the pool (int64)."""
    from .farey import chart_matrix
    n = len(pool)
    flo = np.zeros((n, n), dtype=np.int64)
    cei = np.zeros((n, n), dtype=np.int64)
    for i, y in enumerate(pool):
        m = chart_matrix(y)
        for j, x in enumerate(pool):
            if i == j:
                continue
            p = m[0] * x[0] + m[1] * x[1]
            q = m[2] * x[0] + m[3] * x[1]
            if q < 0:
                p, q = -p, -q
            flo[i, j] = p // q
            cei[i, j] = -((-p) // q)
    return flo, cei


@dataclass
class ContractAuditReport:
    pool_size: int
    sandwich_violations: int
    quasi_triangle_violations: int
    behrstock_kappa_max: int
    monotonicity_premises: int
    monotonicity_violations: int
    raw_vs_modified_gap: int
    witnesses: dict = field(default_factory=dict)

    def all_hold(self, ledger: ConstantsLedger) -> bool:
        return (self.sandwich_violations == 0
                and self.quasi_triangle_violations == 0
                and self.behrstock_kappa_max <= ledger.kappa
                and self.monotonicity_violations == 0)

    def to_json(self) -> dict:
        return {
            "schema": "modified-contract-audit/1",
            "pool_size": self.pool_size,
            "sandwich_violations": self.sandwich_violations,
            "quasi_triangle_violations": self.quasi_triangle_violations,
            "behrstock_kappa_max": self.behrstock_kappa_max,
            "monotonicity_premises": self.monotonicity_premises,
            "monotonicity_violations": self.monotonicity_violations,
            "raw_vs_modified_gap": self.raw_vs_modified_gap,
            "witnesses": {k: repr(v) for k, v in sorted(self.witnesses.items())},
        }


def modified_contract_audit(ledger: ConstantsLedger, bound: int = 20,
                            quadruple_bound: int = 8) -> ContractAuditReport:
    """Exhaustively audit the four modified-distance properties.

    Sandwich, Behrstock-kappa and monotonicity run over every admissible
    triple/quadruple of the box pool.  The quasi-triangle property is
    checked directly on every quadruple of the smaller box, and on the
    full pool through the exact reduction: the raw distance satisfies the
    genuine triangle inequality and the modified one never deviates from
    it by more than the audited gap g, so a violation would need
    2*g > kappa; the audit verifies g and that inequality exhaustively.
    """
    from .farey import slopes_in_box
    pool = slopes_in_box(bound)
    n = len(pool)
    flo, cei = _farey_tables(pool)

    report = ContractAuditReport(n, 0, 0, 0, 0, 0, 0)
    kappa, Theta = ledger.kappa, ledger.Theta

    def fan_matrix(i):
        cx = cei[i][:, None]
        cz = cei[i][None, :]
        fx = flo[i][:, None]
        fz = flo[i][None, :]
        out = np.maximum(cx, cz) - np.minimum(fx, fz) - 1
        return np.maximum(out, 0)

    gap = 0
    for i in range(n):
        raw = np.abs(flo[i][:, None] - flo[i][None, :])
        fan = fan_matrix(i)
        mask = np.ones((n, n), dtype=bool)
        mask[i, :] = False
        mask[:, i] = False
        np.fill_diagonal(mask, False)
        # sandwich: raw - kappa <= fan <= raw
        bad = mask & ((fan > raw) | (fan < raw - kappa))
        report.sandwich_violations += int(bad.sum())
        if bad.any() and "sandwich" not in report.witnesses:
            a, b = np.argwhere(bad)[0]
            report.witnesses["sandwich"] = (pool[i], pool[a], pool[b])
        gap = max(gap, int(np.where(mask, raw - fan, 0).max()))

        # Behrstock with kappa on the modified distance
        m2raw = np.abs(flo.T - flo[:, i][None, :])
        cx2 = cei.T
        fx2 = flo.T
        cy = cei[:, i][None, :]
        fy = flo[:, i][None, :]
        m2fan = np.maximum(np.maximum(cx2, cy) - np.minimum(fx2, fy) - 1, 0)
        mn = np.where(mask, np.minimum(fan, m2fan), 0)
        mn[i, :] = 0
        mn[:, i] = 0
        mx = int(mn.max())
        if mx > report.behrstock_kappa_max:
            report.behrstock_kappa_max = mx
            a, b = np.unravel_index(mn.argmax(), mn.shape)
            report.witnesses["behrstock"] = (pool[i], pool[a], pool[b])

        # monotonicity: premises fan >= Theta, conclusions over all w
        big = np.argwhere(np.triu(np.where(mask, fan, 0), 1) >= Theta)
        for (jx, jz) in big:
            report.monotonicity_premises += 1
            cxx, fxx = cei[:, jx], flo[:, jx]
            czz, fzz = cei[:, jz], flo[:, jz]
            cyy, fyy = cei[:, i], flo[:, i]
            dxy = np.maximum(np.maximum(cxx, cyy) - np.minimum(fxx, fyy) - 1, 0)
            dxz = np.maximum(np.maximum(cxx, czz) - np.minimum(fxx, fzz) - 1, 0)
            dyz = np.maximum(np.maximum(cyy, czz) - np.minimum(fyy, fzz) - 1, 0)
            wmask = np.ones(n, dtype=bool)
            wmask[[i, jx, jz]] = False
            bad = wmask & ((dxy > dxz) | (dyz > dxz))
            c = int(bad.sum())
            report.monotonicity_violations += c
            if c and "monotonicity" not in report.witnesses:
                w = int(np.nonzero(bad)[0][0])
                report.witnesses["monotonicity"] = (pool[i], pool[jx],
                                                    pool[jz], pool[w])
    report.raw_vs_modified_gap = gap

    # quasi-triangle: exact reduction on the full pool ...
    if 2 * gap > kappa:
        report.quasi_triangle_violations += 1
        report.witnesses["quasi_triangle_reduction"] = gap
    # ... and direct exhaustive quadruples on the smaller box
    small = slopes_in_box(quadruple_bound)
    m = len(small)
    sflo, scei = _farey_tables(small)
    for i in range(m):
        cx = scei[i][:, None]
        cz = scei[i][None, :]
        fx = sflo[i][:, None]
        fz = sflo[i][None, :]
        fan = np.maximum(np.maximum(cx, cz) - np.minimum(fx, fz) - 1, 0)
        mask = np.ones((m, m), dtype=bool)
        mask[i, :] = False
        mask[:, i] = False
        np.fill_diagonal(mask, False)
        best = np.full((m, m), 1 << 30, dtype=np.int64)
        for w in range(m):
            if w == i:
                continue
            col = fan[:, w]
            cand = col[:, None] + col[None, :]
            cand[w, :] = 1 << 30  # quadruple must be pairwise distinct
            cand[:, w] = 1 << 30
            np.minimum(best, cand, out=best)
        bad = mask & (fan - kappa > best)
        report.quasi_triangle_violations += int(bad.sum())
    return report


def report_to_json(obj) -> str:
    return json.dumps(obj.to_json() if hasattr(obj, "to_json") else obj,
                      indent=2, sort_keys=True)
