"""Word problem oracle for twist-power quotients of SL(2, Z).

The quotient G_K = SL(2, Z) / <<T^K>> has the finite presentation

    < S, T | S^4, (S T)^3 S^-2, T^K >

(S the order-four rotation, T the basic twist; S^2 is the central
involution, which survives in G_K).  Knuth-Bendix completion with a
shortlex order turns this into a confluent rewriting system, giving
unique normal forms, hence a decision procedure for the word problem and
for membership of a matrix in the normal closure of T^K.

Words are strings over S, s, T, t with lowercase denoting inverses, in
the pinned order S < s < T < t.  Long twist powers are fed in compressed
(generator, exponent) form and folded by the relator orders before flat
reduction, so matrices with astronomically large entries stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .farey import GenWord, Mat, matrix_to_word

ALPHABET = "SsTt"
INVERSE = {"S": "s", "s": "S", "T": "t", "t": "T"}
_RANK = {c: i for i, c in enumerate(ALPHABET)}


class BudgetExceeded(RuntimeError):
    """Completion ran out of budget; carries the partial system."""

    def __init__(self, msg: str, partial: "RewritingSystem"):
        super().__init__(msg)
        self.partial = partial


class Inconclusive(RuntimeError):
    """A query needed confluence but only a partial system is available."""


def shortlex_key(w: str) -> tuple:
    return (len(w), tuple(_RANK[c] for c in w))


def shortlex_less(a: str, b: str) -> bool:
    return shortlex_key(a) < shortlex_key(b)


def free_reduce(w: str) -> str:
    out: list[str] = []
    for c in w:
        if out and out[-1] == INVERSE[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def invert_word(w: str) -> str:
    return "".join(INVERSE[c] for c in reversed(w))


@dataclass(frozen=True)
class GroupPresentation:
    """Generators with formal inverses plus relator words."""

    relators: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        for r in self.relators:
            red = free_reduce(r)
            if red != r or not r:
                raise ValueError(f"relator {r!r} is not freely reduced")
            if INVERSE[r[-1]] == r[0]:
                raise ValueError(f"relator {r!r} is not cyclically reduced")


def presentation_sl2(K: int) -> GroupPresentation:
    """SL(2,Z) modulo K-th twist powers, at the matrix (not projective) level.

    The braid-type relation (ST)^3 = S^2 is written with positive letters
    as (ST)^3 S^2 = 1, which is equivalent modulo S^4 = 1.
    """
    if K < 1:
        raise ValueError("K must be positive")
    return GroupPresentation(("SSSS", "STSTSTSS", "T" * K), name=f"sl2_K{K}")


def presentation_psl2(K: int) -> GroupPresentation:
    """The projective quotient: the (2, 3, K) von Dyck group < S, U >.

    Here U plays S*T; the central involution is killed.  Shipped as a
    cross-check for the matrix-level system.
    """
    if K < 1:
        raise ValueError("K must be positive")
    # reuse letters: S (order 2), T standing for U (order 3), (sT)^K ~ twist
    return GroupPresentation(("SS", "TTT", "sT" * K), name=f"psl2_K{K}")


@dataclass
class RewritingSystem:
    """An interreduced string rewriting system; confluent when flagged."""

    rules: list[tuple[str, str]]
    confluent: bool
    presentation: GroupPresentation
    generator_orders: dict[str, int] = field(default_factory=dict)

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    def __post_init__(self):
        self._index()

    def _index(self):
        self._lookup = dict(self.rules)
        self._max_lhs = max((len(l) for l, _ in self.rules), default=0)

    def reduce_word(self, w: str) -> str:
        """Reduce to an irreducible word (leftmost strategy, stack-based)."""
        return _stack_reduce(w, self._lookup, self._max_lhs)

    def serialise(self) -> str:
        lines = [f"{lhs} -> {rhs if rhs else '1'}" for lhs, rhs in self.rules]
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str, presentation: GroupPresentation,
              confluent: bool = False) -> "RewritingSystem":
        rules = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lhs, rhs = (part.strip() for part in line.split("->"))
            rules.append((lhs, "" if rhs == "1" else rhs))
        return RewritingSystem(rules, confluent, presentation)


def _stack_reduce(w: str, lookup: dict[str, str], max_lhs: int) -> str:
    """Leftmost reduction: maintain an irreducible prefix on a stack.

    A new letter can only complete a redex ending at itself, so each step
    tests the O(max_lhs) suffixes of the stack against the rule table.
    """
    out: list[str] = []
    pending = list(reversed(w))
    while pending:
        out.append(pending.pop())
        matched = True
        while matched and out:
            matched = False
            top = min(len(out), max_lhs)
            for L in range(1, top + 1):
                tail = "".join(out[-L:])
                rhs = lookup.get(tail)
                if rhs is not None:
                    del out[-L:]
                    pending.extend(reversed(rhs))
                    matched = True
                    break
    return "".join(out)


def _initial_rules(pres: GroupPresentation) -> list[tuple[str, str]]:
    rules = {(a + INVERSE[a], "") for a in ALPHABET}
    for r in pres.relators:
        rules.add(_orient(r, ""))
        rules.add(_orient(invert_word(r), ""))
    return sorted(rules, key=lambda r: shortlex_key(r[0]))


def _orient(u: str, v: str) -> tuple[str, str]:
    if shortlex_less(u, v):
        return (v, u)
    return (u, v)


def knuth_bendix(pres: GroupPresentation, max_rules: int = 20000,
                 max_len: int = 0) -> RewritingSystem:
    """Complete the presentation into a confluent shortlex system.

    Deterministic in the presentation and budgets.  Raises BudgetExceeded
    (carrying the partial, still sound, system) when the live rule count
    passes max_rules or a critical pair exceeds max_len.  A partial system
    remains usable for semi-decision: words it reduces to the empty word
    are trivial; irreducibility is then inconclusive.
    """
    if max_len <= 0:
        max_len = 12 + 4 * max(len(r) for r in pres.relators)

    rules: dict[str, str] = {}

    def current_system(confluent: bool) -> RewritingSystem:
        ordered = sorted(rules.items(), key=lambda r: shortlex_key(r[0]))
        rs = RewritingSystem(ordered, confluent, pres)
        rs.generator_orders = _generator_orders(pres)
        return rs

    def reduce_full(w: str) -> str:
        return _stack_reduce(w, rules, max((len(l) for l in rules), default=0))

    def add_equation(u: str, v: str) -> None:
        # reduced words are irreducible, so a reduced lhs is never already
        # a key; recording it cannot clobber an existing rule
        u, v = reduce_full(u), reduce_full(v)
        u, v = _orient(u, v)
        if u != v:
            rules[u] = v

    for lhs, rhs in _initial_rules(pres):
        add_equation(lhs, rhs)

    # queue of rule pairs whose overlaps still need examining
    done_pairs: set[tuple[str, str]] = set()
    while True:
        # interreduce: every lhs irreducible w.r.t. the others, rhs reduced
        dirty = True
        while dirty:
            dirty = False
            for lhs in sorted(rules, key=shortlex_key):
                if lhs not in rules:
                    continue
                rhs = rules.pop(lhs)
                lhs2 = reduce_full(lhs)
                rhs2 = reduce_full(rhs)
                if lhs2 == lhs:
                    rules[lhs] = rhs2
                    continue
                dirty = True
                add_equation(lhs2, rhs2)
            if len(rules) > max_rules:
                raise BudgetExceeded(f"rule budget {max_rules} exceeded",
                                     current_system(False))

        # find critical pairs among current rules, smallest overlaps first
        new_rules: list[tuple[str, str]] = []
        ordered = sorted(rules.items(), key=lambda r: shortlex_key(r[0]))
        for l1, r1 in ordered:
            for l2, r2 in ordered:
                if (l1, l2) in done_pairs:
                    continue
                for k in range(1, min(len(l1), len(l2))):
                    if not l1.endswith(l2[:k]):
                        continue
                    # l1 = a b, l2 = b c with b of length k
                    word = l1 + l2[k:]
                    if len(word) > max_len:
                        raise BudgetExceeded(
                            f"overlap of length {len(word)} exceeds max_len "
                            f"{max_len}", current_system(False))
                    c1 = reduce_full(r1 + l2[k:])
                    c2 = reduce_full(l1[:-k] + r2)
                    if c1 != c2:
                        new_rules.append(_orient(c1, c2))
        for l1, _ in ordered:
            for l2, _ in ordered:
                done_pairs.add((l1, l2))

        if not new_rules:
            break
        for u, v in sorted(set(new_rules), key=lambda r: shortlex_key(r[0])):
            add_equation(u, v)
        if len(rules) > max_rules:
            raise BudgetExceeded(f"rule budget {max_rules} exceeded",
                                 current_system(False))

    rs = current_system(True)
    assert verify_confluent(rs), "completed system failed the confluence audit"
    for r in pres.relators:
        assert rs.reduce_word(r) == "" and rs.reduce_word(invert_word(r)) == "", \
            f"completed system lost relator {r}"
    return rs


def verify_confluent(rs: RewritingSystem) -> bool:
    """Machine-check that every critical pair of the system resolves."""
    for l1, r1 in rs.rules:
        for l2, r2 in rs.rules:
            for k in range(1, min(len(l1), len(l2))):
                if l1.endswith(l2[:k]):
                    if rs.reduce_word(r1 + l2[k:]) != rs.reduce_word(l1[:-k] + r2):
                        return False
            # proper containment would mean the system is not interreduced
            if l1 != l2 and l2 in l1:
                return False
    return True


def _generator_orders(pres: GroupPresentation) -> dict[str, int]:
    """Orders imposed by power relators, used to fold long runs."""
    orders: dict[str, int] = {}
    for r in pres.relators:
        if len(set(r)) == 1:
            orders[r[0]] = len(r)
    return orders


def normal_form(rs: RewritingSystem, w: str) -> str:
    """The unique shortlex-least representative of the word's class.

    Requires a confluent system; with a partial system the reduction is
    still sound but uniqueness fails, so only reductions to the empty
    word are meaningful and other queries raise Inconclusive.
    """
    red = rs.reduce_word(free_reduce(w))
    if not rs.confluent and red != "":
        raise Inconclusive(
            "system is not confluent; nonempty reductions are not canonical")
    return red


def genword_to_string(rs: RewritingSystem, word: GenWord) -> str:
    """Flatten a compressed word, folding exponents by the relator orders.

    Folding an exponent by the order of the generator replaces the word
    by another representative of the same group element, which is what
    keeps twist powers with huge exponents tractable.
    """
    orders = rs.generator_orders
    parts: list[str] = []
    for gen, e in word:
        n = orders.get(gen)
        if n:
            e %= n
        if e >= 0:
            parts.append(gen * e)
        else:
            parts.append(INVERSE[gen] * (-e))
    return free_reduce("".join(parts))


def normal_form_genword(rs: RewritingSystem, word: GenWord) -> str:
    return normal_form(rs, genword_to_string(rs, word))


def kernel_membership(rs: RewritingSystem, g: Mat) -> bool:
    """Whether the matrix lies in the normal closure of T^K.

    True exactly when the image of g in G_K is trivial; in particular the
    central involution -I is *not* in the closure (its image is S^2).
    """
    red = rs.reduce_word(genword_to_string(rs, matrix_to_word(g)))
    if red == "":
        return True
    if not rs.confluent:
        raise Inconclusive("partial system cannot certify non-membership")
    return False
