"""Voting rules over preference profiles.

Positional scoring rules (plurality, Borda, veto, k-approval) plus the two
rules that report *all* parallel-universe tie-breaking (PUT) winners:
single transferable vote and ranked pairs.  An alternative is a PUT winner
if some resolution of every internal tie along the rule's execution makes
it win; both computations run a depth-first search over tie resolutions
with memoisation on the search state.

All scoring arithmetic uses exact rationals so that "tied for lowest" and
"strict majority" comparisons are never clouded by rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .profiles import PreferenceProfile, pairwise_margins


class RuleError(ValueError):
    """Unusable rule configuration or unusable profile for a rule."""


@dataclass(frozen=True)
class ScoreVector:
    """Non-increasing position scores s1 >= s2 >= ... >= sm."""

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        ent = tuple(Fraction(e) for e in self.entries)
        object.__setattr__(self, "entries", ent)
        for a, b in zip(ent, ent[1:]):
            if a < b:
                raise RuleError(f"score vector must be non-increasing, got {ent}")

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RuleResult:
    """One row of a results table: a rule, its winner set, and diagnostics."""

    rule: str
    winners: frozenset[str]
    scores: dict[str, Fraction] | None = None
    universes_explored: int | None = None


def plurality_vector(m: int) -> ScoreVector:
    return ScoreVector((Fraction(1),) + (Fraction(0),) * (m - 1))


def borda_vector(m: int) -> ScoreVector:
    return ScoreVector(tuple(Fraction(m - 1 - i) for i in range(m)))


def veto_vector(m: int) -> ScoreVector:
    return ScoreVector((Fraction(1),) * (m - 1) + (Fraction(0),))


def k_approval_vector(m: int, k: int) -> ScoreVector:
    if not 1 <= k <= m - 1:
        raise RuleError(f"k-approval needs 1 <= k <= m-1, got k={k} with m={m}")
    return ScoreVector((Fraction(1),) * k + (Fraction(0),) * (m - k))


def positional_scores(
    profile: PreferenceProfile, vector: ScoreVector
) -> dict[str, Fraction]:
    """Weight-summed positional scores under ``vector``.

    A tied group spanning positions i..j awards each member the mean of
    s_i..s_j, so the total score handed out by one ballot is always
    sum(vector) and overall  sum(scores) == num_voters * sum(vector).
    """
    m = profile.num_alternatives
    if len(vector) != m:
        raise RuleError(f"score vector length {len(vector)} != {m} alternatives")
    completed = profile.completed()
    scores = {a: Fraction(0) for a in profile.alternative_ids}
    for order, weight in completed.weighted_orders():
        pos = 0
        for group in order.groups:
            span = vector.entries[pos : pos + len(group)]
            share = sum(span, Fraction(0)) / len(group)
            for alt in group:
                scores[alt] += share * weight
            pos += len(group)
    return scores


def _argmax(scores: dict[str, Fraction]) -> frozenset[str]:
    top = max(scores.values())
    return frozenset(a for a, s in scores.items() if s == top)


_K_APPROVAL_RE = re.compile(r"^(\d+)-approval$")


def score_vector_for(rule: str, m: int) -> ScoreVector:
    """Score vector for a positional rule identifier, e.g. ``2-approval``."""
    if rule == "plurality":
        return plurality_vector(m)
    if rule == "borda":
        return borda_vector(m)
    if rule == "veto":
        return veto_vector(m)
    match = _K_APPROVAL_RE.match(rule)
    if match:
        return k_approval_vector(m, int(match.group(1)))
    raise RuleError(f"unknown positional rule {rule!r}")


def is_positional(rule: str) -> bool:
    return rule in ("plurality", "borda", "veto") or bool(_K_APPROVAL_RE.match(rule))


def rule_winners(profile: PreferenceProfile, rule: str) -> RuleResult:
    """Apply one rule and report all tied winners."""
    if profile.num_voters < 1:
        raise RuleError("cannot apply a voting rule to an empty profile")
    if rule == "stv_put":
        return stv_put_winners(profile)
    if rule == "ranked_pairs_put":
        return ranked_pairs_put_winners(profile)
    vector = score_vector_for(rule, profile.num_alternatives)
    scores = positional_scores(profile, vector)
    return RuleResult(rule=rule, winners=_argmax(scores), scores=scores)


# ---------------------------------------------------------------------------
# STV with all PUT winners


def _stv_round_scores(
    orders: list[tuple[tuple[frozenset[str], ...], int]], remaining: frozenset[str]
) -> dict[str, Fraction]:
    """Fractional plurality mass: each ballot splits its weight equally
    among the remaining members of its topmost non-eliminated group."""
    scores = {a: Fraction(0) for a in remaining}
    for groups, weight in orders:
        for group in groups:
            live = group & remaining
            if live:
                share = Fraction(weight, len(live))
                for alt in live:
                    scores[alt] += share
                break
    return scores


def stv_put_winners(profile: PreferenceProfile) -> RuleResult:
    """All STV winners over every resolution of elimination ties.

    Rounds eliminate one lowest-score alternative; the DFS branches over
    every alternative tied for lowest, and an alternative wins a universe
    when it is the last one remaining or holds a strict majority of the
    live mass.  States are memoised on the set of remaining alternatives,
    which fully determines the subtree.
    """
    if profile.num_voters < 1:
        raise RuleError("STV needs at least one ballot")
    completed = profile.completed()
    orders = [(b.order.groups, b.weight) for b in completed.ballots]
    total = Fraction(completed.num_voters)
    majority = total / 2

    memo: dict[frozenset[str], frozenset[str]] = {}
    nodes = 0

    def explore(remaining: frozenset[str]) -> frozenset[str]:
        nonlocal nodes
        cached = memo.get(remaining)
        if cached is not None:
            return cached
        nodes += 1
        if len(remaining) == 1:
            memo[remaining] = remaining
            return remaining
        scores = _stv_round_scores(orders, remaining)
        for alt, score in scores.items():
            if score > majority:
                result = frozenset({alt})
                memo[remaining] = result
                return result
        lowest = min(scores.values())
        winners: set[str] = set()
        for alt in remaining:
            if scores[alt] == lowest:
                winners |= explore(remaining - {alt})
        result = frozenset(winners)
        memo[remaining] = result
        return result

    winners = explore(frozenset(profile.alternative_ids))
    return RuleResult(rule="stv_put", winners=winners, universes_explored=nodes)


# ---------------------------------------------------------------------------
# Ranked pairs with all PUT winners


def margin_matrix(profile: PreferenceProfile) -> dict[tuple[str, str], int]:
    """Signed margins m(x,y) = N[x][y] - N[y][x] for all ordered pairs."""
    counts = pairwise_margins(profile)
    ids = profile.alternative_ids
    return {
        (x, y): counts[x][y] - counts[y][x] for x in ids for y in ids if x != y
    }


def _creates_cycle(edge: tuple[str, str], locked: frozenset[tuple[str, str]]) -> bool:
    """True iff adding x->y closes a directed cycle, i.e. y already reaches x."""
    x, y = edge
    stack = [y]
    seen = {y}
    while stack:
        node = stack.pop()
        if node == x:
            return True
        for a, b in locked:
            if a == node and b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def _sources(ids: tuple[str, ...], locked: frozenset[tuple[str, str]]) -> frozenset[str]:
    has_incoming = {b for _, b in locked}
    return frozenset(a for a in ids if a not in has_incoming)


def ranked_pairs_put_winners(profile: PreferenceProfile) -> RuleResult:
    """All ranked-pairs winners over every ordering of equal-margin pairs.

    Pairs with strictly positive margin are processed in descending margin
    order; the DFS branches over the orderings within each equal-margin
    block.  A pair is locked unless it would create a cycle.  Each
    universe's winners are the sources of its final locked graph (several
    sources are possible because zero-margin pairs are never locked).
    """
    if profile.num_voters < 1:
        raise RuleError("ranked pairs needs at least one ballot")
    ids = profile.alternative_ids
    margins = margin_matrix(profile)
    positive = [(pair, m) for pair, m in margins.items() if m > 0]
    positive.sort(key=lambda item: -item[1])

    blocks: list[frozenset[tuple[str, str]]] = []
    i = 0
    while i < len(positive):
        j = i
        while j < len(positive) and positive[j][1] == positive[i][1]:
            j += 1
        blocks.append(frozenset(pair for pair, _ in positive[i:j]))
        i = j

    memo: dict[tuple[int, frozenset, frozenset], frozenset[str]] = {}
    nodes = 0

    def explore(
        block_idx: int,
        pending: frozenset[tuple[str, str]],
        locked: frozenset[tuple[str, str]],
    ) -> frozenset[str]:
        nonlocal nodes
        if not pending:
            if block_idx == len(blocks):
                nodes += 1
                return _sources(ids, locked)
            return explore(block_idx + 1, blocks[block_idx], locked)
        key = (block_idx, pending, locked)
        cached = memo.get(key)
        if cached is not None:
            return cached
        nodes += 1
        winners: set[str] = set()
        for pair in pending:
            nxt = locked if _creates_cycle(pair, locked) else locked | {pair}
            winners |= explore(block_idx, pending - {pair}, nxt)
        result = frozenset(winners)
        memo[key] = result
        return result

    winners = explore(0, frozenset(), frozenset())
    return RuleResult(rule="ranked_pairs_put", winners=winners, universes_explored=nodes)


# ---------------------------------------------------------------------------
# Results table

PUT_RULES = ("stv_put", "ranked_pairs_put")


def default_rules(m: int) -> tuple[str, ...]:
    """Default rule set; 2-approval is dropped when m == 2 leaves no
    valid k."""
    positional = ["plurality", "borda", "veto"]
    if m >= 3:
        positional.append("2-approval")
    return tuple(positional) + PUT_RULES


def results_table(
    profile: PreferenceProfile, rules: tuple[str, ...] | None = None
) -> list[RuleResult]:
    """One RuleResult per configured rule, in a deterministic order."""
    if rules is None:
        rules = default_rules(profile.num_alternatives)
    return [rule_winners(profile, rule) for rule in rules]
