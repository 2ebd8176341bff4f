"""Margin of victory under the ballot-replacement model.

The margin of victory (MoV) of a profile under a rule is the minimum
number of ballots that must be replaced, each by an arbitrary strict
order, so that the winner *set* changes; creating a co-winner counts.
Higher values mean a more robust outcome.

For positional scoring rules an exact per-challenger greedy runs in
near-linear time.  For the PUT rules (STV, ranked pairs) no polynomial
exact method is known here, so small profiles fall back to brute force
and larger ones report certified bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ..profiles import Ballot, PreferenceProfile, WeakOrder
from ..rules import (
    RuleError,
    ScoreVector,
    borda_vector,
    is_positional,
    positional_scores,
    rule_winners,
    score_vector_for,
)


@dataclass(frozen=True)
class MovReport:
    rule: str
    mov: int
    method: str  # exact_greedy | brute_force | bounds
    bounds: tuple[int, int] | None = None


def _ballot_shares(order: WeakOrder, vector: ScoreVector) -> dict[str, Fraction]:
    """Positional score each alternative receives from one completed ballot."""
    shares: dict[str, Fraction] = {}
    pos = 0
    for group in order.groups:
        span = vector.entries[pos : pos + len(group)]
        mean = sum(span, Fraction(0)) / len(group)
        for alt in group:
            shares[alt] = mean
        pos += len(group)
    return shares


def _unit_orders(profile: PreferenceProfile) -> list[WeakOrder]:
    completed = profile.completed()
    units: list[WeakOrder] = []
    for ballot in completed.ballots:
        units.extend([ballot.order] * ballot.weight)
    return units


def _greedy_scoring_mov(profile: PreferenceProfile, rule: str) -> int:
    vector = score_vector_for(rule, profile.num_alternatives)
    scores = positional_scores(profile, vector)
    top = max(scores.values())
    winners = {a for a, s in scores.items() if s == top}
    if len(winners) >= 2:
        # replacing any single ballot with "x first, y last" for co-winners
        # x, y pushes y strictly below the new maximum
        return 1
    (w,) = winners
    s_first, s_last = vector.entries[0], vector.entries[-1]
    unit_shares = [_ballot_shares(order, vector) for order in _unit_orders(profile)]

    best: int | None = None
    for c in profile.alternative_ids:
        if c == w:
            continue
        # replacing a ballot by "c first ... w last" closes the (w, c) gap
        # by the ballot's gain; descending gains are optimal for a fixed c
        delta = scores[w] - scores[c]
        gains = sorted(
            ((s_first - shares[c]) + (shares[w] - s_last) for shares in unit_shares),
            reverse=True,
        )
        closed = Fraction(0)
        needed = 0
        for gain in gains:
            if closed >= delta:
                break
            closed += gain
            needed += 1
        if closed < delta:
            continue  # c cannot catch w even replacing everything
        best = needed if best is None else min(best, needed)
    if best is None:
        raise RuleError(f"winner set cannot change under {rule} for this profile")
    return best


def _all_strict_orders(ids: tuple[str, ...]) -> list[WeakOrder]:
    return [WeakOrder([[x] for x in perm]) for perm in itertools.permutations(ids)]


def _with_ballots(
    profile: PreferenceProfile, orders: list[WeakOrder]
) -> PreferenceProfile:
    return PreferenceProfile(
        profile.alternatives,
        tuple(Ballot(voter=f"r{i}", order=o) for i, o in enumerate(orders)),
    )


def _brute_force_mov(profile: PreferenceProfile, rule: str) -> int:
    units = _unit_orders(profile)
    n = len(units)
    base = rule_winners(profile, rule).winners
    strict = _all_strict_orders(profile.alternative_ids)
    for k in range(1, n + 1):
        for removed in itertools.combinations(range(n), k):
            kept = [o for i, o in enumerate(units) if i not in removed]
            for additions in itertools.combinations_with_replacement(strict, k):
                candidate = _with_ballots(profile, kept + list(additions))
                if rule_winners(candidate, rule).winners != base:
                    return k
    raise RuleError(f"winner set cannot change under {rule} for this profile")


def _bounded_mov(profile: PreferenceProfile, rule: str) -> tuple[int, int]:
    """Certified (lower, upper): upper replacements provably change the set."""
    units = _unit_orders(profile)
    n = len(units)
    base = rule_winners(profile, rule).winners
    ids = profile.alternative_ids
    heuristic = borda_vector(profile.num_alternatives)
    borda = positional_scores(profile, heuristic)
    unit_shares = [_ballot_shares(order, heuristic) for order in units]
    anchor = max(base, key=lambda a: (borda[a], a))

    upper = n
    challengers = [c for c in ids if c not in base] or [min(ids)]
    for c in challengers:
        # rest of the replacement order: weakest current performers first
        middle = sorted((x for x in ids if x not in (c, anchor)), key=lambda x: borda[x])
        replacement = WeakOrder(
            [[c], *[[x] for x in middle]] + ([[anchor]] if anchor != c else [])
        )
        ranked = sorted(
            range(n),
            key=lambda i: -(
                (heuristic.entries[0] - unit_shares[i][c])
                + (unit_shares[i][anchor] - heuristic.entries[-1])
            ),
        )
        for k in range(1, min(upper, n) + 1):
            chosen = set(ranked[:k])
            orders = [replacement if i in chosen else o for i, o in enumerate(units)]
            if rule_winners(_with_ballots(profile, orders), rule).winners != base:
                upper = min(upper, k)
                break
    return 1, upper


def margin_of_victory(
    profile: PreferenceProfile, rule: str, brute_force_max: int = 6
) -> MovReport:
    """MoV report for ``rule``; see module docstring for the model."""
    if profile.num_voters < 1:
        raise RuleError("margin of victory needs at least one ballot")
    if profile.num_alternatives < 2:
        raise RuleError("winner set cannot change with a single alternative")
    if is_positional(rule):
        return MovReport(rule=rule, mov=_greedy_scoring_mov(profile, rule), method="exact_greedy")
    if rule in ("stv_put", "ranked_pairs_put"):
        if profile.num_voters <= brute_force_max:
            return MovReport(rule=rule, mov=_brute_force_mov(profile, rule), method="brute_force")
        lower, upper = _bounded_mov(profile, rule)
        return MovReport(rule=rule, mov=upper, method="bounds", bounds=(lower, upper))
    raise RuleError(f"margin of victory unsupported for rule {rule!r}")
