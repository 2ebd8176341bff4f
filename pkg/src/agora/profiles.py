"""Alternatives, weak orders, ballots and preference profiles.

A weak order is an ordered partition of alternatives into indifference
groups (group 1 = most preferred).  Profiles are immutable once built;
every aggregation routine in this package consumes them as values.

The line-based text format ("opra-profile v1") looks like::

    # dinner poll
    alternatives: apple,banana,cherry
    label: apple = Apple pie
    3: cherry > apple = banana
    1: apple

``>`` separates groups, ``=`` separates members of a tied group, and the
``count:`` prefix is an integer multiplicity.  Alternatives omitted from a
ballot line are unranked; they are normalised to one tied bottom group by
``complete_with_unranked`` before any rule is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

FORBIDDEN_ID_CHARS = set("<>=:,") | {" ", "\t", "\n", "\r"}


class ProfileError(ValueError):
    """Invalid profile data (bad ids, duplicate entries, bad references)."""


class ProfileParseError(ProfileError):
    """Syntax or semantic error in a profile document, with position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _check_id(alt_id: str) -> str:
    if not alt_id:
        raise ProfileError("alternative id must be non-empty")
    bad = FORBIDDEN_ID_CHARS.intersection(alt_id)
    if bad:
        raise ProfileError(
            f"alternative id {alt_id!r} contains forbidden character(s) {sorted(bad)}"
        )
    return alt_id


@dataclass(frozen=True)
class Alternative:
    """One option in a poll: a short stable id plus a display label."""

    id: str
    label: str = ""

    def __post_init__(self):
        _check_id(self.id)
        if not self.label:
            object.__setattr__(self, "label", self.id)


class WeakOrder:
    """An ordered partition of alternative ids into tied groups."""

    __slots__ = ("groups",)

    def __init__(self, groups: Iterable[Iterable[str]]):
        normalized = tuple(frozenset(g) for g in groups)
        seen: set[str] = set()
        for g in normalized:
            if not g:
                raise ProfileError("weak order contains an empty group")
            dup = seen.intersection(g)
            if dup:
                raise ProfileError(f"duplicate id(s) in weak order: {sorted(dup)}")
            seen.update(g)
        self.groups: tuple[frozenset[str], ...] = normalized

    def ids(self) -> frozenset[str]:
        return frozenset().union(*self.groups) if self.groups else frozenset()

    def rank_of(self, alt_id: str) -> int | None:
        """0-based group index of ``alt_id``, or None if unranked."""
        for i, g in enumerate(self.groups):
            if alt_id in g:
                return i
        return None

    def __eq__(self, other) -> bool:
        return isinstance(other, WeakOrder) and self.groups == other.groups

    def __hash__(self) -> int:
        return hash(self.groups)

    def __repr__(self) -> str:
        body = " > ".join("=".join(sorted(g)) for g in self.groups)
        return f"WeakOrder({body!r})"


@dataclass(frozen=True)
class Ballot:
    """One voter's submission: a weak order with an integer multiplicity."""

    voter: str
    order: WeakOrder
    weight: int = 1
    submitted_at: float = 0.0

    def __post_init__(self):
        if self.weight < 1:
            raise ProfileError(f"ballot weight must be >= 1, got {self.weight}")


@dataclass(frozen=True)
class PreferenceProfile:
    """A fixed alternative set plus a sequence of weighted ballots."""

    alternatives: tuple[Alternative, ...]
    ballots: tuple[Ballot, ...] = ()

    def __post_init__(self):
        ids = [a.id for a in self.alternatives]
        if len(set(ids)) != len(ids):
            dupes = sorted({x for x in ids if ids.count(x) > 1})
            raise ProfileError(f"duplicate alternative id(s): {dupes}")
        universe = set(ids)
        for b in self.ballots:
            unknown = b.order.ids() - universe
            if unknown:
                raise ProfileError(
                    f"ballot for voter {b.voter!r} references unknown id(s): {sorted(unknown)}"
                )

    @property
    def alternative_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.alternatives)

    @property
    def num_alternatives(self) -> int:
        return len(self.alternatives)

    @property
    def num_voters(self) -> int:
        return sum(b.weight for b in self.ballots)

    def completed(self) -> "PreferenceProfile":
        """Copy of the profile with every ballot's unranked ids appended
        as one tied bottom group."""
        universe = set(self.alternative_ids)
        new = tuple(
            Ballot(
                voter=b.voter,
                order=complete_with_unranked(b.order, universe),
                weight=b.weight,
                submitted_at=b.submitted_at,
            )
            for b in self.ballots
        )
        return PreferenceProfile(self.alternatives, new)

    def weighted_orders(self) -> Iterator[tuple[WeakOrder, int]]:
        for b in self.ballots:
            yield b.order, b.weight


def complete_with_unranked(order: WeakOrder, universe: Iterable[str]) -> WeakOrder:
    """Append alternatives missing from ``order`` as one final tied group.

    Idempotent; returns ``order`` unchanged when it already covers the
    universe.  Raises if the order mentions an id outside the universe.
    """
    universe = set(universe)
    ranked = order.ids()
    outside = ranked - universe
    if outside:
        raise ProfileError(f"order ranks id(s) outside the universe: {sorted(outside)}")
    missing = universe - ranked
    if not missing:
        return order
    return WeakOrder([*order.groups, missing])


def pairwise_margins(profile: PreferenceProfile) -> dict[str, dict[str, int]]:
    """Weighted pairwise counts N[x][y] = total weight strictly preferring x to y.

    Ties contribute zero to both directions; the diagonal is zero.  Ballots
    are completed (unranked -> tied bottom) before counting, so for every
    pair x != y:  N[x][y] + N[y][x] + (weight tying x,y) == num_voters.
    """
    ids = profile.alternative_ids
    n: dict[str, dict[str, int]] = {x: {y: 0 for y in ids} for x in ids}
    universe = set(ids)
    for order, weight in profile.weighted_orders():
        order = complete_with_unranked(order, universe)
        above: list[str] = []
        for group in order.groups:
            for lower in group:
                for higher in above:
                    n[higher][lower] += weight
            above.extend(group)
    return n


# ---------------------------------------------------------------------------
# Text format


def parse_profile(text: str) -> PreferenceProfile:
    """Parse a profile document (see module docstring for the grammar).

    Errors are raised as :class:`ProfileParseError` carrying the line
    number.  Ballot order in the document is preserved; voters are given
    synthetic ``line-N`` identities.
    """
    alternatives: list[Alternative] | None = None
    labels: dict[str, str] = {}
    ballots: list[Ballot] = []
    universe: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        if alternatives is None:
            if not line.startswith("alternatives:"):
                raise ProfileParseError(
                    "expected 'alternatives: id1,id2,...' as the first "
                    f"significant line, got {line!r}",
                    lineno,
                )
            ids = [tok.strip() for tok in line[len("alternatives:"):].split(",")]
            ids = [tok for tok in ids if tok]
            if len(ids) != len(set(ids)):
                dupes = sorted({x for x in ids if ids.count(x) > 1})
                raise ProfileParseError(f"duplicate alternative id(s): {dupes}", lineno)
            try:
                alternatives = [Alternative(i) for i in ids]
            except ProfileError as exc:
                raise ProfileParseError(str(exc), lineno) from exc
            universe = set(ids)
            continue

        if line.startswith("label:"):
            body = line[len("label:"):]
            if "=" not in body:
                raise ProfileParseError("label line must be 'label: id = text'", lineno)
            alt_id, _, label = body.partition("=")
            alt_id = alt_id.strip()
            if alt_id not in universe:
                raise ProfileParseError(f"label for unknown id {alt_id!r}", lineno)
            labels[alt_id] = label.strip()
            continue

        count_tok, sep, order_tok = line.partition(":")
        if not sep:
            raise ProfileParseError(
                f"expected '<count>: ranking', got {line!r}", lineno
            )
        try:
            count = int(count_tok.strip())
        except ValueError:
            raise ProfileParseError(
                f"ballot count must be an integer, got {count_tok.strip()!r}", lineno
            ) from None
        if count < 1:
            raise ProfileParseError(f"ballot count must be positive, got {count}", lineno)

        groups: list[list[str]] = []
        seen: set[str] = set()
        for group_tok in order_tok.split(">"):
            members = [tok.strip() for tok in group_tok.split("=")]
            members = [tok for tok in members if tok]
            if not members:
                raise ProfileParseError("empty group in ranking", lineno)
            for alt_id in members:
                if alt_id not in universe:
                    raise ProfileParseError(f"unknown alternative id {alt_id!r}", lineno)
                if alt_id in seen:
                    raise ProfileParseError(f"duplicate id {alt_id!r} in ballot", lineno)
                seen.add(alt_id)
            groups.append(members)
        if not groups:
            raise ProfileParseError("ballot ranks no alternatives", lineno)
        ballots.append(Ballot(voter=f"line-{lineno}", order=WeakOrder(groups), weight=count))

    if alternatives is None:
        raise ProfileParseError("document has no 'alternatives:' line", max(1, text.count("\n") + 1))

    if labels:
        alternatives = [Alternative(a.id, labels.get(a.id, a.label)) for a in alternatives]
    return PreferenceProfile(tuple(alternatives), tuple(ballots))


def format_order(order: WeakOrder, index: Mapping[str, int] | None = None) -> str:
    """Render a weak order as ``a > b=c``; group members follow canonical
    alternative order when ``index`` is given, else sort lexically."""
    key = (lambda x: index[x]) if index is not None else (lambda x: x)
    return " > ".join("=".join(sorted(g, key=key)) for g in order.groups)


def serialize_profile(profile: PreferenceProfile) -> str:
    """Write a profile back out in the v1 text format.

    Ballots with identical weak orders are merged (weights summed) and
    emitted in order of first occurrence, so parse(serialize(p)) equals p
    up to ballot ordering and voter identities.
    """
    index = {a: i for i, a in enumerate(profile.alternative_ids)}
    lines = ["alternatives: " + ",".join(profile.alternative_ids)]
    for alt in profile.alternatives:
        if alt.label != alt.id:
            lines.append(f"label: {alt.id} = {alt.label}")
    merged: dict[WeakOrder, int] = {}
    for order, weight in profile.weighted_orders():
        merged[order] = merged.get(order, 0) + weight
    for order, weight in merged.items():
        lines.append(f"{weight}: {format_order(order, index)}")
    return "\n".join(lines) + "\n"


def expanded_orders(profile: PreferenceProfile) -> list[WeakOrder]:
    """Weight-expanded list of ballot orders (one entry per unit ballot)."""
    out: list[WeakOrder] = []
    for order, weight in profile.weighted_orders():
        out.extend([order] * weight)
    return out


def profiles_equivalent(a: PreferenceProfile, b: PreferenceProfile) -> bool:
    """Same alternatives and the same weight-expanded multiset of orders."""
    if a.alternative_ids != b.alternative_ids:
        return False
    from collections import Counter

    return Counter(expanded_orders(a)) == Counter(expanded_orders(b))
