import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agora.profiles import (
    Alternative,
    Ballot,
    PreferenceProfile,
    ProfileError,
    ProfileParseError,
    WeakOrder,
    complete_with_unranked,
    pairwise_margins,
    parse_profile,
    profiles_equivalent,
    serialize_profile,
)
from conftest import random_profile


def wo(*groups):
    return WeakOrder(groups)


class TestWeakOrder:
    def test_groups_normalised_to_frozensets(self):
        order = wo(["a"], ["b", "c"])
        assert order.groups == (frozenset({"a"}), frozenset({"b", "c"}))

    def test_empty_group_rejected(self):
        with pytest.raises(ProfileError, match="empty group"):
            wo(["a"], [])

    def test_duplicate_across_groups_rejected(self):
        with pytest.raises(ProfileError, match="duplicate"):
            wo(["a"], ["a", "b"])

    def test_rank_of(self):
        order = wo(["a"], ["b", "c"])
        assert order.rank_of("a") == 0
        assert order.rank_of("c") == 1
        assert order.rank_of("z") is None


class TestCompletion:
    def test_appends_missing_as_tied_bottom(self):
        assert complete_with_unranked(wo(["a"]), {"a", "b", "c"}) == wo(["a"], ["b", "c"])

    def test_complete_order_unchanged(self):
        order = wo(["a"], ["b"], ["c"])
        assert complete_with_unranked(order, {"a", "b", "c"}) is order

    def test_tied_prefix(self):
        assert complete_with_unranked(wo(["b", "c"]), {"a", "b", "c"}) == wo(["b", "c"], ["a"])

    def test_id_outside_universe(self):
        with pytest.raises(ProfileError, match="outside"):
            complete_with_unranked(wo(["z"]), {"a", "b"})

    def test_idempotent_on_random_orders(self):
        rng = random.Random(11)
        for _ in range(50):
            profile = random_profile(rng, m=4, n=3)
            universe = set(profile.alternative_ids)
            for ballot in profile.ballots:
                once = complete_with_unranked(ballot.order, universe)
                assert complete_with_unranked(once, universe) == once


class TestProfileInvariants:
    def test_duplicate_alternative_ids_rejected(self):
        with pytest.raises(ProfileError, match="duplicate"):
            PreferenceProfile((Alternative("a"), Alternative("a")))

    def test_unknown_ballot_id_rejected(self):
        with pytest.raises(ProfileError, match="unknown"):
            PreferenceProfile(
                (Alternative("a"),), (Ballot("v", wo(["b"])),)
            )

    def test_non_positive_weight_rejected(self):
        with pytest.raises(ProfileError, match="weight"):
            Ballot("v", wo(["a"]), weight=0)

    def test_bad_id_characters_rejected(self):
        for bad in ("a b", "a>b", "x=y", "p:q", "c,d", ""):
            with pytest.raises(ProfileError):
                Alternative(bad)


class TestParse:
    def test_basic_document(self):
        profile = parse_profile("alternatives: a,b,c\n3: a > b = c\n")
        assert profile.alternative_ids == ("a", "b", "c")
        assert profile.num_voters == 3
        assert profile.ballots[0].order == wo(["a"], ["b", "c"])

    def test_partial_ballot_leaves_rest_unranked(self):
        profile = parse_profile("alternatives: a,b,c\n1: a\n")
        assert profile.ballots[0].order == wo(["a"])

    def test_duplicate_in_ballot_is_error(self):
        with pytest.raises(ProfileParseError, match="duplicate id 'a'"):
            parse_profile("alternatives: a,b,c\n2: a > a\n")

    def test_error_carries_line_number(self):
        with pytest.raises(ProfileParseError) as err:
            parse_profile("alternatives: a,b\n# fine\n1: a > z\n")
        assert err.value.line == 3

    def test_non_positive_count(self):
        with pytest.raises(ProfileParseError, match="positive"):
            parse_profile("alternatives: a,b\n0: a\n")

    def test_duplicate_alternative_line(self):
        with pytest.raises(ProfileParseError, match="duplicate"):
            parse_profile("alternatives: a,a\n")

    def test_labels_comments_blanks(self):
        profile = parse_profile(
            "# poll\nalternatives: a,b\nlabel: a = Apple pie\n\n2: b > a\n"
        )
        assert profile.alternatives[0].label == "Apple pie"
        assert profile.alternatives[1].label == "b"
        assert profile.num_voters == 2

    def test_missing_alternatives_line(self):
        with pytest.raises(ProfileParseError, match="alternatives"):
            parse_profile("1: a\n")


class TestRoundTrip:
    def test_round_trip_random_profiles(self):
        rng = random.Random(7)
        for _ in range(40):
            profile = random_profile(rng, m=rng.randint(2, 5), n=rng.randint(1, 8))
            again = parse_profile(serialize_profile(profile))
            assert profiles_equivalent(profile, again)

    def test_labels_survive(self):
        profile = PreferenceProfile(
            (Alternative("a", "Apple"), Alternative("b")),
            (Ballot("v", wo(["a"], ["b"])),),
        )
        again = parse_profile(serialize_profile(profile))
        assert again.alternatives[0].label == "Apple"


def brute_force_margins(profile):
    """Counting oracle: expand weights and compare ranks pair by pair."""
    ids = profile.alternative_ids
    universe = set(ids)
    counts = {x: {y: 0 for y in ids} for x in ids}
    for ballot in profile.ballots:
        order = complete_with_unranked(ballot.order, universe)
        for _ in range(ballot.weight):
            for x in ids:
                for y in ids:
                    rx, ry = order.rank_of(x), order.rank_of(y)
                    if x != y and rx < ry:
                        counts[x][y] += 1
    return counts


class TestPairwiseMargins:
    def test_single_strict_ballot(self):
        profile = parse_profile("alternatives: a,b\n1: a > b\n")
        n = pairwise_margins(profile)
        assert n["a"]["b"] == 1 and n["b"]["a"] == 0

    def test_tie_counts_for_neither(self):
        profile = parse_profile("alternatives: a,b\n1: a = b\n")
        n = pairwise_margins(profile)
        assert n["a"]["b"] == 0 and n["b"]["a"] == 0

    def test_weighted_example_against_oracle(self):
        profile = parse_profile("alternatives: a,b,c\n2: a > b > c\n1: c > a > b\n")
        n = pairwise_margins(profile)
        assert n["a"]["b"] == 3
        assert n["b"]["c"] == 2
        assert n["c"]["a"] == 1
        assert n == brute_force_margins(profile)

    def test_random_profiles_against_oracle(self):
        rng = random.Random(23)
        for _ in range(30):
            profile = random_profile(rng, m=rng.randint(2, 4), n=rng.randint(1, 10))
            assert pairwise_margins(profile) == brute_force_margins(profile)

    def test_direction_tie_weight_sums_to_n(self):
        rng = random.Random(29)
        for _ in range(30):
            profile = random_profile(rng, m=3, n=rng.randint(1, 8))
            n = pairwise_margins(profile)
            completed = profile.completed()
            for x in profile.alternative_ids:
                for y in profile.alternative_ids:
                    if x == y:
                        continue
                    tied = sum(
                        b.weight
                        for b in completed.ballots
                        if b.order.rank_of(x) == b.order.rank_of(y)
                    )
                    assert n[x][y] + n[y][x] + tied == profile.num_voters


@settings(max_examples=60)
@given(seed=st.integers(0, 10**6))
def test_serialize_parse_identity_property(seed):
    rng = random.Random(seed)
    profile = random_profile(rng, m=rng.randint(2, 6), n=rng.randint(1, 10))
    assert profiles_equivalent(profile, parse_profile(serialize_profile(profile)))
