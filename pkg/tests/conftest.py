import random

from agora.profiles import Alternative, Ballot, PreferenceProfile, WeakOrder

ALPHABET = "abcdefghijklmnop"


def random_weak_order(rng: random.Random, ids: list[str], allow_partial: bool = True) -> WeakOrder:
    """Random weak order: shuffle, cut into groups, optionally truncate."""
    pool = list(ids)
    rng.shuffle(pool)
    if allow_partial and len(pool) > 1 and rng.random() < 0.3:
        pool = pool[: rng.randint(1, len(pool))]
    groups: list[list[str]] = []
    i = 0
    while i < len(pool):
        size = rng.randint(1, len(pool) - i)
        groups.append(pool[i : i + size])
        i += size
    return WeakOrder(groups)


def random_profile(
    rng: random.Random,
    m: int,
    n: int,
    allow_partial: bool = True,
    allow_weights: bool = True,
) -> PreferenceProfile:
    """Profile with m alternatives and total voter weight exactly n."""
    ids = list(ALPHABET[:m])
    alternatives = tuple(Alternative(i) for i in ids)
    ballots = []
    remaining = n
    voter = 0
    while remaining > 0:
        weight = rng.randint(1, min(3, remaining)) if allow_weights else 1
        ballots.append(
            Ballot(
                voter=f"v{voter}",
                order=random_weak_order(rng, ids, allow_partial),
                weight=weight,
            )
        )
        remaining -= weight
        voter += 1
    return PreferenceProfile(alternatives, tuple(ballots))
