"""Serial dictatorship allocation of multi-type indivisible items.

Agents act in a fixed priority order.  Each agent walks the instance's
type order and takes their most-preferred remaining item of that type;
a ranking over one type's items may be conditioned on the agent's own
picks for earlier types (a CP-net over types).  With exactly as many
items of each type as agents, the result is a perfect matching per type.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Condition = frozenset  # of (type_id, item) pairs


class AllocationError(ValueError):
    pass


@dataclass(frozen=True)
class ConditionalRanking:
    """A strict ranking over one type's items, per earlier-pick context.

    ``parents`` names the earlier types the ranking depends on; ``rows``
    holds one ranking per combination of parent picks.  Unconditional
    rankings use no parents and the single empty-condition row.
    """

    parents: tuple[str, ...]
    rows: dict[Condition, tuple[str, ...]]

    @staticmethod
    def simple(ranking: tuple[str, ...] | list[str]) -> "ConditionalRanking":
        return ConditionalRanking(parents=(), rows={Condition(): tuple(ranking)})

    def ranking_for(self, picks: dict[str, str]) -> tuple[str, ...]:
        missing = [p for p in self.parents if p not in picks]
        if missing:
            raise AllocationError(f"ranking conditioned on unpicked type(s) {missing}")
        condition = Condition((p, picks[p]) for p in self.parents)
        if condition not in self.rows:
            pretty = ",".join(f"{p}={picks[p]}" for p in self.parents) or "(none)"
            raise AllocationError(f"no ranking row for context {pretty}")
        return self.rows[condition]


@dataclass(frozen=True)
class AllocationInstance:
    types: tuple[str, ...]
    items: dict[str, frozenset[str]]
    agents: tuple[str, ...]  # priority order, highest first
    prefs: dict[str, dict[str, ConditionalRanking]] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.agents)
        if len(set(self.agents)) != n:
            raise AllocationError("duplicate agents")
        if set(self.items) != set(self.types):
            raise AllocationError("items must cover exactly the declared types")
        for t in self.types:
            if len(self.items[t]) != n:
                raise AllocationError(
                    f"type {t!r} has {len(self.items[t])} items for {n} agents"
                )
        order = {t: k for k, t in enumerate(self.types)}
        for agent, by_type in self.prefs.items():
            for t, ranking in by_type.items():
                for p in ranking.parents:
                    if order.get(p, len(order)) >= order[t]:
                        raise AllocationError(
                            f"agent {agent!r}: ranking for {t!r} conditions on "
                            f"non-earlier type {p!r}"
                        )


def serial_dictatorship(instance: AllocationInstance) -> dict[str, dict[str, str]]:
    """Greedy pick in priority order; returns agent -> type -> item."""
    available: dict[str, set[str]] = {t: set(instance.items[t]) for t in instance.types}
    result: dict[str, dict[str, str]] = {}
    for agent in instance.agents:
        picks: dict[str, str] = {}
        for t in instance.types:
            try:
                ranking = instance.prefs[agent][t].ranking_for(picks)
            except KeyError:
                raise AllocationError(f"agent {agent!r} has no ranking for type {t!r}") from None
            choice = next((item for item in ranking if item in available[t]), None)
            if choice is None:
                raise AllocationError(
                    f"agent {agent!r} ranks none of the remaining {t!r} items "
                    f"{sorted(available[t])}"
                )
            picks[t] = choice
            available[t].remove(choice)
        result[agent] = picks
    return result


# ---------------------------------------------------------------------------
# structured interchange (mirrors the dataclasses)


def instance_to_dict(instance: AllocationInstance) -> dict:
    return {
        "types": list(instance.types),
        "items": {t: sorted(instance.items[t]) for t in instance.types},
        "agents": list(instance.agents),
        "prefs": {
            agent: {
                t: {
                    "parents": list(r.parents),
                    "rows": [
                        {
                            "when": {p: v for p, v in sorted(cond)},
                            "ranking": list(ranking),
                        }
                        for cond, ranking in sorted(
                            r.rows.items(), key=lambda kv: sorted(kv[0])
                        )
                    ],
                }
                for t, r in by_type.items()
            }
            for agent, by_type in instance.prefs.items()
        },
    }


def instance_from_dict(doc: dict) -> AllocationInstance:
    try:
        prefs = {
            agent: {
                t: ConditionalRanking(
                    parents=tuple(spec.get("parents", ())),
                    rows={
                        Condition(tuple(row.get("when", {}).items())): tuple(row["ranking"])
                        for row in spec["rows"]
                    },
                )
                for t, spec in by_type.items()
            }
            for agent, by_type in doc.get("prefs", {}).items()
        }
        return AllocationInstance(
            types=tuple(doc["types"]),
            items={t: frozenset(v) for t, v in doc["items"].items()},
            agents=tuple(doc["agents"]),
            prefs=prefs,
        )
    except (KeyError, TypeError) as exc:
        raise AllocationError(f"malformed allocation instance: {exc}") from exc
