"""Group decision support: polls with weak-order ballots, voting-rule
analytics, combinatorial (multi-issue) voting, and score-based matching."""

__version__ = "0.1.0"

from .profiles import (
    Alternative,
    Ballot,
    PreferenceProfile,
    ProfileError,
    ProfileParseError,
    WeakOrder,
    complete_with_unranked,
    pairwise_margins,
    parse_profile,
    serialize_profile,
)
from .rules import RuleResult, results_table, rule_winners

__all__ = [
    "Alternative",
    "Ballot",
    "PreferenceProfile",
    "ProfileError",
    "ProfileParseError",
    "WeakOrder",
    "complete_with_unranked",
    "pairwise_margins",
    "parse_profile",
    "serialize_profile",
    "RuleResult",
    "results_table",
    "rule_winners",
]
