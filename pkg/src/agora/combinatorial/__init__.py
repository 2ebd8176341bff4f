"""Combinatorial-domain decision making: CP-nets with sequential voting,
and serial-dictatorship allocation."""

from .allocation import (
    AllocationError,
    AllocationInstance,
    ConditionalRanking,
    instance_from_dict,
    instance_to_dict,
    serial_dictatorship,
)
from .cpnet import (
    CPNet,
    CPNetError,
    Issue,
    IssueDecision,
    MultiPollConfig,
    ValidationReport,
    decide_issue,
    is_order_legal,
    local_vote,
    parse_cpnet,
    sequential_vote,
    serialize_cpnet,
    validate_cpnet,
)

__all__ = [
    "AllocationError",
    "AllocationInstance",
    "ConditionalRanking",
    "instance_from_dict",
    "instance_to_dict",
    "serial_dictatorship",
    "CPNet",
    "CPNetError",
    "Issue",
    "IssueDecision",
    "MultiPollConfig",
    "ValidationReport",
    "decide_issue",
    "is_order_legal",
    "local_vote",
    "parse_cpnet",
    "sequential_vote",
    "serialize_cpnet",
    "validate_cpnet",
]
