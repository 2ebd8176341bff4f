"""Robustness and structure analytics: margin of victory and
Plackett-Luce (mixture) preference clustering."""

from .mov import MovReport, margin_of_victory
from .plackett_luce import (
    DegenerateRankingsError,
    PLMixture,
    PLParameters,
    PlackettLuce,
    PlackettLuceMixture,
    cluster_summary,
    fit_pl_mixture,
    fit_plackett_luce,
    linearize_weak_orders,
    sample_rankings,
)

__all__ = [
    "MovReport",
    "margin_of_victory",
    "DegenerateRankingsError",
    "PLMixture",
    "PLParameters",
    "PlackettLuce",
    "PlackettLuceMixture",
    "cluster_summary",
    "fit_pl_mixture",
    "fit_plackett_luce",
    "linearize_weak_orders",
    "sample_rankings",
]
