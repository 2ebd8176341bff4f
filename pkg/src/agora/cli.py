"""Command-line interface: batch rule computation, analytics, and the
HTTP service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analytics import cluster_summary, fit_pl_mixture, linearize_weak_orders, margin_of_victory
from .profiles import complete_with_unranked, expanded_orders, parse_profile
from .rules import results_table


def _load_profile(path: str):
    return parse_profile(Path(path).read_text(encoding="utf-8"))


@click.group()
def main():
    """Group decision support toolkit."""


@main.command()
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_csv", default=None, help="Comma-separated rule ids (default: the standard set).")
@click.option("--format", "fmt", type=click.Choice(["records", "table", "both"]), default="both")
def compute(profile_path: str, rules_csv: str | None, fmt: str):
    """Apply voting rules to a profile file and print the results table."""
    profile = _load_profile(profile_path)
    rules = tuple(r.strip() for r in rules_csv.split(",") if r.strip()) if rules_csv else None
    rows = results_table(profile, rules)
    records = [
        {
            "rule": row.rule,
            "winners": sorted(row.winners),
            "scores": (
                {alt: str(s) for alt, s in sorted(row.scores.items())}
                if row.scores is not None
                else None
            ),
            "universes_explored": row.universes_explored,
        }
        for row in rows
    ]
    if fmt in ("records", "both"):
        for record in records:
            click.echo(json.dumps(record, sort_keys=True))
    if fmt in ("table", "both"):
        width = max([len(r.rule) for r in rows], default=4)
        click.echo(f"{'rule':<{width}}  winners")
        for record in records:
            scores = record["scores"]
            extra = (
                "  " + " ".join(f"{a}={s}" for a, s in scores.items())
                if scores
                else f"  universes={record['universes_explored']}"
            )
            click.echo(f"{record['rule']:<{width}}  {','.join(record['winners'])}{extra}")


@main.command()
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mov", "mov_rule", default=None, help="Rule to compute the margin of victory for.")
@click.option("--mixture", "mixture_k", default=None, type=int, help="Fit a k-component ranking mixture.")
@click.option("--seed", default=0, type=int, show_default=True)
def analyze(profile_path: str, mov_rule: str | None, mixture_k: int | None, seed: int):
    """Robustness and clustering analytics for a profile file."""
    profile = _load_profile(profile_path)
    if mov_rule is None and mixture_k is None:
        raise click.UsageError("nothing to do: pass --mov and/or --mixture")
    if mov_rule is not None:
        report = margin_of_victory(profile, mov_rule)
        click.echo(
            json.dumps(
                {
                    "kind": "mov",
                    "rule": report.rule,
                    "mov": report.mov,
                    "method": report.method,
                    "bounds": list(report.bounds) if report.bounds else None,
                },
                sort_keys=True,
            )
        )
    if mixture_k is not None:
        universe = set(profile.alternative_ids)
        completed = [
            complete_with_unranked(o, universe) for o in expanded_orders(profile)
        ]
        rankings = linearize_weak_orders(completed, seed=seed)
        mixture = fit_pl_mixture(rankings, k=mixture_k, seed=seed)
        click.echo(
            json.dumps(
                {
                    "kind": "mixture",
                    "estimator": mixture.estimator,
                    "k": mixture.k,
                    "seed": seed,
                    "weights": list(mixture.weights),
                    "components": [dict(c.gamma) for c in mixture.components],
                    "loglik": mixture.loglik,
                    "clusters": cluster_summary(mixture),
                },
                sort_keys=True,
            )
        )


@main.command()
@click.option("--log-dir", required=True, type=click.Path(file_okay=False))
@click.option("--listen", default="127.0.0.1:8080", show_default=True)
def serve(log_dir: str, listen: str):
    """Run the HTTP service over an event-log directory."""
    import uvicorn

    from .service import DecisionService, create_app

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    app = create_app(DecisionService(log_dir))
    uvicorn.run(app, host=host, port=int(port))


if __name__ == "__main__":
    sys.exit(main())
