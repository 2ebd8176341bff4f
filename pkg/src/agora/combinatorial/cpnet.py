"""Conditional preference networks over binary issues, and sequential
multi-issue voting.

A CP-net holds, per issue, a table of strict preferences over that
issue's two values, one row per combination of parent values.  Voting in
a combinatorial domain proceeds issue by issue: a CP-net voter's vote on
the current issue is read from the table row selected by the already
decided parents, live voters supply recorded values, and each issue is
settled by majority with a configured tie-break value.

Text format, one directive per line (comments with ``#``)::

    issue x
    issue y: accept,reject
    parents y: x
    row x: yes > no
    row y [x=yes]: reject > accept
    row y [x=no]: accept > reject
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

Condition = frozenset  # of (issue_id, value) pairs


class CPNetError(ValueError):
    pass


@dataclass(frozen=True)
class Issue:
    id: str
    domain: tuple[str, str] = ("yes", "no")

    def __post_init__(self):
        if len(self.domain) != 2 or len(set(self.domain)) != 2:
            raise CPNetError(f"issue {self.id!r} needs exactly two distinct values")


@dataclass(frozen=True)
class CPNet:
    issues: tuple[Issue, ...]
    parents: dict[str, tuple[str, ...]] = field(default_factory=dict)
    cpt: dict[str, dict[Condition, tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self):
        ids = [i.id for i in self.issues]
        if len(set(ids)) != len(ids):
            raise CPNetError("duplicate issue ids")

    def issue(self, issue_id: str) -> Issue:
        for i in self.issues:
            if i.id == issue_id:
                return i
        raise CPNetError(f"unknown issue {issue_id!r}")

    def parents_of(self, issue_id: str) -> tuple[str, ...]:
        return self.parents.get(issue_id, ())


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_cpnet(net: CPNet) -> ValidationReport:
    """Deep validation: parent references, acyclicity, CPT completeness."""
    problems: list[str] = []
    ids = {i.id for i in net.issues}

    for issue_id, parents in net.parents.items():
        if issue_id not in ids:
            problems.append(f"parents declared for unknown issue {issue_id!r}")
            continue
        for p in parents:
            if p not in ids:
                problems.append(f"issue {issue_id!r} has unknown parent {p!r}")
            if p == issue_id:
                problems.append(f"issue {issue_id!r} lists itself as a parent")

    # cycle detection over the parent->child graph
    state: dict[str, int] = {}

    def visit(node: str, trail: list[str]) -> None:
        state[node] = 1
        for child in ids:
            if node in net.parents_of(child):
                if state.get(child) == 1:
                    cycle = trail + [node, child]
                    problems.append("dependency cycle: " + " -> ".join(cycle[cycle.index(child):]))
                elif state.get(child) is None:
                    visit(child, trail + [node])
        state[node] = 2

    for node in sorted(ids):
        if state.get(node) is None:
            visit(node, [])

    for issue in net.issues:
        parents = [p for p in net.parents_of(issue.id) if p in ids and p != issue.id]
        rows = net.cpt.get(issue.id, {})
        expected = []
        domains = []
        for p in parents:
            domains.append([(p, v) for v in net.issue(p).domain])
        for combo in itertools.product(*domains):
            expected.append(Condition(combo))
        for condition in expected:
            if condition not in rows:
                pretty = ",".join(f"{p}={v}" for p, v in sorted(condition)) or "(none)"
                problems.append(f"issue {issue.id!r} missing CPT row for {pretty}")
        for condition, order in rows.items():
            if condition not in expected:
                pretty = ",".join(f"{p}={v}" for p, v in sorted(condition))
                problems.append(f"issue {issue.id!r} has spurious CPT row for {pretty}")
            if tuple(sorted(order)) != tuple(sorted(issue.domain)):
                problems.append(
                    f"issue {issue.id!r} row is not a strict order over {issue.domain}"
                )
    return ValidationReport(tuple(problems))


def is_order_legal(net: CPNet, order: tuple[str, ...] | list[str]) -> bool:
    """True iff every issue's parents appear before it in ``order``."""
    ids = {i.id for i in net.issues}
    if set(order) != ids or len(order) != len(ids):
        raise CPNetError(f"order {order!r} is not a permutation of the issues")
    position = {issue_id: k for k, issue_id in enumerate(order)}
    return all(
        position[p] < position[issue_id]
        for issue_id in order
        for p in net.parents_of(issue_id)
    )


def local_vote(net: CPNet, issue_id: str, decided: dict[str, str]) -> str:
    """The net's preferred value for one issue given decided parent values."""
    issue = net.issue(issue_id)
    parents = net.parents_of(issue_id)
    missing = [p for p in parents if p not in decided]
    if missing:
        raise CPNetError(f"issue {issue_id!r} has undecided parent(s) {missing}")
    condition = Condition((p, decided[p]) for p in parents)
    rows = net.cpt.get(issue_id, {})
    if condition not in rows:
        pretty = ",".join(f"{p}={decided[p]}" for p in parents) or "(none)"
        raise CPNetError(f"issue {issue_id!r} has no CPT row for {pretty}")
    return rows[condition][0]


@dataclass(frozen=True)
class MultiPollConfig:
    issue_order: tuple[str, ...]
    tie_break: dict[str, str]
    local_rule: str = "majority"

    def __post_init__(self):
        if len(set(self.issue_order)) != len(self.issue_order):
            raise CPNetError("issue_order repeats an issue")
        if self.local_rule != "majority":
            raise CPNetError(f"unsupported local rule {self.local_rule!r}")


@dataclass(frozen=True)
class IssueDecision:
    issue: str
    value: str
    tally: dict[str, int]
    tie_broken: bool


Voter = CPNet | dict[str, str]  # a net, or recorded per-issue values


def decide_issue(
    voters: list[Voter], issue_id: str, decided: dict[str, str], config: MultiPollConfig
) -> IssueDecision:
    """Majority decision on one issue given the decided prefix."""
    tally: dict[str, int] = {}
    for voter in voters:
        if isinstance(voter, CPNet):
            value = local_vote(voter, issue_id, decided)
        else:
            if issue_id not in voter:
                raise CPNetError(f"live voter has no recorded vote on {issue_id!r}")
            value = voter[issue_id]
        tally[value] = tally.get(value, 0) + 1
    values = sorted(tally, key=lambda v: -tally[v])
    tie = len(values) > 1 and tally[values[0]] == tally[values[1]]
    winner = config.tie_break[issue_id] if tie else (values[0] if values else config.tie_break[issue_id])
    return IssueDecision(issue=issue_id, value=winner, tally=tally, tie_broken=tie)


def sequential_vote(
    voters: list[Voter], config: MultiPollConfig
) -> tuple[dict[str, str], list[IssueDecision]]:
    """Decide all issues in order; returns the assignment and per-issue tallies."""
    for voter in voters:
        if isinstance(voter, CPNet):
            if not is_order_legal(voter, config.issue_order):
                raise CPNetError(
                    f"CP-net is not legal for issue order {config.issue_order}"
                )
    decided: dict[str, str] = {}
    decisions: list[IssueDecision] = []
    for issue_id in config.issue_order:
        decision = decide_issue(voters, issue_id, decided, config)
        decided[issue_id] = decision.value
        decisions.append(decision)
    return decided, decisions


# ---------------------------------------------------------------------------
# Text format


def parse_cpnet(text: str) -> CPNet:
    issues: list[Issue] = []
    parents: dict[str, tuple[str, ...]] = {}
    cpt: dict[str, dict[Condition, tuple[str, str]]] = {}

    def known(issue_id: str, lineno: int) -> Issue:
        for i in issues:
            if i.id == issue_id:
                return i
        raise CPNetError(f"line {lineno}: unknown issue {issue_id!r}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("issue "):
            body = line[len("issue "):]
            name, sep, domain_tok = body.partition(":")
            name = name.strip()
            if sep:
                domain = tuple(v.strip() for v in domain_tok.split(","))
            else:
                domain = ("yes", "no")
            if any(i.id == name for i in issues):
                raise CPNetError(f"line {lineno}: duplicate issue {name!r}")
            issues.append(Issue(name, domain))  # domain arity checked by Issue
        elif line.startswith("parents "):
            body = line[len("parents "):]
            name, sep, plist = body.partition(":")
            if not sep:
                raise CPNetError(f"line {lineno}: expected 'parents <id>: p1,p2'")
            name = name.strip()
            known(name, lineno)
            parents[name] = tuple(p.strip() for p in plist.split(",") if p.strip())
        elif line.startswith("row "):
            body = line[len("row "):]
            head, sep, order_tok = body.partition(":")
            if not sep:
                raise CPNetError(f"line {lineno}: expected 'row <id> [cond]: v1 > v2'")
            head = head.strip()
            if "[" in head:
                name, _, cond_tok = head.partition("[")
                name = name.strip()
                cond_tok = cond_tok.rstrip("]").strip()
            else:
                name, cond_tok = head, ""
            issue = known(name, lineno)
            pairs = []
            if cond_tok:
                for clause in cond_tok.split(","):
                    pid, eq, val = clause.partition("=")
                    if not eq:
                        raise CPNetError(f"line {lineno}: bad condition {clause!r}")
                    pairs.append((pid.strip(), val.strip()))
            order = tuple(v.strip() for v in order_tok.split(">"))
            if len(order) != 2:
                raise CPNetError(f"line {lineno}: row must order both values")
            cpt.setdefault(issue.id, {})[Condition(pairs)] = order
        else:
            raise CPNetError(f"line {lineno}: unrecognised directive {line!r}")
    if not issues:
        raise CPNetError("document declares no issues")
    return CPNet(tuple(issues), parents, cpt)


def serialize_cpnet(net: CPNet) -> str:
    lines = []
    for issue in net.issues:
        if issue.domain == ("yes", "no"):
            lines.append(f"issue {issue.id}")
        else:
            lines.append(f"issue {issue.id}: {','.join(issue.domain)}")
    for issue in net.issues:
        parents = net.parents_of(issue.id)
        if parents:
            lines.append(f"parents {issue.id}: {','.join(parents)}")
    for issue in net.issues:
        parents = net.parents_of(issue.id)
        for condition, order in sorted(
            net.cpt.get(issue.id, {}).items(), key=lambda kv: sorted(kv[0])
        ):
            by_parent = dict(condition)
            cond = ",".join(f"{p}={by_parent[p]}" for p in parents if p in by_parent)
            head = f"row {issue.id} [{cond}]" if cond else f"row {issue.id}"
            lines.append(f"{head}: {' > '.join(order)}")
    return "\n".join(lines) + "\n"
