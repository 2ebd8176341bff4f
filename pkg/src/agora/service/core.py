"""Poll lifecycle, ballot intake, results computation and matching
sessions, persisted through the append-only event log.

Every mutation is one event; events carry all derived data (snapshots,
decisions, matching outcomes) so that replaying the log rebuilds byte-
identical state without recomputation.  Writes to one poll are
serialized by a per-poll lock; reads go straight to the latest committed
state.
"""

from __future__ import annotations

import hashlib
import threading
import time
from collections import defaultdict
from pathlib import Path

from ..analytics import cluster_summary, fit_pl_mixture, linearize_weak_orders, margin_of_victory
from ..combinatorial import (
    AllocationError,
    CPNetError,
    Issue,
    MultiPollConfig,
    decide_issue,
    instance_from_dict,
    is_order_legal,
    parse_cpnet,
    serial_dictatorship,
    validate_cpnet,
)
from ..matching import (
    CourseSpec,
    Feature,
    FeatureSchema,
    MatchingError,
    MatchingInstance,
    StudentApplication,
    explain_course,
    rematch,
)
from ..profiles import (
    Alternative,
    Ballot,
    PreferenceProfile,
    ProfileError,
    WeakOrder,
    serialize_profile,
)
from ..rules import RuleError, default_rules, results_table, score_vector_for
from .log import EventLog, canonical_json

UI_MODES = ("one_column", "two_column", "sliders", "stars", "yes_no")
POLL_KINDS = ("single", "multi_issue", "allocation", "matching")
CARDINAL_RANGES = {"sliders": 100, "stars": 10}


class ServiceError(Exception):
    """API-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class DecisionService:
    """Replayable service state over one event log directory."""

    def __init__(self, log_dir: str | Path, max_ballot_revisions: int = 1000):
        self.log = EventLog(Path(log_dir) / "events.ndjson")
        self.max_ballot_revisions = max_ballot_revisions
        self.polls: dict[str, dict] = {}
        self.ballots: dict[str, dict[str, list[dict]]] = defaultdict(dict)
        self.snapshots: dict[str, dict[str, dict]] = defaultdict(dict)
        self.decisions: dict[str, list[dict]] = defaultdict(list)
        self.sessions: dict[str, dict] = {}
        self._poll_counter = 0
        self._session_counter = 0
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._commit_lock = threading.RLock()
        for event in self.log.replay():
            self._apply(event)

    # ------------------------------------------------------------------
    # event machinery

    def _commit(self, event: dict) -> None:
        with self._commit_lock:
            self.log.append(event)
            self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "poll_created":
            poll = event["poll"]
            self.polls[poll["id"]] = poll
            self._poll_counter = max(self._poll_counter, int(poll["id"][1:]))
        elif kind == "ballot_submitted":
            revisions = self.ballots[event["poll_id"]].setdefault(event["voter"], [])
            revisions.append(
                {
                    "revision": event["revision"],
                    "payload": event["payload"],
                    "ranking": event["ranking"],
                    "submitted_at": event["submitted_at"],
                }
            )
        elif kind == "poll_closed":
            self.polls[event["poll_id"]]["status"] = "closed"
        elif kind == "results_snapshot":
            self.snapshots[event["poll_id"]][event["cache_key"]] = {
                "snapshot": event["snapshot"],
                "digest": event["digest"],
                "computed_at": event["computed_at"],
            }
        elif kind == "issue_advanced":
            self.decisions[event["poll_id"]].append(event["decision"])
        elif kind == "matching_created":
            session = {
                "id": event["session_id"],
                "instance": event["instance"],
                "outcomes": [],
            }
            self.sessions[session["id"]] = session
            self._session_counter = max(self._session_counter, int(session["id"][1:]))
        elif kind == "matching_instance":
            self.sessions[event["session_id"]]["instance"] = event["instance"]
        elif kind == "matching_run":
            self.sessions[event["session_id"]]["outcomes"].append(event["outcome"])
        else:  # unknown event types are a replay hazard, fail loudly
            raise ServiceError("corrupt_log", f"unknown event type {kind!r}", 500)

    def state_digest(self) -> str:
        """Digest of all replayable state; equal digests mean equal state."""
        body = {
            "polls": self.polls,
            "ballots": self.ballots,
            "snapshots": self.snapshots,
            "decisions": self.decisions,
            "sessions": self.sessions,
        }
        return _sha256(canonical_json(body))

    # ------------------------------------------------------------------
    # polls

    def create_poll(self, definition: dict) -> dict:
        kind = definition.get("kind", "single")
        if kind not in POLL_KINDS:
            raise ServiceError("invalid_definition", f"unknown poll kind {kind!r}")
        title = definition.get("title", "")
        created_by = definition.get("created_by", "anonymous")
        config = dict(definition.get("config", {}))
        poll: dict = {
            "kind": kind,
            "title": title,
            "status": "open",
            "created_by": created_by,
            "config": config,
        }
        if kind == "single":
            poll.update(self._validate_single_definition(definition, config))
        elif kind == "multi_issue":
            poll.update(self._validate_multi_issue_definition(definition, config))
        elif kind == "allocation":
            poll.update(self._validate_allocation_definition(definition))
        else:  # matching reference poll
            session_id = config.get("session_id")
            if session_id not in self.sessions:
                raise ServiceError(
                    "invalid_definition", f"matching poll references unknown session {session_id!r}"
                )
        with self._commit_lock:
            poll_id = f"p{self._poll_counter + 1}"
            poll["id"] = poll_id
            self._commit({"type": "poll_created", "poll": poll, "ts": time.time()})
        return self.polls[poll_id]

    def _validate_single_definition(self, definition: dict, config: dict) -> dict:
        alternatives = definition.get("alternatives") or []
        if len(alternatives) < 2:
            raise ServiceError("invalid_definition", "a poll needs at least 2 alternatives")
        try:
            alts = [
                Alternative(a["id"], a.get("label", "")) if isinstance(a, dict) else Alternative(a)
                for a in alternatives
            ]
            PreferenceProfile(tuple(alts))  # id uniqueness
        except (ProfileError, TypeError, KeyError) as exc:
            raise ServiceError("invalid_definition", str(exc)) from exc
        ui_mode = definition.get("ui_mode", "one_column")
        if ui_mode not in UI_MODES:
            raise ServiceError("invalid_definition", f"unknown ui_mode {ui_mode!r}")
        m = len(alts)
        rules = tuple(config.get("rules") or default_rules(m))
        for rule in rules:
            if rule in ("stv_put", "ranked_pairs_put"):
                continue
            try:
                score_vector_for(rule, m)
            except RuleError as exc:
                raise ServiceError("invalid_definition", str(exc)) from exc
        config["rules"] = list(rules)
        config.setdefault("mixture_k", 2)
        config.setdefault("mov_brute_force_max", 6)
        if not isinstance(config["mixture_k"], int) or config["mixture_k"] < 1:
            raise ServiceError("invalid_definition", "mixture_k must be a positive integer")
        return {
            "ui_mode": ui_mode,
            "alternatives": [{"id": a.id, "label": a.label} for a in alts],
        }

    def _validate_multi_issue_definition(self, definition: dict, config: dict) -> dict:
        issues = definition.get("issues") or []
        if not issues:
            raise ServiceError("invalid_definition", "a multi-issue poll needs issues")
        try:
            parsed = [
                Issue(i["id"], tuple(i.get("domain", ("yes", "no")))) for i in issues
            ]
        except (CPNetError, TypeError, KeyError) as exc:
            raise ServiceError("invalid_definition", str(exc)) from exc
        ids = [i.id for i in parsed]
        if len(set(ids)) != len(ids):
            raise ServiceError("invalid_definition", "duplicate issue ids")
        order = config.get("issue_order") or ids
        if sorted(order) != sorted(ids):
            raise ServiceError(
                "invalid_definition", "issue_order must cover every issue exactly once"
            )
        tie_break = config.get("tie_break") or {}
        domains = {i.id: i.domain for i in parsed}
        for issue_id in ids:
            value = tie_break.get(issue_id, domains[issue_id][1])
            if value not in domains[issue_id]:
                raise ServiceError(
                    "invalid_definition",
                    f"tie_break for {issue_id!r} must be one of {domains[issue_id]}",
                )
            tie_break[issue_id] = value
        template = config.get("dependency_template") or {}
        position = {issue_id: k for k, issue_id in enumerate(order)}
        for issue_id, parents in template.items():
            if issue_id not in position:
                raise ServiceError("invalid_definition", f"template names unknown issue {issue_id!r}")
            for p in parents:
                if p not in position or position[p] >= position[issue_id]:
                    raise ServiceError(
                        "invalid_definition",
                        f"issue order is not sequentially legal: {p!r} must precede {issue_id!r}",
                    )
        config["issue_order"] = list(order)
        config["tie_break"] = tie_break
        return {"issues": [{"id": i.id, "domain": list(i.domain)} for i in parsed]}

    def _validate_allocation_definition(self, definition: dict) -> dict:
        doc = definition.get("instance")
        try:
            instance_from_dict(doc or {})
        except AllocationError as exc:
            raise ServiceError("invalid_definition", str(exc)) from exc
        return {"instance": doc}

    def get_poll(self, poll_id: str) -> dict:
        poll = self.polls.get(poll_id)
        if poll is None:
            raise ServiceError("unknown_poll", f"no poll {poll_id!r}", 404)
        return poll

    def close_poll(self, poll_id: str) -> dict:
        poll = self.get_poll(poll_id)
        with self._locks[poll_id]:
            if poll["status"] == "open":
                self._commit({"type": "poll_closed", "poll_id": poll_id, "ts": time.time()})
        return self.get_poll(poll_id)

    # ------------------------------------------------------------------
    # ballots

    def submit_ballot(self, poll_id: str, voter: str, payload: dict) -> dict:
        poll = self.get_poll(poll_id)
        if not voter or not isinstance(voter, str):
            raise ServiceError("invalid_payload", "voter token required")
        with self._locks[poll_id]:
            if poll["status"] != "open":
                raise ServiceError("poll_closed", f"poll {poll_id} is closed", 409)
            revisions = self.ballots[poll_id].get(voter, [])
            if len(revisions) >= self.max_ballot_revisions:
                raise ServiceError("rate_limited", "ballot revision cap reached", 429)
            if poll["kind"] == "single":
                ranking = self._derive_single_ranking(poll, payload)
            elif poll["kind"] == "multi_issue":
                ranking = self._derive_multi_issue_ballot(poll, payload, revisions)
            else:
                raise ServiceError(
                    "invalid_payload",
                    f"{poll['kind']} polls do not accept ballots",
                )
            event = {
                "type": "ballot_submitted",
                "poll_id": poll_id,
                "voter": voter,
                "revision": len(revisions) + 1,
                "payload": payload,
                "ranking": ranking,
                "submitted_at": time.time(),
                "ts": time.time(),
            }
            self._commit(event)
        return self.effective_ballot(poll_id, voter)

    def _derive_single_ranking(self, poll: dict, payload: dict) -> list[list[str]]:
        """Validate a ballot payload and derive its weak order (as sorted
        group lists); cardinal payloads keep their raw values in the event."""
        ids = [a["id"] for a in poll["alternatives"]]
        universe = set(ids)
        mode = poll["ui_mode"]
        if mode in ("one_column", "two_column"):
            groups = payload.get("ranking")
            if not isinstance(groups, list):
                raise ServiceError("invalid_payload", "expected 'ranking': list of groups")
            try:
                order = WeakOrder(groups)
            except (ProfileError, TypeError) as exc:
                raise ServiceError("invalid_payload", str(exc)) from exc
            unknown = order.ids() - universe
            if unknown:
                raise ServiceError("invalid_payload", f"unknown alternative(s) {sorted(unknown)}")
            if mode == "one_column" and order.ids() != universe:
                missing = sorted(universe - order.ids())
                raise ServiceError(
                    "invalid_payload", f"one-column ballots must rank everything; missing {missing}"
                )
            return [sorted(g) for g in order.groups]
        if mode in CARDINAL_RANGES:
            top = CARDINAL_RANGES[mode]
            values = payload.get("values")
            if not isinstance(values, dict) or set(values) != universe:
                raise ServiceError(
                    "invalid_payload", f"expected 'values' covering exactly {sorted(universe)}"
                )
            for alt, value in values.items():
                if not isinstance(value, (int, float)) or not 0 <= value <= top:
                    raise ServiceError(
                        "invalid_payload", f"value for {alt!r} must lie in 0..{top}"
                    )
            by_value: dict[float, list[str]] = defaultdict(list)
            for alt, value in values.items():
                by_value[float(value)].append(alt)
            return [sorted(by_value[v]) for v in sorted(by_value, reverse=True)]
        # yes/no approval
        approved = payload.get("approved")
        if not isinstance(approved, list):
            raise ServiceError("invalid_payload", "expected 'approved': list of ids")
        approved_set = set(approved)
        unknown = approved_set - universe
        if unknown:
            raise ServiceError("invalid_payload", f"unknown alternative(s) {sorted(unknown)}")
        groups = []
        if approved_set:
            groups.append(sorted(approved_set))
        rest = universe - approved_set
        if rest:
            groups.append(sorted(rest))
        return groups

    def _derive_multi_issue_ballot(
        self, poll: dict, payload: dict, revisions: list[dict]
    ) -> dict:
        issues = {i["id"]: tuple(i["domain"]) for i in poll["issues"]}
        order = tuple(poll["config"]["issue_order"])
        if "cpnet" in payload:
            try:
                net = parse_cpnet(payload["cpnet"])
            except CPNetError as exc:
                raise ServiceError("invalid_payload", str(exc)) from exc
            declared = {i.id: i.domain for i in net.issues}
            if declared != issues:
                raise ServiceError(
                    "invalid_payload",
                    "CP-net must declare exactly the poll's issues and domains",
                )
            report = validate_cpnet(net)
            if not report.ok:
                raise ServiceError(
                    "invalid_payload", "invalid CP-net: " + "; ".join(report.violations)
                )
            if not is_order_legal(net, order):
                raise ServiceError(
                    "invalid_payload",
                    f"CP-net is not sequentially legal for issue order {list(order)}",
                )
            return {"kind": "cpnet"}
        if "votes" in payload:
            votes = payload["votes"]
            if not isinstance(votes, dict):
                raise ServiceError("invalid_payload", "expected 'votes': {issue: value}")
            decided = {d["issue"] for d in self.decisions[poll["id"]]}
            for issue_id, value in votes.items():
                if issue_id not in issues:
                    raise ServiceError("invalid_payload", f"unknown issue {issue_id!r}")
                if value not in issues[issue_id]:
                    raise ServiceError(
                        "invalid_payload", f"value {value!r} not in domain of {issue_id!r}"
                    )
                if issue_id in decided:
                    raise ServiceError(
                        "invalid_payload", f"issue {issue_id!r} is already decided"
                    )
            merged = {}
            if revisions and revisions[-1]["ranking"].get("kind") == "live":
                merged.update(revisions[-1]["ranking"]["votes"])
            merged.update(votes)
            return {"kind": "live", "votes": merged}
        raise ServiceError("invalid_payload", "expected 'cpnet' or 'votes' payload")

    def effective_ballot(self, poll_id: str, voter: str) -> dict:
        revisions = self.ballots.get(poll_id, {}).get(voter)
        if not revisions:
            raise ServiceError("unknown_ballot", f"no ballot from {voter!r}", 404)
        latest = revisions[-1]
        return {
            "poll_id": poll_id,
            "voter": voter,
            "revision": latest["revision"],
            "payload": latest["payload"],
            "ranking": latest["ranking"],
            "submitted_at": latest["submitted_at"],
        }

    def effective_ballots(self, poll_id: str) -> dict[str, dict]:
        return {
            voter: revisions[-1]
            for voter, revisions in sorted(self.ballots.get(poll_id, {}).items())
            if revisions
        }

    # ------------------------------------------------------------------
    # results

    def compute_results(self, poll_id: str, seed: int = 0) -> dict:
        poll = self.get_poll(poll_id)
        with self._locks[poll_id]:
            if poll["kind"] == "single":
                return self._compute_single_results(poll, seed)
            if poll["kind"] == "allocation":
                return self._compute_allocation_results(poll)
            if poll["kind"] == "multi_issue":
                return self._multi_issue_status(poll)
            session_id = poll["config"]["session_id"]
            return self.latest_outcome(session_id)

    def _frozen_profile(self, poll: dict) -> PreferenceProfile:
        alts = tuple(Alternative(a["id"], a["label"]) for a in poll["alternatives"])
        effective = self.effective_ballots(poll["id"])
        if not effective:
            raise ServiceError("no_ballots", "poll has no ballots yet", 409)
        ballots = tuple(
            Ballot(voter=voter, order=WeakOrder(record["ranking"]), weight=1)
            for voter, record in effective.items()
        )
        return PreferenceProfile(alts, ballots).completed()

    def _compute_single_results(self, poll: dict, seed: int) -> dict:
        config = poll["config"]
        profile = self._frozen_profile(poll)
        digest = _sha256(serialize_profile(profile))
        cache_key = f"{digest}:{seed}"
        cached = self.snapshots[poll["id"]].get(cache_key)
        if cached is not None:
            return cached

        rules = tuple(config["rules"])
        table = [
            {
                "rule": row.rule,
                "winners": sorted(row.winners),
                "scores": (
                    {alt: str(score) for alt, score in sorted(row.scores.items())}
                    if row.scores is not None
                    else None
                ),
                "universes_explored": row.universes_explored,
            }
            for row in results_table(profile, rules)
        ]
        mov_reports = []
        for rule in rules:
            report = margin_of_victory(
                profile, rule, brute_force_max=config["mov_brute_force_max"]
            )
            mov_reports.append(
                {
                    "rule": rule,
                    "mov": report.mov,
                    "method": report.method,
                    "bounds": list(report.bounds) if report.bounds else None,
                }
            )

        requested_k = config["mixture_k"]
        effective_k = min(requested_k, profile.num_voters)
        orders = [b.order for b in profile.ballots]
        rankings = linearize_weak_orders(orders, seed=seed)
        items = list(profile.alternative_ids)
        mixture = fit_pl_mixture(
            [tuple(r) for r in rankings], k=effective_k, seed=seed
        )
        mixture_report = {
            "estimator": mixture.estimator,
            "requested_k": requested_k,
            "k": mixture.k,
            "seed": seed,
            "linearization_seed": seed,
            "weights": list(mixture.weights),
            "components": [
                {alt: comp.gamma[alt] for alt in items} for comp in mixture.components
            ],
            "loglik": mixture.loglik,
            "n_iter": mixture.n_iter,
            "clusters": cluster_summary(mixture),
        }

        snapshot = {
            "poll_id": poll["id"],
            "kind": "single",
            "profile_digest": digest,
            "seed": seed,
            "n": profile.num_voters,
            "config": {
                "rules": list(rules),
                "mixture_k": requested_k,
                "mov_brute_force_max": config["mov_brute_force_max"],
            },
            "results_table": table,
            "mov": mov_reports,
            "mixture": mixture_report,
        }
        return self._store_snapshot(poll["id"], cache_key, snapshot)

    def _compute_allocation_results(self, poll: dict) -> dict:
        doc = poll["instance"]
        digest = _sha256(canonical_json(doc))
        cache_key = f"{digest}:-"
        cached = self.snapshots[poll["id"]].get(cache_key)
        if cached is not None:
            return cached
        instance = instance_from_dict(doc)
        try:
            allocation = serial_dictatorship(instance)
        except AllocationError as exc:
            raise ServiceError("invalid_instance", str(exc)) from exc
        snapshot = {
            "poll_id": poll["id"],
            "kind": "allocation",
            "instance_digest": digest,
            "allocation": allocation,
        }
        return self._store_snapshot(poll["id"], cache_key, snapshot)

    def _store_snapshot(self, poll_id: str, cache_key: str, snapshot: dict) -> dict:
        digest = _sha256(canonical_json(snapshot))
        self._commit(
            {
                "type": "results_snapshot",
                "poll_id": poll_id,
                "cache_key": cache_key,
                "digest": digest,
                "snapshot": snapshot,
                "computed_at": time.time(),
                "ts": time.time(),
            }
        )
        return self.snapshots[poll_id][cache_key]

    def _multi_issue_status(self, poll: dict) -> dict:
        decided = self.decisions[poll["id"]]
        order = poll["config"]["issue_order"]
        return {
            "poll_id": poll["id"],
            "kind": "multi_issue",
            "decided": decided,
            "assignment": {d["issue"]: d["value"] for d in decided},
            "current_issue": order[len(decided)] if len(decided) < len(order) else None,
            "status": poll["status"],
        }

    # ------------------------------------------------------------------
    # multi-poll advancement

    def advance_multipoll(self, poll_id: str, force: bool = False) -> dict:
        poll = self.get_poll(poll_id)
        if poll["kind"] != "multi_issue":
            raise ServiceError("not_multi_issue", f"poll {poll_id} is not multi-issue")
        with self._locks[poll_id]:
            if poll["status"] != "open":
                raise ServiceError("poll_closed", f"poll {poll_id} is closed", 409)
            order = tuple(poll["config"]["issue_order"])
            decided_records = self.decisions[poll_id]
            decided = {d["issue"]: d["value"] for d in decided_records}
            current = order[len(decided_records)]

            voters: list = []
            skipped: list[str] = []
            for voter, record in self.effective_ballots(poll_id).items():
                ranking = record["ranking"]
                if ranking["kind"] == "cpnet":
                    voters.append(parse_cpnet(record["payload"]["cpnet"]))
                else:
                    votes = ranking["votes"]
                    if current not in votes:
                        if not force:
                            raise ServiceError(
                                "missing_votes",
                                f"live voter {voter!r} has not voted on {current!r}",
                                409,
                            )
                        skipped.append(voter)
                    else:
                        voters.append({current: votes[current]})
            config = MultiPollConfig(
                issue_order=order, tie_break=dict(poll["config"]["tie_break"])
            )
            decision = decide_issue(voters, current, decided, config)
            record = {
                "issue": decision.issue,
                "value": decision.value,
                "tally": decision.tally,
                "tie_broken": decision.tie_broken,
                "forced": force,
                "skipped_voters": sorted(skipped),
            }
            self._commit(
                {
                    "type": "issue_advanced",
                    "poll_id": poll_id,
                    "decision": record,
                    "ts": time.time(),
                }
            )
            if len(self.decisions[poll_id]) == len(order):
                self._commit({"type": "poll_closed", "poll_id": poll_id, "ts": time.time()})
            return record

    def issue_state(self, poll_id: str, issue_id: str) -> dict:
        poll = self.get_poll(poll_id)
        if poll["kind"] != "multi_issue":
            raise ServiceError("not_multi_issue", f"poll {poll_id} is not multi-issue")
        order = poll["config"]["issue_order"]
        if issue_id not in order:
            raise ServiceError("unknown_issue", f"no issue {issue_id!r}", 404)
        for decision in self.decisions[poll_id]:
            if decision["issue"] == issue_id:
                return {"issue": issue_id, "status": "decided", **decision}
        decided_count = len(self.decisions[poll_id])
        status = "current" if order.index(issue_id) == decided_count else "pending"
        return {"issue": issue_id, "status": status}

    # ------------------------------------------------------------------
    # matching sessions

    def create_matching(self, instance_doc: dict) -> dict:
        self._check_instance_shape(instance_doc)
        with self._commit_lock:
            session_id = f"m{self._session_counter + 1}"
            self._commit(
                {
                    "type": "matching_created",
                    "session_id": session_id,
                    "instance": instance_doc,
                    "ts": time.time(),
                }
            )
        return self.get_session(session_id)

    def get_session(self, session_id: str) -> dict:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError("unknown_session", f"no matching session {session_id!r}", 404)
        return session

    @staticmethod
    def _check_instance_shape(doc) -> None:
        if not isinstance(doc, dict):
            raise ServiceError("invalid_instance", "instance document must be an object")
        for key, kind in (("schema", list), ("courses", list), ("students", list)):
            if not isinstance(doc.get(key), kind):
                raise ServiceError("invalid_instance", f"instance needs {key!r} as a list")

    def replace_instance(self, session_id: str, instance_doc: dict) -> dict:
        self.get_session(session_id)
        self._check_instance_shape(instance_doc)
        with self._locks[session_id]:
            self._commit(
                {
                    "type": "matching_instance",
                    "session_id": session_id,
                    "instance": instance_doc,
                    "ts": time.time(),
                }
            )
        return self.get_session(session_id)

    @staticmethod
    def build_matching_instance(doc: dict) -> MatchingInstance:
        try:
            schema = FeatureSchema(
                tuple(Feature(f["name"], float(f["min"]), float(f["max"])) for f in doc["schema"])
            )
            courses = tuple(
                CourseSpec(
                    course=c["course"],
                    weights=tuple(float(w) for w in c["weights"]),
                    capacity=int(c["capacity"]),
                    pinned=frozenset(c.get("pinned", ())),
                )
                for c in doc["courses"]
            )
            students = tuple(
                StudentApplication(
                    student=s["student"],
                    features=tuple(float(v) for v in s["features"]),
                    course_ranking=tuple(s.get("ranking", ())),
                )
                for s in doc["students"]
            )
            return MatchingInstance(schema=schema, courses=courses, students=students)
        except MatchingError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MatchingError(f"malformed matching instance: {exc}") from exc

    def run_matching(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        with self._locks[session_id]:
            try:
                instance = self.build_matching_instance(session["instance"])
            except MatchingError as exc:
                raise ServiceError("invalid_instance", str(exc)) from exc
            outcome = rematch(instance)
            explanations = {
                student: self._explanation_doc(record)
                for student, record in outcome.provenance.items()
            }
            doc = {
                "run_number": len(session["outcomes"]) + 1,
                "instance_digest": _sha256(canonical_json(session["instance"])),
                "assignment": outcome.assignment,
                "rosters": {c: list(r) for c, r in outcome.course_rosters.items()},
                "cutoffs": outcome.cutoffs,
                "explanations": explanations,
            }
            self._commit(
                {
                    "type": "matching_run",
                    "session_id": session_id,
                    "outcome": doc,
                    "ts": time.time(),
                }
            )
        return doc

    @staticmethod
    def _explanation_doc(record) -> dict:
        return {
            "student": record.student,
            "assigned": record.assigned,
            "reasons": [
                {
                    key: value
                    for key, value in (
                        ("course", r.course),
                        ("reason", r.reason),
                        ("assigned_course", r.assigned_course),
                        ("assigned_rank", r.assigned_rank),
                        ("cutoff", r.cutoff),
                        ("student_score", r.student_score),
                        ("pinned_to", r.pinned_to),
                    )
                    if value is not None
                }
                for r in record.reasons
            ],
        }

    def latest_outcome(self, session_id: str) -> dict:
        session = self.get_session(session_id)
        if not session["outcomes"]:
            raise ServiceError("no_runs", "matching has not been run yet", 409)
        return session["outcomes"][-1]

    def explanation(self, session_id: str, student: str) -> dict:
        outcome = self.latest_outcome(session_id)
        record = outcome["explanations"].get(student)
        if record is None:
            raise ServiceError("unknown_student", f"no student {student!r}", 404)
        return record

    def explanation_for_course(self, session_id: str, student: str, course: str) -> dict:
        """Reason for one (student, course) pair, NOT_RANKED included."""
        session = self.get_session(session_id)
        self.latest_outcome(session_id)  # must have run
        try:
            instance = self.build_matching_instance(session["instance"])
            outcome = rematch(instance)
            reason = explain_course(student, course, outcome, instance)
        except MatchingError as exc:
            raise ServiceError("unknown_student", str(exc), 404) from exc
        return {
            "course": reason.course,
            "reason": reason.reason,
        }
