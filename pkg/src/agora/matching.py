"""Score-based matching of students to capacitated courses.

Each course scores every student as the dot product of the course's
feature weights with the student's feature vector; the scores order the
course's preference list (ties broken by ascending student token).
Students submit strict partial rankings over courses.  Matching runs
course-proposing deferred acceptance: courses offer seats down their
lists, students hold the best offer according to their own ranking and
reject courses they did not rank.  Administrators may pin students to a
course; pinned students are pre-placed, their seats are deducted, and
they take no part in the proposal rounds.

Every assignment comes with a per-student explanation record whose
claims (ranks, scores, cutoffs) are checkable against the instance and
outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class MatchingError(ValueError):
    pass


@dataclass(frozen=True)
class Feature:
    name: str
    min: float
    max: float

    def __post_init__(self):
        if not self.min < self.max:
            raise MatchingError(f"feature {self.name!r} needs min < max")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise MatchingError("duplicate feature names")

    def __len__(self) -> int:
        return len(self.features)

    def check_vector(self, values: tuple[float, ...], owner: str) -> None:
        if len(values) != len(self.features):
            raise MatchingError(
                f"{owner}: expected {len(self.features)} feature values, got {len(values)}"
            )
        for f, v in zip(self.features, values):
            if not f.min <= v <= f.max:
                raise MatchingError(
                    f"{owner}: feature {f.name!r}={v} outside [{f.min}, {f.max}]"
                )


@dataclass(frozen=True)
class StudentApplication:
    student: str
    features: tuple[float, ...]
    course_ranking: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.course_ranking)) != len(self.course_ranking):
            raise MatchingError(f"student {self.student!r} ranks a course twice")


@dataclass(frozen=True)
class CourseSpec:
    course: str
    weights: tuple[float, ...]
    capacity: int
    pinned: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.capacity < 0:
            raise MatchingError(f"course {self.course!r} has negative capacity")
        if len(self.pinned) > self.capacity:
            raise MatchingError(
                f"course {self.course!r} pins {len(self.pinned)} students "
                f"but has capacity {self.capacity}"
            )


@dataclass(frozen=True)
class MatchingInstance:
    schema: FeatureSchema
    courses: tuple[CourseSpec, ...]
    students: tuple[StudentApplication, ...]

    def __post_init__(self):
        course_ids = [c.course for c in self.courses]
        if len(set(course_ids)) != len(course_ids):
            raise MatchingError("duplicate course ids")
        student_ids = [s.student for s in self.students]
        if len(set(student_ids)) != len(student_ids):
            raise MatchingError("duplicate student ids")
        known_students = set(student_ids)
        known_courses = set(course_ids)
        pinned_to: dict[str, str] = {}
        for c in self.courses:
            if len(c.weights) != len(self.schema):
                raise MatchingError(f"course {c.course!r} weight vector length mismatch")
            for s in c.pinned:
                if s not in known_students:
                    raise MatchingError(f"course {c.course!r} pins unknown student {s!r}")
                if s in pinned_to:
                    raise MatchingError(
                        f"student {s!r} pinned to both {pinned_to[s]!r} and {c.course!r}"
                    )
                pinned_to[s] = c.course
        for s in self.students:
            self.schema.check_vector(s.features, f"student {s.student!r}")
            unknown = set(s.course_ranking) - known_courses
            if unknown:
                raise MatchingError(
                    f"student {s.student!r} ranks unknown course(s) {sorted(unknown)}"
                )

    def pinned_course_of(self, student: str) -> str | None:
        for c in self.courses:
            if student in c.pinned:
                return c.course
        return None


def student_score(weights: tuple[float, ...], features: tuple[float, ...]) -> float:
    if len(weights) != len(features):
        raise MatchingError(
            f"weight vector length {len(weights)} != feature vector length {len(features)}"
        )
    return float(sum(w * f for w, f in zip(weights, features)))


def course_preference_list(
    course: CourseSpec, students: tuple[StudentApplication, ...]
) -> list[str]:
    """Student tokens by descending score; exact ties by ascending token."""
    scored = [
        (student_score(course.weights, s.features), s.student) for s in students
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [token for _, token in scored]


REASON_ASSIGNED_HERE = "ASSIGNED_HERE"
REASON_ASSIGNED_HIGHER = "ASSIGNED_HIGHER_RANKED"
REASON_CAPACITY_FILLED = "CAPACITY_FILLED"
REASON_PINNED_ELSEWHERE = "PINNED_ELSEWHERE"
REASON_NOT_RANKED = "NOT_RANKED"


@dataclass(frozen=True)
class CourseReason:
    course: str
    reason: str
    assigned_course: str | None = None
    assigned_rank: int | None = None  # 1-based position in the student's ranking
    cutoff: float | None = None
    student_score: float | None = None
    pinned_to: str | None = None


@dataclass(frozen=True)
class ExplanationRecord:
    student: str
    assigned: str | None
    reasons: tuple[CourseReason, ...]

    def for_course(self, course: str) -> CourseReason | None:
        for r in self.reasons:
            if r.course == course:
                return r
        return None


@dataclass(frozen=True)
class MatchingOutcome:
    assignment: dict[str, str | None]
    course_rosters: dict[str, tuple[str, ...]]
    cutoffs: dict[str, float | None]
    provenance: dict[str, ExplanationRecord] = field(default_factory=dict)


def stable_match(instance: MatchingInstance) -> MatchingOutcome:
    """Course-proposing deferred acceptance with capacities and pins."""
    students_by_id = {s.student: s for s in instance.students}
    pinned_to = {
        s.student: instance.pinned_course_of(s.student)
        for s in instance.students
        if instance.pinned_course_of(s.student) is not None
    }
    candidates = tuple(
        s for s in instance.students if s.student not in pinned_to
    )

    pref_lists = {
        c.course: course_preference_list(c, candidates) for c in instance.courses
    }
    free_seats = {
        c.course: c.capacity - len(c.pinned) for c in instance.courses
    }
    pointer = {c.course: 0 for c in instance.courses}
    rank_in = {
        s.student: {course: r for r, course in enumerate(s.course_ranking)}
        for s in instance.students
    }

    held: dict[str, str] = {}  # student -> course currently holding them
    active = [c.course for c in instance.courses if free_seats[c.course] > 0]
    while active:
        course = active.pop()
        while free_seats[course] > 0 and pointer[course] < len(pref_lists[course]):
            student = pref_lists[course][pointer[course]]
            pointer[course] += 1
            ranks = rank_in[student]
            if course not in ranks:
                continue  # student did not rank this course
            current = held.get(student)
            if current is None:
                held[student] = course
                free_seats[course] -= 1
            elif ranks[course] < ranks[current]:
                held[student] = course
                free_seats[course] -= 1
                free_seats[current] += 1
                if current not in active:
                    active.append(current)
            # else: proposal rejected, course moves down its list

    assignment: dict[str, str | None] = {
        s.student: pinned_to.get(s.student, held.get(s.student))
        for s in instance.students
    }

    score_of = {
        c.course: {
            s.student: student_score(c.weights, s.features) for s in instance.students
        }
        for c in instance.courses
    }
    rosters: dict[str, tuple[str, ...]] = {}
    cutoffs: dict[str, float | None] = {}
    for c in instance.courses:
        members = [s for s, assigned in assignment.items() if assigned == c.course]
        members.sort(key=lambda s: (-score_of[c.course][s], s))
        rosters[c.course] = tuple(members)
        mechanism = [s for s in members if s not in c.pinned]
        if len(members) == c.capacity and mechanism:
            cutoffs[c.course] = min(score_of[c.course][s] for s in mechanism)
        else:
            cutoffs[c.course] = None

    outcome = MatchingOutcome(assignment=assignment, course_rosters=rosters, cutoffs=cutoffs)
    provenance = {
        s.student: _explain(s, outcome, instance, score_of) for s in instance.students
    }
    return MatchingOutcome(
        assignment=assignment,
        course_rosters=rosters,
        cutoffs=cutoffs,
        provenance=provenance,
    )


def rematch(instance: MatchingInstance) -> MatchingOutcome:
    """Full recomputation on the (edited) instance; no state carries over."""
    return stable_match(instance)


def _explain(
    application: StudentApplication,
    outcome: MatchingOutcome,
    instance: MatchingInstance,
    score_of: dict[str, dict[str, float]],
) -> ExplanationRecord:
    student = application.student
    assigned = outcome.assignment.get(student)
    pinned_course = instance.pinned_course_of(student)
    ranking = application.course_ranking
    assigned_rank = (
        ranking.index(assigned) + 1 if assigned is not None and assigned in ranking else None
    )
    reasons = []
    for position, course in enumerate(ranking, start=1):
        if course == assigned:
            reasons.append(CourseReason(course=course, reason=REASON_ASSIGNED_HERE))
        elif pinned_course is not None:
            reasons.append(
                CourseReason(
                    course=course,
                    reason=REASON_PINNED_ELSEWHERE,
                    pinned_to=pinned_course,
                )
            )
        elif assigned is not None and assigned_rank is not None and position > assigned_rank:
            reasons.append(
                CourseReason(
                    course=course,
                    reason=REASON_ASSIGNED_HIGHER,
                    assigned_course=assigned,
                    assigned_rank=assigned_rank,
                )
            )
        else:
            reasons.append(
                CourseReason(
                    course=course,
                    reason=REASON_CAPACITY_FILLED,
                    cutoff=outcome.cutoffs.get(course),
                    student_score=score_of[course][student],
                )
            )
    return ExplanationRecord(student=student, assigned=assigned, reasons=tuple(reasons))


def explain(
    student: str, outcome: MatchingOutcome, instance: MatchingInstance
) -> ExplanationRecord:
    """Per-course reasons for one student's assignment, recomputed from
    (instance, outcome) only; querying an unranked course via
    :meth:`explain_course` yields NOT_RANKED."""
    applications = {s.student: s for s in instance.students}
    if student not in applications:
        raise MatchingError(f"unknown student {student!r}")
    score_of = {
        c.course: {
            s.student: student_score(c.weights, s.features) for s in instance.students
        }
        for c in instance.courses
    }
    return _explain(applications[student], outcome, instance, score_of)


def explain_course(
    student: str, course: str, outcome: MatchingOutcome, instance: MatchingInstance
) -> CourseReason:
    """Reason for one (student, course) pair; unranked courses included."""
    record = explain(student, outcome, instance)
    hit = record.for_course(course)
    if hit is not None:
        return hit
    if all(c.course != course for c in instance.courses):
        raise MatchingError(f"unknown course {course!r}")
    return CourseReason(course=course, reason=REASON_NOT_RANKED)
