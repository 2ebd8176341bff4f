/**
 * View models: plain display structures computed from service responses.
 *
 * Nothing here mutates a snapshot or invents a number; every displayed
 * value is copied from a service response so it can be traced back.
 */

import type {
  ExplanationDoc,
  MatchingInstanceDoc,
  MatchingOutcomeDoc,
  MultiPollStatus,
  ReasonDoc,
  ResultsSnapshot,
} from "./types.js";
import { ServiceClient } from "./client.js";
import { DraftError } from "./ballots.js";

// ---------------------------------------------------------------------------
// results view

export interface ResultsView {
  pollId: string;
  ballotCount: number;
  rows: { rule: string; winners: string; detail: string }[];
  mov: { rule: string; display: string }[];
  clusters: { label: string; size: number; weight: string; leaders: string }[];
}

export function resultsView(snapshot: ResultsSnapshot): ResultsView {
  const rows = snapshot.results_table.map((row) => ({
    rule: row.rule,
    winners: row.winners.join(", "),
    detail: row.scores
      ? Object.entries(row.scores)
          .map(([alt, score]) => `${alt}=${score}`)
          .join(" ")
      : `universes=${row.universes_explored}`,
  }));
  const mov = snapshot.mov.map((report) => ({
    rule: report.rule,
    display:
      report.method === "bounds" && report.bounds
        ? `between ${report.bounds[0]} and ${report.bounds[1]} ballots (${report.method})`
        : `${report.mov} ballot${report.mov === 1 ? "" : "s"} (${report.method})`,
  }));
  const clusters = snapshot.mixture.clusters.map((cluster) => ({
    label: `cluster ${cluster.component + 1}`,
    size: cluster.size,
    weight: cluster.weight.toFixed(3),
    leaders: cluster.top_alternatives.join(" > "),
  }));
  return { pollId: snapshot.poll_id, ballotCount: snapshot.n, rows, mov, clusters };
}

// ---------------------------------------------------------------------------
// multi-poll view

export interface MultiPollView {
  decided: { issue: string; value: string; tally: string; tieBroken: boolean }[];
  currentIssue: string | null;
  closed: boolean;
}

export function multiPollView(status: MultiPollStatus): MultiPollView {
  return {
    decided: status.decided.map((d) => ({
      issue: d.issue,
      value: d.value,
      tally: Object.entries(d.tally)
        .map(([value, count]) => `${value}:${count}`)
        .join(" "),
      tieBroken: d.tie_broken,
    })),
    currentIssue: status.current_issue,
    closed: status.status === "closed",
  };
}

// ---------------------------------------------------------------------------
// admin matching dashboard

export interface RosterView {
  course: string;
  capacity: number;
  students: { token: string; pinned: boolean }[];
  cutoff: number | null;
}

/**
 * Working state for the admin dashboard: a local editable copy of the
 * instance plus the last acknowledged outcome.  Edits validate
 * immediately but become authoritative only after `run()` pushes the
 * instance and the service answers.
 */
export class AdminDashboard {
  private instance: MatchingInstanceDoc;
  private outcome: MatchingOutcomeDoc | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly sessionId: string,
    instance: MatchingInstanceDoc,
  ) {
    this.instance = structuredClone(instance);
  }

  instanceDoc(): MatchingInstanceDoc {
    return structuredClone(this.instance);
  }

  lastOutcome(): MatchingOutcomeDoc | null {
    return this.outcome;
  }

  private course(courseId: string) {
    const course = this.instance.courses.find((c) => c.course === courseId);
    if (!course) throw new DraftError(`unknown course ${courseId}`);
    return course;
  }

  setWeight(courseId: string, featureIndex: number, value: number): void {
    const course = this.course(courseId);
    if (featureIndex < 0 || featureIndex >= this.instance.schema.length) {
      throw new DraftError(`no feature at index ${featureIndex}`);
    }
    if (!Number.isFinite(value)) throw new DraftError("weight must be a finite number");
    course.weights[featureIndex] = value;
  }

  /** Dragging a student onto a course pins them there (fixed assignment). */
  pinStudent(student: string, courseId: string): void {
    if (!this.instance.students.some((s) => s.student === student)) {
      throw new DraftError(`unknown student ${student}`);
    }
    const target = this.course(courseId);
    if (target.pinned.includes(student)) return;
    if (target.pinned.length + 1 > target.capacity) {
      throw new DraftError(`pinning ${student} exceeds capacity of ${courseId}`);
    }
    for (const course of this.instance.courses) {
      course.pinned = course.pinned.filter((token) => token !== student);
    }
    target.pinned.push(student);
  }

  unpinStudent(student: string): void {
    for (const course of this.instance.courses) {
      course.pinned = course.pinned.filter((token) => token !== student);
    }
  }

  addStudent(student: string, features: number[], ranking: string[]): void {
    if (this.instance.students.some((s) => s.student === student)) {
      throw new DraftError(`student ${student} already exists`);
    }
    this.instance.schema.forEach((feature, i) => {
      const value = features[i];
      if (value === undefined || value < feature.min || value > feature.max) {
        throw new DraftError(`feature ${feature.name} out of range`);
      }
    });
    this.instance.students.push({ student, features: [...features], ranking: [...ranking] });
  }

  removeStudent(student: string): void {
    this.unpinStudent(student);
    this.instance.students = this.instance.students.filter((s) => s.student !== student);
  }

  /** Push the edited instance, trigger a run, adopt the verified outcome. */
  async run(): Promise<MatchingOutcomeDoc> {
    await this.client.putInstance(this.sessionId, this.instanceDoc());
    this.outcome = await this.client.runMatching(this.sessionId);
    return this.outcome;
  }

  rosterView(): RosterView[] {
    if (!this.outcome) return [];
    const outcome = this.outcome;
    return this.instance.courses.map((course) => ({
      course: course.course,
      capacity: course.capacity,
      students: (outcome.rosters[course.course] ?? []).map((token) => ({
        token,
        pinned: course.pinned.includes(token),
      })),
      cutoff: outcome.cutoffs[course.course] ?? null,
    }));
  }

  /** The student's explanation record rendered line by line, verbatim. */
  explanationView(student: string): string[] {
    if (!this.outcome) throw new DraftError("no outcome yet; run the matching first");
    const record = this.outcome.explanations[student];
    if (!record) throw new DraftError(`no explanation for ${student}`);
    return explanationLines(record);
  }
}

export function explanationLines(record: ExplanationDoc): string[] {
  const header = record.assigned
    ? `${record.student}: assigned to ${record.assigned}`
    : `${record.student}: unmatched`;
  return [header, ...record.reasons.map(reasonLine)];
}

export function reasonLine(reason: ReasonDoc): string {
  switch (reason.reason) {
    case "ASSIGNED_HERE":
      return `${reason.course}: ASSIGNED_HERE`;
    case "ASSIGNED_HIGHER_RANKED":
      return (
        `${reason.course}: ASSIGNED_HIGHER_RANKED ` +
        `(assigned to ${reason.assigned_course}, their rank ${reason.assigned_rank})`
      );
    case "CAPACITY_FILLED":
      return (
        `${reason.course}: CAPACITY_FILLED (cutoff ${reason.cutoff ?? "n/a"}, ` +
        `score ${reason.student_score ?? "n/a"})`
      );
    case "PINNED_ELSEWHERE":
      return `${reason.course}: PINNED_ELSEWHERE (pinned to ${reason.pinned_to})`;
    case "NOT_RANKED":
      return `${reason.course}: NOT_RANKED`;
  }
}
