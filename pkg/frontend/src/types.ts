/** Wire types mirroring the service's JSON bodies. */

export type UiMode = "one_column" | "two_column" | "sliders" | "stars" | "yes_no";

export interface AlternativeInfo {
  id: string;
  label: string;
}

export interface PollRecord {
  id: string;
  kind: "single" | "multi_issue" | "allocation" | "matching";
  title: string;
  status: "open" | "closed";
  ui_mode?: UiMode;
  alternatives?: AlternativeInfo[];
  issues?: { id: string; domain: string[] }[];
  config: Record<string, unknown>;
}

/** Weak order as ordered tied groups, most preferred first. */
export type Ranking = string[][];

export type BallotPayload =
  | { ranking: Ranking }
  | { values: Record<string, number> }
  | { approved: string[] }
  | { cpnet: string }
  | { votes: Record<string, string> };

export interface RuleRow {
  rule: string;
  winners: string[];
  scores: Record<string, string> | null;
  universes_explored: number | null;
}

export interface MovRow {
  rule: string;
  mov: number;
  method: "exact_greedy" | "brute_force" | "bounds";
  bounds: [number, number] | null;
}

export interface ClusterRow {
  component: number;
  weight: number;
  size: number;
  top_alternatives: string[];
}

export interface MixtureReport {
  estimator: string;
  requested_k: number;
  k: number;
  seed: number;
  weights: number[];
  components: Record<string, number>[];
  loglik: number;
  clusters: ClusterRow[];
}

export interface ResultsSnapshot {
  poll_id: string;
  kind: "single";
  profile_digest: string;
  seed: number;
  n: number;
  results_table: RuleRow[];
  mov: MovRow[];
  mixture: MixtureReport;
}

export interface SnapshotEnvelope {
  snapshot: ResultsSnapshot;
  digest: string;
  computed_at: number;
}

export interface IssueDecisionRecord {
  issue: string;
  value: string;
  tally: Record<string, number>;
  tie_broken: boolean;
  forced?: boolean;
  skipped_voters?: string[];
}

export interface MultiPollStatus {
  poll_id: string;
  kind: "multi_issue";
  decided: IssueDecisionRecord[];
  assignment: Record<string, string>;
  current_issue: string | null;
  status: "open" | "closed";
}

export interface FeatureSpec {
  name: string;
  min: number;
  max: number;
}

export interface CourseDoc {
  course: string;
  weights: number[];
  capacity: number;
  pinned: string[];
}

export interface StudentDoc {
  student: string;
  features: number[];
  ranking: string[];
}

export interface MatchingInstanceDoc {
  schema: FeatureSpec[];
  courses: CourseDoc[];
  students: StudentDoc[];
}

export interface MatchingSession {
  id: string;
  instance: MatchingInstanceDoc;
  outcomes: MatchingOutcomeDoc[];
}

export interface ReasonDoc {
  course: string;
  reason:
    | "ASSIGNED_HERE"
    | "ASSIGNED_HIGHER_RANKED"
    | "CAPACITY_FILLED"
    | "PINNED_ELSEWHERE"
    | "NOT_RANKED";
  assigned_course?: string;
  assigned_rank?: number;
  cutoff?: number;
  student_score?: number;
  pinned_to?: string;
}

export interface ExplanationDoc {
  student: string;
  assigned: string | null;
  reasons: ReasonDoc[];
}

export interface MatchingOutcomeDoc {
  run_number: number;
  instance_digest: string;
  assignment: Record<string, string | null>;
  rosters: Record<string, string[]>;
  cutoffs: Record<string, number | null>;
  explanations: Record<string, ExplanationDoc>;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
