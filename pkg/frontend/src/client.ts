/** Typed client for the poll service HTTP API. */

import type {
  ApiErrorBody,
  BallotPayload,
  ExplanationDoc,
  MatchingInstanceDoc,
  MatchingOutcomeDoc,
  MatchingSession,
  MultiPollStatus,
  PollRecord,
  SnapshotEnvelope,
  IssueDecisionRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const envelope = parsed as ApiErrorBody | null;
      const code = envelope?.error?.code ?? "http_error";
      const message = envelope?.error?.message ?? `HTTP ${response.status}`;
      throw new ApiError(code, message, response.status);
    }
    return parsed as T;
  }

  createPoll(definition: object): Promise<PollRecord> {
    return this.request("POST", "/polls", definition);
  }

  getPoll(pollId: string): Promise<PollRecord> {
    return this.request("GET", `/polls/${pollId}`);
  }

  submitBallot(pollId: string, voter: string, payload: BallotPayload): Promise<unknown> {
    return this.request("POST", `/polls/${pollId}/ballots`, { voter, payload });
  }

  closePoll(pollId: string): Promise<PollRecord> {
    return this.request("POST", `/polls/${pollId}/close`);
  }

  getResults(pollId: string, seed = 0): Promise<SnapshotEnvelope | MultiPollStatus> {
    return this.request("GET", `/polls/${pollId}/results?seed=${seed}`);
  }

  advance(pollId: string, force = false): Promise<IssueDecisionRecord> {
    return this.request("POST", `/polls/${pollId}/advance`, { force });
  }

  issueState(pollId: string, issueId: string): Promise<Record<string, unknown>> {
    return this.request("GET", `/polls/${pollId}/issues/${issueId}`);
  }

  createMatching(instance: MatchingInstanceDoc): Promise<MatchingSession> {
    return this.request("POST", "/matchings", { instance });
  }

  putInstance(sessionId: string, instance: MatchingInstanceDoc): Promise<MatchingSession> {
    return this.request("PUT", `/matchings/${sessionId}/instance`, { instance });
  }

  runMatching(sessionId: string): Promise<MatchingOutcomeDoc> {
    return this.request("POST", `/matchings/${sessionId}/run`);
  }

  getOutcome(sessionId: string): Promise<MatchingOutcomeDoc> {
    return this.request("GET", `/matchings/${sessionId}/outcome`);
  }

  getExplanation(sessionId: string, student: string): Promise<ExplanationDoc> {
    return this.request("GET", `/matchings/${sessionId}/explanations/${student}`);
  }
}
