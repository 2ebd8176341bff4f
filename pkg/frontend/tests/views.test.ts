import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { ApiError, ServiceClient, type FetchLike } from "../src/client.js";
import type {
  MatchingInstanceDoc,
  MatchingOutcomeDoc,
  MatchingSession,
  MultiPollStatus,
  SnapshotEnvelope,
} from "../src/types.js";
import { AdminDashboard, explanationLines, multiPollView, resultsView } from "../src/views.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

const snapshotEnvelope = fixture<SnapshotEnvelope>("results_snapshot.json");
const session = fixture<MatchingSession>("matching_session.json");
const run1 = fixture<MatchingOutcomeDoc>("matching_run1.json");
const run2 = fixture<MatchingOutcomeDoc>("matching_run2.json");
const pinnedInstance = fixture<MatchingInstanceDoc>("matching_instance_pinned.json");

describe("results view", () => {
  it("renders every rule row straight from the service snapshot", () => {
    const view = resultsView(snapshotEnvelope.snapshot);
    const byRule = Object.fromEntries(view.rows.map((r) => [r.rule, r]));
    expect(byRule["plurality"]!.winners).toBe("cherry");
    expect(byRule["borda"]!.winners).toBe("apple");
    expect(byRule["veto"]!.winners).toBe("apple");
    expect(view.ballotCount).toBe(snapshotEnvelope.snapshot.n);
    expect(view.mov.length).toBe(snapshotEnvelope.snapshot.mov.length);
    expect(view.clusters.length).toBe(snapshotEnvelope.snapshot.mixture.clusters.length);
  });

  it("does not mutate the snapshot it renders", () => {
    const pristine = JSON.parse(JSON.stringify(snapshotEnvelope.snapshot));
    resultsView(snapshotEnvelope.snapshot);
    expect(snapshotEnvelope.snapshot).toEqual(pristine);
  });

  it("summarises margin-of-victory reports including bounds", () => {
    const view = resultsView({
      ...snapshotEnvelope.snapshot,
      mov: [
        { rule: "plurality", mov: 2, method: "exact_greedy", bounds: null },
        { rule: "stv_put", mov: 3, method: "bounds", bounds: [1, 3] },
      ],
    });
    expect(view.mov[0]!.display).toBe("2 ballots (exact_greedy)");
    expect(view.mov[1]!.display).toBe("between 1 and 3 ballots (bounds)");
  });
});

describe("multi-poll view", () => {
  const status: MultiPollStatus = {
    poll_id: "p9",
    kind: "multi_issue",
    decided: [
      { issue: "heat", value: "yes", tally: { yes: 3, no: 2 }, tie_broken: false },
    ],
    assignment: { heat: "yes" },
    current_issue: "window",
    status: "open",
  };

  it("shows decided issues and the currently open one", () => {
    const view = multiPollView(status);
    expect(view.decided).toEqual([
      { issue: "heat", value: "yes", tally: "yes:3 no:2", tieBroken: false },
    ]);
    expect(view.currentIssue).toBe("window");
    expect(view.closed).toBe(false);
  });
});

/** Replays service-captured responses; asserts the dashboard sends the
 * instance it claims to. */
function fakeTransport(expectations: {
  expectedInstance: MatchingInstanceDoc;
  runResult: MatchingOutcomeDoc;
  log: string[];
}): FetchLike {
  return async (url, init) => {
    const method = init?.method ?? "GET";
    expectations.log.push(`${method} ${url}`);
    if (method === "PUT" && url.endsWith("/instance")) {
      const body = JSON.parse(String(init?.body));
      expect(body.instance).toEqual(expectations.expectedInstance);
      return new Response(JSON.stringify(session), { status: 200 });
    }
    if (method === "POST" && url.endsWith("/run")) {
      return new Response(JSON.stringify(expectations.runResult), { status: 201 });
    }
    throw new Error(`unexpected request ${method} ${url}`);
  };
}

describe("admin dashboard", () => {
  it("pin, run, and roster display the service-verified outcome", async () => {
    const log: string[] = [];
    const client = new ServiceClient(
      "http://svc",
      fakeTransport({ expectedInstance: pinnedInstance, runResult: run2, log }),
    );
    const dashboard = new AdminDashboard(client, session.id, session.instance);

    dashboard.pinStudent("ada", "compilers");
    const outcome = await dashboard.run();

    expect(log).toEqual([
      `PUT http://svc/matchings/${session.id}/instance`,
      `POST http://svc/matchings/${session.id}/run`,
    ]);
    expect(outcome).toEqual(run2);
    const rosters = dashboard.rosterView();
    const compilers = rosters.find((r) => r.course === "compilers")!;
    expect(compilers.students).toEqual([{ token: "ada", pinned: true }]);
    expect(compilers.students.map((s) => s.token)).toEqual(run2.rosters["compilers"]);
    const algorithms = rosters.find((r) => r.course === "algorithms")!;
    expect(algorithms.students.map((s) => s.token)).toEqual(run2.rosters["algorithms"]);
  });

  it("runs the unedited instance and shows the baseline rosters", async () => {
    const log: string[] = [];
    const client = new ServiceClient(
      "http://svc",
      fakeTransport({ expectedInstance: session.instance, runResult: run1, log }),
    );
    const dashboard = new AdminDashboard(client, session.id, session.instance);
    await dashboard.run();
    const algorithms = dashboard.rosterView().find((r) => r.course === "algorithms")!;
    expect(algorithms.students.map((s) => s.token)).toEqual(run1.rosters["algorithms"]);
    expect(algorithms.cutoff).toBe(run1.cutoffs["algorithms"]);
  });

  it("renders explanation records verbatim", async () => {
    const client = new ServiceClient(
      "http://svc",
      fakeTransport({ expectedInstance: pinnedInstance, runResult: run2, log: [] }),
    );
    const dashboard = new AdminDashboard(client, session.id, session.instance);
    dashboard.pinStudent("ada", "compilers");
    await dashboard.run();
    const lines = dashboard.explanationView("ada");
    expect(lines[0]).toBe("ada: assigned to compilers");
    expect(lines).toContain("algorithms: PINNED_ELSEWHERE (pinned to compilers)");
    const record = run2.explanations["ada"]!;
    expect(lines.slice(1).length).toBe(record.reasons.length);
  });

  it("never shows the higher-ranked reason on the rank-1 course itself", () => {
    for (const record of Object.values(run1.explanations)) {
      const first = record.reasons[0];
      if (first && record.assigned === first.course) {
        expect(first.reason).toBe("ASSIGNED_HERE");
        expect(explanationLines(record)[1]).not.toContain("ASSIGNED_HIGHER_RANKED");
      }
      for (const reason of record.reasons) {
        if (reason.reason === "ASSIGNED_HIGHER_RANKED") {
          expect(reason.course).not.toBe(record.assigned);
        }
      }
    }
  });

  it("validates weight edits immediately", () => {
    const client = new ServiceClient("http://svc", async () => {
      throw new Error("no requests expected");
    });
    const dashboard = new AdminDashboard(client, session.id, session.instance);
    expect(() => dashboard.setWeight("algorithms", 0, Number.NaN)).toThrow(/finite/);
    expect(() => dashboard.setWeight("ghost-course", 0, 1)).toThrow(/unknown course/);
    dashboard.setWeight("algorithms", 1, 0.5);
    expect(dashboard.instanceDoc().courses[0]!.weights[1]).toBe(0.5);
  });

  it("rejects pins that exceed capacity before any request is made", () => {
    const client = new ServiceClient("http://svc", async () => {
      throw new Error("no requests expected");
    });
    const dashboard = new AdminDashboard(client, session.id, session.instance);
    dashboard.pinStudent("ada", "compilers");
    expect(() => dashboard.pinStudent("bob", "compilers")).toThrow(/capacity/);
    dashboard.unpinStudent("ada");
    dashboard.pinStudent("bob", "compilers");
  });

  it("surfaces service error envelopes as ApiError", async () => {
    const failing: FetchLike = async () =>
      new Response(
        JSON.stringify({ error: { code: "invalid_instance", message: "pin overflow" } }),
        { status: 400 },
      );
    const client = new ServiceClient("http://svc", failing);
    await expect(client.runMatching("m1")).rejects.toThrowError(ApiError);
    await expect(client.runMatching("m1")).rejects.toMatchObject({
      code: "invalid_instance",
      status: 400,
    });
  });
});
