/** Test doubles: a recording client that replays real service fixtures.
 *
 * Fixtures are genuine result envelopes captured from the analysis
 * engine for the dataset in fixtures/base.csv.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { ResultEnvelope, ServiceClient } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture(name: string): ResultEnvelope {
  const raw = readFileSync(join(here, "fixtures", `${name}.json`), "utf-8");
  return JSON.parse(raw) as ResultEnvelope;
}

export const BASE_CSV = readFileSync(join(here, "fixtures", "base.csv"), "utf-8");

export interface RecordedCall {
  endpoint: string;
  body: Record<string, unknown>;
}

function routeKey(endpoint: string, body: Record<string, unknown>): string {
  const options = (body["options"] ?? {}) as Record<string, unknown>;
  const excl = ((options["exclude_ids"] as string[] | undefined) ?? []).join(",");
  const model = endpoint === "/v1/egger" ? "egger" : String(body["model"]);
  return `${model}|${excl}`;
}

const ROUTES: Record<string, string> = {
  "fixed|": "fixed_all",
  "fixed|trial_3": "fixed_excl",
  "re_additive_pm|": "pm_all",
  "re_additive_pm|trial_3": "pm_excl",
  "egger|": "egger_all",
  "egger|trial_3": "egger_excl",
};

/** Replays fixtures and records every request it sees. */
export class RecordingClient implements ServiceClient {
  calls: RecordedCall[] = [];

  async post(endpoint: string, body: unknown) {
    const record = { endpoint, body: body as Record<string, unknown> };
    this.calls.push(record);
    const key = routeKey(endpoint, record.body);
    const name = ROUTES[key];
    if (!name) {
      throw new Error(`no fixture for request ${key}`);
    }
    return { status: 200, body: fixture(name) };
  }
}

/** A client whose responses are resolved manually, for race tests. */
export class ManualClient implements ServiceClient {
  pending: Array<{
    endpoint: string;
    body: unknown;
    resolve: (r: { status: number; body: unknown }) => void;
    reject: (e: unknown) => void;
  }> = [];

  post(endpoint: string, body: unknown) {
    return new Promise<{ status: number; body: unknown }>((resolve, reject) => {
      this.pending.push({ endpoint, body, resolve, reject });
    });
  }
}
