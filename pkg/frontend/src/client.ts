/** fetch-based service client for the /v1 endpoints. */

import type { ServiceClient } from "./types.js";

export function httpClient(baseUrl = ""): ServiceClient {
  return {
    async post(endpoint: string, body: unknown) {
      const resp = await fetch(baseUrl + endpoint, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      const text = await resp.text();
      return { status: resp.status, body: text ? JSON.parse(text) : null };
    },
  };
}
