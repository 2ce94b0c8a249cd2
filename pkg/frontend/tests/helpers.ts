import { inject } from "vitest";
import { ApiClient } from "../src/api.js";
import type { ConceptWire } from "../src/types.js";

export function baseUrl(): string {
  return inject("baseUrl");
}

/** Fresh authenticated client: its own agent against the shared registry. */
export async function newSession(name: string): Promise<ApiClient> {
  const api = new ApiClient(baseUrl());
  await api.register(name, "individual", [{ label: "mail", address: `${name}@example.org` }]);
  return api;
}

let counter = 0;

/** Scheme tokens must match [a-z0-9-]{1,32} and be unique per test run. */
export function uniqueToken(prefix: string): string {
  counter += 1;
  const nonce = Math.floor(Math.random() * 36 ** 4).toString(36);
  return `${prefix}-${counter}-${nonce}`.slice(0, 32);
}

export async function seedScheme(
  api: ApiClient,
  prefix: string,
  concepts: (Partial<ConceptWire> & { pref_labels: Record<string, string> })[],
  title?: string,
): Promise<{ token: string; uris: string[] }> {
  const token = uniqueToken(prefix);
  await api.createScheme(token, title ?? `${prefix} vocabulary`);
  const uris: string[] = [];
  for (const draft of concepts) {
    const out = await api.addConcept(token, draft);
    uris.push(out.concept.uri);
  }
  return { token, uris };
}

export function countEntries(atom: string): number {
  return (atom.match(/<entry>/g) ?? []).length;
}
