// HTTP client for the registry API.  Every request the console makes goes
// through this class, and every request is appended to `trace` so tests (and
// curious maintainers) can audit exactly what was sent.

import type {
  AgentWire,
  ChangeEventWire,
  ChangeItemWire,
  ConceptWire,
  HistoryBatch,
  MaintainerAssertion,
  NotificationWire,
  PreviewResult,
  SchemeSummary,
  SubscriptionWire,
  TicketRow,
  UpdateOutcomeWire,
  UsageWire,
} from "./types.js";

export interface TraceEntry {
  method: string;
  path: string;
  status: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
    message?: string,
  ) {
    super(message ?? `${status}: ${body["message"] ?? "request failed"}`);
  }

  get code(): string {
    return String(this.body["error"] ?? "");
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  // API token lives only in this object; nothing is written to storage.
  private apiToken: string | null = null;
  agentId: string | null = null;
  readonly trace: TraceEntry[] = [];

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get authenticated(): boolean {
    return this.apiToken !== null;
  }

  useToken(token: string): void {
    this.apiToken = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    raw = false,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.apiToken) headers["Authorization"] = `Bearer ${this.apiToken}`;
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      this.trace.push({ method, path, status: 0 });
      throw new ApiError(0, {}, `cannot reach ${this.baseUrl}: ${err}`);
    }
    this.trace.push({ method, path, status: resp.status });
    if (!resp.ok) {
      let parsed: Record<string, unknown> = {};
      try {
        parsed = (await resp.json()) as Record<string, unknown>;
      } catch {
        /* non-JSON error body; keep it empty */
      }
      throw new ApiError(resp.status, parsed);
    }
    if (raw) return (await resp.text()) as unknown as T;
    if (resp.status === 204) return undefined as unknown as T;
    return (await resp.json()) as T;
  }

  // -- session -------------------------------------------------------------

  async register(name: string, kind: string, contacts: { label: string; address: string }[]) {
    const out = await this.request<{ agent: AgentWire; api_token: string }>(
      "POST",
      "/agents",
      { name, kind, contacts },
    );
    this.apiToken = out.api_token;
    this.agentId = out.agent.id;
    return out.agent;
  }

  async me(): Promise<AgentWire> {
    const agent = await this.request<AgentWire>("GET", "/me");
    this.agentId = agent.id;
    return agent;
  }

  // -- discovery -------------------------------------------------------------

  listSchemes(q?: string): Promise<SchemeSummary[]> {
    const suffix = q ? `?q=${encodeURIComponent(q)}` : "";
    return this.request("GET", `/schemes${suffix}`);
  }

  async schemeVersion(token: string): Promise<number> {
    // The version rides the X-Scheme-Version header of the export response.
    const resp = await this.fetchImpl(`${this.baseUrl}/schemes/${token}`, { method: "GET" });
    this.trace.push({ method: "GET", path: `/schemes/${token}`, status: resp.status });
    const version = resp.headers.get("x-scheme-version");
    if (!resp.ok || version === null) throw new ApiError(resp.status, {});
    return Number(version);
  }

  getSchemeState(token: string, version?: number): Promise<{ concepts: Record<string, ConceptWire>; version: number }> {
    const suffix = version ? `?version=${version}` : "";
    return this.request("GET", `/schemes/${token}${suffix}`);
  }

  exportTriples(token: string): Promise<string> {
    return this.request("GET", `/schemes/${token}?format=triples`, undefined, true);
  }

  getConcept(token: string, key: string): Promise<ConceptWire> {
    return this.request("GET", `/schemes/${token}/concepts/${encodeURIComponent(key)}`);
  }

  changesSince(token: string, since = 0): Promise<ChangeEventWire[]> {
    return this.request("GET", `/schemes/${token}/changes?since=${since}`);
  }

  history(token: string, uri?: string): Promise<HistoryBatch[]> {
    const suffix = uri ? `?uri=${encodeURIComponent(uri)}` : "";
    return this.request("GET", `/schemes/${token}/history${suffix}`);
  }

  feed(token: string, subscriptionId?: string): Promise<string> {
    const suffix = subscriptionId ? `?subscription=${subscriptionId}` : "";
    return this.request("GET", `/schemes/${token}/feed.atom${suffix}`, undefined, true);
  }

  // -- mutations (all POST/DELETE; the one-click confirm resolver is GET) ----

  createScheme(token: string, title: string, description = ""): Promise<SchemeSummary> {
    return this.request("POST", "/schemes", { token, title, description });
  }

  designateMaintainer(token: string, agent: string): Promise<{ maintainers: string[] }> {
    return this.request("POST", `/schemes/${token}/maintainers`, { agent });
  }

  addConcept(
    token: string,
    concept: Partial<ConceptWire> & { pref_labels: Record<string, string> },
    expectedVersion?: number,
  ): Promise<{ concept: ConceptWire; version: number }> {
    return this.request("POST", `/schemes/${token}/concepts`, {
      concept,
      expected_version: expectedVersion,
    });
  }

  previewUpdate(
    token: string,
    key: string,
    items: ChangeItemWire[],
    assertion?: MaintainerAssertion,
  ): Promise<PreviewResult> {
    return this.request("POST", `/schemes/${token}/concepts/${encodeURIComponent(key)}/preview`, {
      items,
      assertion,
    });
  }

  updateConcept(
    token: string,
    key: string,
    items: ChangeItemWire[],
    assertion?: MaintainerAssertion,
    expectedVersion?: number,
  ): Promise<UpdateOutcomeWire> {
    return this.request("POST", `/schemes/${token}/concepts/${encodeURIComponent(key)}`, {
      items,
      assertion,
      expected_version: expectedVersion,
    });
  }

  deprecateConcept(token: string, key: string): Promise<{ uri: string; version: number }> {
    return this.request("POST", `/schemes/${token}/concepts/${encodeURIComponent(key)}/deprecate`, {});
  }

  splitConcept(
    token: string,
    key: string,
    drafts: (Partial<ConceptWire> & { pref_labels: Record<string, string> })[],
  ): Promise<{ uri: string; new_uris: string[]; version: number }> {
    return this.request("POST", `/schemes/${token}/concepts/${encodeURIComponent(key)}/split`, {
      drafts,
    });
  }

  // -- confirmations ---------------------------------------------------------

  listTickets(): Promise<TicketRow[]> {
    return this.request("GET", "/tickets");
  }

  resolveTicket(ticketToken: string, answer: "yes" | "no"): Promise<string> {
    return this.request("GET", `/confirm/${ticketToken}?answer=${answer}`, undefined, true);
  }

  // -- subscriptions, usage, notifications ------------------------------------

  listSubscriptions(): Promise<SubscriptionWire[]> {
    return this.request("GET", "/subscriptions");
  }

  subscribe(scope: string, channel: string, granularity: string): Promise<SubscriptionWire> {
    return this.request("POST", "/subscriptions", { scope, channel, granularity });
  }

  unsubscribe(id: string): Promise<void> {
    return this.request("DELETE", `/subscriptions/${id}`);
  }

  registerUsage(scheme: string): Promise<UsageWire> {
    return this.request("POST", "/usages", { scheme });
  }

  notifications(): Promise<NotificationWire[]> {
    return this.request("GET", "/notifications");
  }
}
