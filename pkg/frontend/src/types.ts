// Wire shapes of the registry HTTP API, as the console consumes them.

export interface SchemeSummary {
  kind: "scheme" | "copy";
  hosted: boolean;
  id: string;
  token?: string;
  title: string;
  scheme_uri: string;
  version?: number;
  concepts?: number;
  owner?: string;
  maintainers?: string[];
  seq?: number;
  source?: string;
}

export interface ConceptWire {
  uri: string;
  pref_labels: Record<string, string>;
  alt_labels: Record<string, string[]>;
  definition: Record<string, string>;
  scope_note: Record<string, string>;
  broader: string[];
  related: string[];
  status: "proposed" | "approved" | "deprecated";
  replaces: string[];
  replaced_by: string[];
  notes?: string[];
  numeric_id?: number | null;
}

export interface ChangeItemWire {
  field: string;
  op: "add" | "remove" | "modify";
  old?: string;
  new?: string;
}

export interface ClassificationWire {
  outcome: "NonSemantic" | "Semantic" | "NeedsConfirmation";
  reasons: string[];
  questions?: string[];
}

export interface PreviewResult {
  uri: string;
  items: ChangeItemWire[];
  outcome: "NoChange" | ClassificationWire["outcome"];
  classification?: ClassificationWire;
  questions?: string[];
}

export interface UpdateOutcomeWire {
  kind: "Updated" | "SuccessorMinted" | "PendingConfirmation";
  version: number;
  uri: string;
  new_uri?: string;
  ticket?: { token: string; question: string };
  classification?: ClassificationWire;
  noop?: boolean;
}

export interface ChangeEventWire {
  scheme_id: string;
  version: number;
  seq: number;
  timestamp: string;
  author: string;
  kind: string;
  concept_uris: string[];
  items: ChangeItemWire[];
  classification?: ClassificationWire;
}

export interface HistoryBatch {
  version: number;
  events: ChangeEventWire[];
}

export interface TicketRow {
  token: string;
  scheme_id: string;
  question: string;
  pending: { uri: string; items: ChangeItemWire[]; author: string };
  issued_at: string;
  expires_at: string;
}

export interface SubscriptionWire {
  id: string;
  agent: string;
  scope: string;
  channel: string;
  granularity: "every_commit" | "semantic_only";
}

export interface NotificationWire {
  id: string;
  recipient: string;
  subject: string;
  body: string;
  links: [string, string][];
  created_at: string;
  kind: string;
}

export interface UsageWire {
  agent: string;
  scheme_id: string;
  registered_at: string;
}

export interface ViolationWire {
  rule: string;
  uri: string;
  message: string;
}

export interface AgentWire {
  id: string;
  kind: string;
  name: string;
  contacts: { label: string; address: string }[];
}

export type MaintainerAssertion = "clarification" | "meaning_change";
