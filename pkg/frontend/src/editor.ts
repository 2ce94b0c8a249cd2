// Concept edit flow.  The server's preview endpoint is the single source of
// truth for what an edit means; this module only routes its verdict into the
// right interaction:
//
//   NoChange          -> nothing to do
//   NonSemantic       -> commit straight away
//   Semantic          -> blocking dialog, commit only on explicit "proceed"
//   NeedsConfirmation -> radio prompt (clarification / meaning change), then
//                        re-preview with that assertion and start over
//
// Commits always carry expected_version, so a concurrent edit surfaces as a
// conflict instead of a silent overwrite.

import { ApiClient, ApiError } from "./api.js";
import type { ChangeItemWire, MaintainerAssertion, UpdateOutcomeWire } from "./types.js";

export const NEW_URI_WARNING =
  "a new URI will be minted and the old term deprecated — proceed?";

export type SaveResult =
  | { kind: "saved"; outcome: UpdateOutcomeWire }
  | { kind: "no-change" }
  | {
      kind: "new-uri-dialog";
      warning: string;
      proceed: () => Promise<SaveResult>;
      cancel: () => SaveResult;
    }
  | {
      kind: "assertion-prompt";
      questions: string[];
      answer: (assertion: MaintainerAssertion) => Promise<SaveResult>;
    }
  | { kind: "conflict"; actual: number }
  | { kind: "invalid"; lines: string[] }
  | { kind: "read-only" }
  | { kind: "cancelled" };

export class ConceptEditor {
  constructor(
    private readonly api: ApiClient,
    readonly scheme: string,
    readonly key: string,
  ) {}

  /** Version the edit is based on; sent as expected_version with the commit. */
  baseVersion: number | null = null;

  async load() {
    const concept = await this.api.getConcept(this.scheme, this.key);
    this.baseVersion = await this.api.schemeVersion(this.scheme);
    return concept;
  }

  async save(items: ChangeItemWire[], assertion?: MaintainerAssertion): Promise<SaveResult> {
    let preview;
    try {
      preview = await this.api.previewUpdate(this.scheme, this.key, items, assertion);
    } catch (err) {
      return this.describeFailure(err);
    }

    if (preview.outcome === "NoChange") return { kind: "no-change" };

    if (preview.outcome === "NeedsConfirmation") {
      const questions = preview.questions ?? [];
      return {
        kind: "assertion-prompt",
        questions,
        answer: (choice) => this.save(items, choice),
      };
    }

    if (preview.outcome === "Semantic") {
      return {
        kind: "new-uri-dialog",
        warning: NEW_URI_WARNING,
        proceed: () => this.commit(items, assertion),
        cancel: () => ({ kind: "cancelled" }),
      };
    }

    return this.commit(items, assertion);
  }

  private async commit(
    items: ChangeItemWire[],
    assertion?: MaintainerAssertion,
  ): Promise<SaveResult> {
    try {
      const outcome = await this.api.updateConcept(
        this.scheme,
        this.key,
        items,
        assertion,
        this.baseVersion ?? undefined,
      );
      this.baseVersion = outcome.version;
      return { kind: "saved", outcome };
    } catch (err) {
      return this.describeFailure(err);
    }
  }

  private describeFailure(err: unknown): SaveResult {
    if (err instanceof ApiError) {
      if (err.status === 409 && err.code === "VersionConflict") {
        return { kind: "conflict", actual: Number(err.body["actual"]) };
      }
      if (err.status === 422) {
        const violations = (err.body["violations"] ?? []) as {
          rule: string;
          uri: string;
          message: string;
        }[];
        return { kind: "invalid", lines: violations.map((v) => `${v.rule}: ${v.message}`) };
      }
      if (err.status === 403) return { kind: "read-only" };
    }
    throw err;
  }
}
