import { describe, expect, it } from "vitest";
import { ConfirmationInbox } from "../src/inbox.js";
import { renderTicketRow } from "../src/inbox.js";
import { newSession, seedScheme } from "./helpers.js";

async function parkEdit(api: Awaited<ReturnType<typeof newSession>>) {
  const { token, uris } = await seedScheme(api, "inb", [
    { pref_labels: { en: "moraine" }, definition: { en: "Glacial debris." } },
  ]);
  const outcome = await api.updateConcept(token, uris[0], [
    { field: "definition@en", op: "modify", old: "Glacial debris.", new: "Rock left by ice." },
  ]);
  expect(outcome.kind).toBe("PendingConfirmation");
  return { token, uri: uris[0], ticket: outcome.ticket!.token };
}

describe("confirmation inbox", () => {
  it("renders one row per open ticket, question text included", async () => {
    const api = await newSession("in-rows");
    const { ticket } = await parkEdit(api);

    const inbox = new ConfirmationInbox(api);
    const rows = await inbox.rows();
    expect(rows).toHaveLength(1);
    expect(rows[0].token).toBe(ticket);
    expect(rows[0].question).toContain("change the meaning of the term");

    const html = renderTicketRow(rows[0]);
    expect(html).toContain("change the meaning of the term");
    expect(html).toContain(`data-token="${ticket}"`);
    expect(html).toContain('data-answer="yes"');
    expect(html).toContain('data-answer="no"');
  });

  it("removes the row and bumps the scheme head when answered yes", async () => {
    const api = await newSession("in-yes");
    const { token, uri, ticket } = await parkEdit(api);
    const inbox = new ConfirmationInbox(api);
    const before = await api.schemeVersion(token);

    const out = await inbox.resolve(ticket, "yes");
    if (out.kind !== "resolved") throw new Error("expected resolution");
    expect(out.message).toContain(`version ${before + 1}`);

    expect(await api.schemeVersion(token)).toBe(before + 1);
    expect(await inbox.rows()).toHaveLength(0);
    expect((await api.getConcept(token, uri)).status).toBe("deprecated");
  });

  it("says handled-elsewhere when the link was already used", async () => {
    const api = await newSession("in-dup");
    const { ticket } = await parkEdit(api);
    const inbox = new ConfirmationInbox(api);

    expect((await inbox.resolve(ticket, "no")).kind).toBe("resolved");
    expect((await inbox.resolve(ticket, "yes")).kind).toBe("handled-elsewhere");
  });

  it("keeps the concept untouched when answered no", async () => {
    const api = await newSession("in-no");
    const { token, uri, ticket } = await parkEdit(api);
    const inbox = new ConfirmationInbox(api);
    const before = await api.schemeVersion(token);

    const out = await inbox.resolve(ticket, "no");
    if (out.kind !== "resolved") throw new Error("expected resolution");
    expect(out.message).toContain("discarded");
    expect(await api.schemeVersion(token)).toBe(before);
    expect((await api.getConcept(token, uri)).definition["en"]).toBe("Glacial debris.");
  });
});
