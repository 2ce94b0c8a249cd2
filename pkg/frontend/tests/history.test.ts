import { describe, expect, it } from "vitest";
import { renderCard, toCards } from "../src/history.js";
import { newSession, seedScheme } from "./helpers.js";

describe("history view", () => {
  it("shows two cards for a concept that was created and then updated", async () => {
    const api = await newSession("hi-two");
    const { token, uris } = await seedScheme(api, "hitwo", [{ pref_labels: { en: "méandre" } }]);
    await api.updateConcept(token, uris[0], [
      { field: "alt_label@en", op: "add", new: "riverbend" },
    ]);

    const cards = toCards(await api.history(token, uris[0]));
    expect(cards).toHaveLength(2);
    // Newest first.
    expect(cards[0].kind).toBe("ConceptUpdated");
    expect(cards[1].kind).toBe("ConceptCreated");
    expect(cards[0].version).toBeGreaterThan(cards[1].version);
    expect(cards[0].badge).toBe("NonSemantic");
    expect(cards[0].lines).toEqual(["alt_label@en: + riverbend"]);
    expect(cards[0].author).toBe(api.agentId);
  });

  it("links a split card to both successors", async () => {
    const api = await newSession("hi-split");
    const { token, uris } = await seedScheme(api, "hispl", [
      { pref_labels: { en: "marsh" }, definition: { en: "Wet low ground." } },
    ]);
    const split = await api.splitConcept(token, uris[0], [
      { pref_labels: { en: "bog" } },
      { pref_labels: { en: "fen" } },
    ]);
    expect(split.new_uris).toHaveLength(2);

    const cards = toCards(await api.history(token));
    const card = cards.find((c) => c.kind === "ConceptSplit")!;
    expect(card).toBeDefined();
    expect(card.subject).toBe(uris[0]);
    expect(card.successors).toEqual(split.new_uris);
    expect(card.badge).toBe("Semantic");

    const html = renderCard(card);
    for (const successor of split.new_uris) {
      expect(html).toContain(`#concept/${encodeURIComponent(successor)}`);
    }
  });

  it("shows exactly as many cards as the change log has events", async () => {
    const api = await newSession("hi-count");
    const { token, uris } = await seedScheme(api, "hicnt", [
      { pref_labels: { en: "delta" } },
      { pref_labels: { en: "estuary" } },
    ]);
    await api.updateConcept(token, uris[0], [{ field: "note", op: "add", new: "coastal" }]);
    await api.deprecateConcept(token, uris[1]);

    const cards = toCards(await api.history(token));
    const events = await api.changesSince(token, 0);
    expect(cards.length).toBe(events.length);
    const versions = cards.map((c) => c.version);
    expect(versions).toEqual([...versions].sort((a, b) => b - a));
  });
});
