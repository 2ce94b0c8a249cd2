import { describe, expect, it } from "vitest";
import { SubscriptionManager } from "../src/subscriptions.js";
import { countEntries, newSession, seedScheme } from "./helpers.js";

describe("subscription manager", () => {
  it("semantic_only feed ignores cosmetic commits and carries meaning changes", async () => {
    const api = await newSession("su-feed");
    const { token, uris } = await seedScheme(api, "sufd", [
      { pref_labels: { en: "karst" }, definition: { en: "Soluble rock terrain." } },
    ]);
    const subs = new SubscriptionManager(api);
    const sub = await subs.subscribe(token, "feed", "semantic_only");
    expect(sub.granularity).toBe("semantic_only");

    const start = countEntries(await api.feed(token, sub.id));

    await api.updateConcept(token, uris[0], [{ field: "note", op: "add", new: "limestone" }]);
    expect(countEntries(await api.feed(token, sub.id))).toBe(start);

    await api.updateConcept(
      token,
      uris[0],
      [
        {
          field: "definition@en",
          op: "modify",
          old: "Soluble rock terrain.",
          new: "Terrain shaped by dissolving bedrock, sinkholes included.",
        },
      ],
      "meaning_change",
    );
    expect(countEntries(await api.feed(token, sub.id))).toBe(start + 1);

    // The unfiltered feed saw both commits.
    expect(countEntries(await api.feed(token))).toBeGreaterThanOrEqual(start + 2);
  });

  it("counts usage once and tells the owner exactly once", async () => {
    const owner = await newSession("su-owner");
    const user = await newSession("su-user");
    const { token } = await seedScheme(owner, "suusg", [{ pref_labels: { en: "tundra" } }]);

    const ownerNotes = (await owner.notifications()).length;
    const subs = new SubscriptionManager(user);

    const first = await subs.registerUsage(token);
    expect(first.kind).toBe("registered");
    expect((await owner.notifications()).length).toBe(ownerNotes + 1);

    const second = await subs.registerUsage(token);
    expect(second.kind).toBe("already-registered");
    expect(second.usage.registered_at).toBe(first.usage.registered_at);
    expect((await owner.notifications()).length).toBe(ownerNotes + 1);
  });

  it("drops a subscription from the list on unsubscribe", async () => {
    const api = await newSession("su-del");
    const { token } = await seedScheme(api, "sudel", [{ pref_labels: { en: "steppe" } }]);
    const subs = new SubscriptionManager(api);

    const sub = await subs.subscribe(token, "feed", "every_commit");
    expect((await subs.list()).map((s) => s.id)).toContain(sub.id);

    await subs.unsubscribe(sub.id);
    expect((await subs.list()).map((s) => s.id)).not.toContain(sub.id);

    const html = await subs.listHtml();
    expect(html).not.toContain(sub.id);
  });
});
