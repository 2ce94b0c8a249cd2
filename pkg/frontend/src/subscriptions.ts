// Subscription manager: feed/message subscriptions plus the "we use this
// vocabulary" registration that gets a consumer counted (and the owner
// notified) before anything breaks.

import { ApiClient } from "./api.js";
import type { NotificationWire, SubscriptionWire, UsageWire } from "./types.js";
import { esc } from "./render.js";

export type UsageResult =
  | { kind: "registered"; usage: UsageWire }
  | { kind: "already-registered"; usage: UsageWire };

export function renderSubscriptionRow(s: SubscriptionWire): string {
  return (
    `<tr class="subscription" data-id="${esc(s.id)}">` +
    `<td>${esc(s.scope)}</td><td>${esc(s.channel)}</td><td>${esc(s.granularity)}</td>` +
    `<td><button data-unsubscribe="${esc(s.id)}">unsubscribe</button></td></tr>`
  );
}

export function renderNotification(n: NotificationWire): string {
  const links = n.links
    .map(([text, url]) => `<a href="${esc(url)}">${esc(text)}</a>`)
    .join(" ");
  return (
    `<article class="notification" data-id="${esc(n.id)}">` +
    `<header>${esc(n.subject)}</header><p>${esc(n.body)}</p>${links}</article>`
  );
}

export class SubscriptionManager {
  // Registration is idempotent server-side; these let the console say
  // "already registered" instead of pretending a repeat did something.
  private readonly sessionStart = Date.now();
  private readonly registeredHere = new Set<string>();

  constructor(private readonly api: ApiClient) {}

  list(): Promise<SubscriptionWire[]> {
    return this.api.listSubscriptions();
  }

  subscribe(scope: string, channel: string, granularity: string): Promise<SubscriptionWire> {
    return this.api.subscribe(scope, channel, granularity);
  }

  unsubscribe(id: string): Promise<void> {
    return this.api.unsubscribe(id);
  }

  async registerUsage(scheme: string): Promise<UsageResult> {
    const usage = await this.api.registerUsage(scheme);
    const key = `${usage.agent}:${usage.scheme_id}`;
    const repeat =
      this.registeredHere.has(key) ||
      // Predates this session (5s skew allowance): an earlier registration.
      Date.parse(usage.registered_at) < this.sessionStart - 5000;
    this.registeredHere.add(key);
    return repeat ? { kind: "already-registered", usage } : { kind: "registered", usage };
  }

  async listHtml(): Promise<string> {
    const subs = await this.list();
    if (!subs.length) return `<p class="empty">no subscriptions</p>`;
    return `<table class="subscriptions"><tbody>${subs
      .map(renderSubscriptionRow)
      .join("")}</tbody></table>`;
  }

  async notificationsHtml(): Promise<string> {
    const notes = await this.api.notifications();
    if (!notes.length) return `<p class="empty">inbox empty</p>`;
    return notes.map(renderNotification).join("\n");
  }
}
