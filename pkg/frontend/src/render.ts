// Small HTML-string helpers shared by the views.

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Banner shown when the registry cannot be reached or rejects a request. */
export function errorBanner(message: string): string {
  return `<div class="banner banner-error" role="alert">${esc(message)}</div>`;
}
