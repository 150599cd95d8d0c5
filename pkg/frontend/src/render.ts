// HTML renderers: pure string builders so the views are testable without a
// browser. app.ts injects the results into the page and wires events.

import type { AssetRow, WalletInfo } from "./types.js";
import {
  DECISION_COLUMNS,
  coSignatureNotice,
  type DecisionRowViewModel,
  type PendingRowViewModel,
  type WalletViewModel,
} from "./viewmodels.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderDecisionTable(rows: DecisionRowViewModel[]): string {
  const header = DECISION_COLUMNS.map((c) => `<th>${c}</th>`).join("");
  const body = rows
    .map(
      (r) =>
        `<tr data-decision="${r.id}">` +
        `<td>${r.id}</td>` +
        `<td class="addr">${escapeHtml(r.destination)}</td>` +
        `<td>${escapeHtml(r.action)}</td>` +
        `<td>${escapeHtml(r.submitted_by)}</td>` +
        `<td>${r.confirmations}</td>` +
        `<td>${escapeHtml(r.description)}</td>` +
        `</tr>`,
    )
    .join("");
  return `<table class="decision-log"><thead><tr>${header}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderPendingQueue(rows: PendingRowViewModel[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No pending transactions.</p>`;
  }
  const body = rows
    .map((r) => {
      const confirm = r.confirmEnabled
        ? `<button data-confirm="${r.id}">confirm</button>`
        : `<button disabled title="${escapeHtml(r.disabledReason)}">confirm</button>`;
      const revoke = r.revokeEnabled ? `<button data-revoke="${r.id}">revoke</button>` : "";
      return (
        `<tr data-proposal="${r.id}">` +
        `<td>${r.id}</td>` +
        `<td>${escapeHtml(r.actionKind)}</td>` +
        `<td class="addr">${escapeHtml(r.destination)}</td>` +
        `<td>${escapeHtml(r.submittedBy)}</td>` +
        `<td>${r.confirmations}/${r.required}</td>` +
        `<td>${escapeHtml(r.description)}</td>` +
        `<td>${confirm}${revoke}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="pending-queue"><thead><tr>` +
    `<th>id</th><th>action</th><th>destination</th><th>submitted_by</th>` +
    `<th>confirmations</th><th>description</th><th></th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderWalletList(wallets: WalletViewModel[], selected: string | null): string {
  const items = wallets
    .map((w) => {
      const cls = w.address === selected ? "wallet selected" : "wallet";
      const label = w.name ? `${w.name} (${w.display})` : w.display;
      return (
        `<li class="${cls}" data-wallet="${w.address}">` +
        `${escapeHtml(label)} · ${w.chain} · ${w.required}-of-${w.ownerNames.length}` +
        ` · ${w.pendingCount} pending</li>`
      );
    })
    .join("");
  return `<ul class="wallet-list">${items}</ul>`;
}

export function renderSettingsPanel(wallet: WalletInfo, sessionIsOwner: boolean): string {
  const notice = coSignatureNotice(wallet);
  const owners = wallet.owners
    .map(
      (o) =>
        `<li>${escapeHtml(o.name || o.display)} <code>${escapeHtml(o.display)}</code>` +
        (sessionIsOwner ? ` <button data-remove-owner="${o.address}">propose removal</button>` : "") +
        `</li>`,
    )
    .join("");
  const controls = sessionIsOwner
    ? `
    <div class="settings-controls">
      <label>Rename <input name="wallet-name" value="${escapeHtml(wallet.name)}"></label>
      <button data-rename>propose rename</button>
      <label>Add owner <input name="new-owner" placeholder="0x..."></label>
      <button data-add-owner>propose</button>
      <label>Requirement <input name="new-required" type="number" min="1" value="${wallet.required}"></label>
      <button data-change-required>propose</button>
    </div>`
    : `<p class="empty">Only owners can propose settings changes.</p>`;
  return `
  <section class="wallet-settings" data-wallet="${wallet.address}">
    <h3>${escapeHtml(wallet.name || wallet.display)}</h3>
    <p>address <code>${escapeHtml(wallet.display)}</code> · requirement ${wallet.required} of ${wallet.owners.length}</p>
    ${notice ? `<p class="co-signature-notice">${escapeHtml(notice)}</p>` : ""}
    <ul class="owners">${owners}</ul>
    ${controls}
  </section>`;
}

export function renderAssetTable(rows: AssetRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty">No assets registered.</p>`;
  }
  const body = rows
    .map(
      (a) =>
        `<tr data-asset="${escapeHtml(a.asset_id)}">` +
        `<td>${escapeHtml(a.asset_id)}</td>` +
        `<td>${escapeHtml(a.asset_class)}</td>` +
        `<td>${escapeHtml(a.current_state)}</td>` +
        `<td class="addr">${escapeHtml(a.last_digest ? a.last_digest.slice(0, 12) + "…" : "")}</td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="assets"><thead><tr>` +
    `<th>asset_id</th><th>class</th><th>current_state</th><th>last_digest</th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)} <button data-retry>retry</button></div>`;
}
