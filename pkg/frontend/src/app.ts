// Browser entry point. All state lives on the server; this file only fetches,
// renders and forwards clicks. Rows update after the server answers, never
// optimistically, and a polling loop keeps every session in sync.

import { ApiError, ConsoleApi } from "./api.js";
import { CONFIG } from "./config.js";
import {
  renderAssetTable,
  renderDecisionTable,
  renderErrorBanner,
  renderPendingQueue,
  renderSettingsPanel,
  renderWalletList,
} from "./render.js";
import type { SessionActor } from "./types.js";
import { decisionRowViewModel, pendingQueue, requirementError, walletViewModel } from "./viewmodels.js";

const api = new ConsoleApi(CONFIG.baseUrl);

interface UiState {
  session: SessionActor;
  selectedWallet: string | null;
  decisionFilters: { action?: string; actor?: string; destination?: string };
}

const state: UiState = {
  session: CONFIG.actors[0]!,
  selectedWallet: null,
  decisionFilters: {},
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function showError(message: string): void {
  el("banner").innerHTML = renderErrorBanner(message);
}

function clearError(): void {
  el("banner").innerHTML = "";
}

async function refresh(): Promise<void> {
  try {
    const wallets = await api.listWallets();
    if (state.selectedWallet === null && wallets.length > 0) {
      state.selectedWallet = wallets[0]!.address;
    }
    el("wallets").innerHTML = renderWalletList(wallets.map(walletViewModel), state.selectedWallet);

    if (state.selectedWallet) {
      const wallet = await api.getWallet(state.selectedWallet);
      const proposals = await api.listProposals(state.selectedWallet, "pending");
      el("queue").innerHTML = renderPendingQueue(pendingQueue(wallet, proposals, state.session.name));
      const sessionIsOwner = wallet.owners.some((o) => o.name === state.session.name);
      el("settings").innerHTML = renderSettingsPanel(wallet, sessionIsOwner);
    }

    const decisions = await api.decisions(state.decisionFilters);
    el("decisions").innerHTML = renderDecisionTable(decisions.map(decisionRowViewModel));

    const assets = await api.assets();
    el("assets").innerHTML = renderAssetTable(assets);
    clearError();
  } catch (err) {
    showError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  }
}

function sessionDropdown(): void {
  const select = el("session") as HTMLSelectElement;
  select.innerHTML = CONFIG.actors
    .map((a) => `<option value="${a.token}">${a.name}</option>`)
    .join("");
  select.addEventListener("change", () => {
    const actor = CONFIG.actors.find((a) => a.token === select.value);
    if (actor) {
      state.session = actor;
      api.setToken(actor.token);
      void refresh();
    }
  });
  api.setToken(state.session.token);
}

async function handleAction(fn: () => Promise<unknown>): Promise<void> {
  try {
    await fn();
    clearError();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      showError(`already handled: ${err.message}`);
    } else {
      showError(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  }
  await refresh(); // the server is the source of truth, win or lose
}

function wireClicks(): void {
  document.body.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const wallet = state.selectedWallet;

    const walletItem = target.closest("[data-wallet]") as HTMLElement | null;
    if (walletItem && target.tagName !== "BUTTON" && walletItem.classList.contains("wallet")) {
      state.selectedWallet = walletItem.dataset["wallet"] ?? null;
      void refresh();
      return;
    }
    if (target.dataset["retry"] !== undefined) {
      void refresh();
      return;
    }
    if (!wallet) return;

    if (target.dataset["confirm"] !== undefined) {
      void handleAction(() => api.confirm(wallet, Number(target.dataset["confirm"])));
    } else if (target.dataset["revoke"] !== undefined) {
      void handleAction(() => api.revoke(wallet, Number(target.dataset["revoke"])));
    } else if (target.dataset["rename"] !== undefined) {
      const name = (document.querySelector('input[name="wallet-name"]') as HTMLInputElement).value;
      void handleAction(() =>
        api.submitProposal(wallet, wallet, { kind: "setMultisigName", name }, "Rename from the console"),
      );
    } else if (target.dataset["addOwner"] !== undefined) {
      const owner = (document.querySelector('input[name="new-owner"]') as HTMLInputElement).value.trim();
      void handleAction(() =>
        api.submitProposal(wallet, wallet, { kind: "addOwner", owner }, "Add owner from the console"),
      );
    } else if (target.dataset["removeOwner"] !== undefined) {
      const owner = target.dataset["removeOwner"]!;
      void handleAction(() =>
        api.submitProposal(wallet, wallet, { kind: "removeOwner", owner }, "Remove owner from the console"),
      );
    } else if (target.dataset["changeRequired"] !== undefined) {
      const input = document.querySelector('input[name="new-required"]') as HTMLInputElement;
      const target_n = Number(input.value);
      void handleAction(async () => {
        const info = await api.getWallet(wallet);
        const problem = requirementError(target_n, info.owners.length);
        if (problem) {
          throw new ApiError(400, "ThresholdError", problem);
        }
        return api.submitProposal(
          wallet,
          wallet,
          { kind: "changeRequirement", required: target_n },
          "Change requirement from the console",
        );
      });
    }
  });

  el("decision-filter-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const data = new FormData(form);
    state.decisionFilters = {
      action: (data.get("action") as string) || undefined,
      actor: (data.get("actor") as string) || undefined,
      destination: (data.get("destination") as string) || undefined,
    };
    void refresh();
  });
}

export function start(): void {
  sessionDropdown();
  wireClicks();
  void refresh();
  setInterval(() => void refresh(), CONFIG.pollIntervalMs);
}

start();
