// Pure projections from wire types to what the widgets show. No fetching, no
// DOM: everything here is deterministic and unit-testable.

import type { DecisionRow, ProposalInfo, WalletInfo } from "./types.js";

/** Column order of the decision-log table; the disclosed artifact's contract. */
export const DECISION_COLUMNS = [
  "id",
  "destination",
  "action",
  "submitted_by",
  "confirmations",
  "description",
] as const;

export interface WalletViewModel {
  address: string;
  display: string;
  chain: string;
  name: string;
  ownerNames: string[];
  required: number;
  pendingCount: number;
}

export function walletViewModel(wallet: WalletInfo): WalletViewModel {
  return {
    address: wallet.address,
    display: wallet.display,
    chain: wallet.chain,
    name: wallet.name,
    ownerNames: wallet.owners.map((o) => o.name || o.display),
    required: wallet.required,
    pendingCount: wallet.pending_count,
  };
}

export interface DecisionRowViewModel {
  id: number;
  destination: string;
  action: string;
  submitted_by: string;
  confirmations: number;
  description: string;
}

export function decisionRowViewModel(row: DecisionRow): DecisionRowViewModel {
  return {
    id: row.id,
    destination: row.destination_display,
    action: row.action,
    submitted_by: row.submitted_by,
    confirmations: row.confirmations,
    description: row.description,
  };
}

export interface PendingRowViewModel {
  id: number;
  actionKind: string;
  destination: string;
  submittedBy: string;
  description: string;
  confirmations: number;
  required: number;
  confirmEnabled: boolean;
  revokeEnabled: boolean;
  disabledReason: string;
}

/**
 * Confirm is enabled only when the session actor is an owner who has not yet
 * confirmed; the API stays the final gate either way.
 */
export function pendingRowViewModel(
  wallet: WalletInfo,
  proposal: ProposalInfo,
  sessionActor: string,
): PendingRowViewModel {
  const isOwner = wallet.owners.some((o) => o.name === sessionActor);
  const hasConfirmed = proposal.confirmations.some((c) => c.name === sessionActor);
  let disabledReason = "";
  if (!isOwner) {
    disabledReason = `${sessionActor} is not an owner of this wallet`;
  } else if (hasConfirmed) {
    disabledReason = `${sessionActor} already confirmed this proposal`;
  }
  return {
    id: proposal.id,
    actionKind: proposal.action_kind,
    destination: proposal.destination_display,
    submittedBy: proposal.submitted_by.name || proposal.submitted_by.display,
    description: proposal.description,
    confirmations: proposal.confirmations.length,
    required: wallet.required,
    confirmEnabled: isOwner && !hasConfirmed,
    revokeEnabled: isOwner && hasConfirmed,
    disabledReason,
  };
}

export function pendingQueue(
  wallet: WalletInfo,
  proposals: ProposalInfo[],
  sessionActor: string,
): PendingRowViewModel[] {
  return proposals
    .filter((p) => p.status === "pending")
    .map((p) => pendingRowViewModel(wallet, p, sessionActor));
}

/** Pre-validation for the settings form; mirrors the wallet's own bounds. */
export function requirementError(target: number, ownerCount: number): string | null {
  if (!Number.isInteger(target) || target < 1) {
    return "requirement must be a positive integer";
  }
  if (target > ownerCount) {
    return `requirement ${target} exceeds the ${ownerCount} owner(s)`;
  }
  return null;
}

/** Shown on the settings panel whenever changes will wait for co-signature. */
export function coSignatureNotice(wallet: WalletInfo): string | null {
  if (wallet.required > 1) {
    return `Changes are submitted as proposals and execute only after ${wallet.required} owners confirm.`;
  }
  return null;
}
