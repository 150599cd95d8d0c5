// Wire types for the service's v1 REST interface.

export interface PartyInfo {
  address: string;
  display: string;
  name: string;
}

export interface WalletInfo {
  address: string;
  display: string;
  chain: string;
  name: string;
  owners: PartyInfo[];
  required: number;
  proposal_count: number;
  pending_count: number;
  balances: Record<string, number>;
}

export interface ProposalInfo {
  id: number;
  wallet: string;
  destination: string;
  destination_display: string;
  action: Record<string, unknown> & { kind: string };
  action_kind: string;
  submitted_by: PartyInfo;
  description: string;
  confirmations: PartyInfo[];
  status: "pending" | "executed" | "failed";
  executed_at: number | null;
  confirmations_at_execution: number | null;
  failure_reason: string | null;
}

export interface DecisionRow {
  id: number;
  destination: string;
  destination_display: string;
  action: string;
  submitted_by: string;
  confirmations: number;
  description: string;
}

export interface AssetRow {
  asset_id: string;
  asset_class: string;
  current_state: string;
  last_digest: string;
}

export interface ChainInfo {
  chain_id: number;
  label: string;
  height: number;
  head: string;
  state_digest: string;
  fee_model: Record<string, unknown>;
  authorities: string[];
}

export interface ErrorBody {
  code: string;
  message: string;
}

export interface SessionActor {
  name: string;
  token: string;
}
