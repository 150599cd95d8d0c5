// Thin typed client over fetch. The console holds no state of its own: every
// view renders from fresh responses, so the server stays the single source of
// truth and a reload reproduces exactly what the API reports.

import type {
  AssetRow,
  ChainInfo,
  DecisionRow,
  ErrorBody,
  ProposalInfo,
  WalletInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface DecisionFilters {
  action?: string;
  actor?: string;
  destination?: string;
  offset?: number;
  limit?: number;
}

export class ConsoleApi {
  constructor(
    private readonly baseUrl: string,
    private token: string | null = null,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail: ErrorBody = { code: "HttpError", message: `HTTP ${response.status}` };
      try {
        detail = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error body; keep the generic detail
      }
      throw new ApiError(response.status, detail.code, detail.message);
    }
    return (await response.json()) as T;
  }

  chains(): Promise<ChainInfo[]> {
    return this.request("GET", "/v1/chains");
  }

  listWallets(): Promise<WalletInfo[]> {
    return this.request("GET", "/v1/wallets");
  }

  getWallet(address: string): Promise<WalletInfo> {
    return this.request("GET", `/v1/wallets/${address}`);
  }

  listProposals(address: string, status: "pending" | "executed" | "failed" | "all" = "all"): Promise<ProposalInfo[]> {
    return this.request("GET", `/v1/wallets/${address}/proposals?status=${status}`);
  }

  submitProposal(
    address: string,
    destination: string,
    action: Record<string, unknown>,
    description: string,
  ): Promise<ProposalInfo> {
    return this.request("POST", `/v1/wallets/${address}/proposals`, { destination, action, description });
  }

  confirm(address: string, proposalId: number): Promise<ProposalInfo> {
    return this.request("POST", `/v1/wallets/${address}/proposals/${proposalId}/confirmations`, {});
  }

  revoke(address: string, proposalId: number): Promise<ProposalInfo> {
    return this.request("DELETE", `/v1/wallets/${address}/proposals/${proposalId}/confirmations`);
  }

  decisions(filters: DecisionFilters = {}): Promise<DecisionRow[]> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filters)) {
      if (value !== undefined && value !== "") {
        params.set(key, String(value));
      }
    }
    const suffix = params.size ? `?${params.toString()}` : "";
    return this.request("GET", `/v1/governance/decisions${suffix}`);
  }

  assets(): Promise<AssetRow[]> {
    return this.request("GET", "/v1/assets");
  }
}
