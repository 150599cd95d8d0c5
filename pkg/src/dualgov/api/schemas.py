"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str


class CreateWalletRequest(BaseModel):
    chain: str
    name: str = ""
    owners: list[str]
    required: int


class SubmitProposalRequest(BaseModel):
    destination: str
    action: dict
    description: str = ""


class BridgeTransferRequest(BaseModel):
    direction: str
    token: str
    amount: int
    mode: str = "lock_and_mint"


class BlobUploadRequest(BaseModel):
    data: str | None = None
    data_hex: str | None = None


class ChainInfo(BaseModel):
    chain_id: int
    label: str
    height: int
    head: str
    state_digest: str
    fee_model: dict
    authorities: list[str]


class PartyInfo(BaseModel):
    address: str
    display: str
    name: str = ""


class ProposalInfo(BaseModel):
    id: int
    wallet: str
    destination: str
    destination_display: str
    action: dict
    action_kind: str
    submitted_by: PartyInfo
    description: str
    confirmations: list[PartyInfo]
    status: str
    executed_at: int | None = None
    confirmations_at_execution: int | None = None
    failure_reason: str | None = None


class WalletInfo(BaseModel):
    address: str
    display: str
    chain: str
    name: str
    owners: list[PartyInfo]
    required: int
    proposal_count: int
    pending_count: int
    balances: dict[str, int] = Field(default_factory=dict)


class DecisionRow(BaseModel):
    id: int
    destination: str
    destination_display: str
    action: str
    submitted_by: str
    confirmations: int
    description: str


class PolicyRow(BaseModel):
    asset_class: str
    action_kind: str
    validator_wallet: str | None
    min_confirmations: int | None
    effective_from: int | None = None
    receipt_id: int | None = None


class PolicyTable(BaseModel):
    default: PolicyRow | None
    journal: list[PolicyRow]


class AssetRow(BaseModel):
    asset_id: str
    asset_class: str
    current_state: str
    last_digest: str


class ProvenanceInfo(BaseModel):
    wallet: str
    proposal_id: int
    confirmations: int
    height: int


class AssetEventRow(BaseModel):
    seq: int
    kind: str
    from_state: str | None
    to_state: str
    measurement_digest: str | None
    provenance: ProvenanceInfo


class TransferInfo(BaseModel):
    transfer_id: int
    direction: str
    mode: str
    token: str
    amount: int
    holder: str
    status: str
    lock_height: int | None = None
    mint_height: int | None = None
    burn_height: int | None = None
    release_height: int | None = None


class ReconcileInfo(BaseModel):
    token: str
    escrow_locked: int
    foreign_minted: int
    foreign_burned: int
    delta: int


class BlobInfo(BaseModel):
    digest: str
    size: int
