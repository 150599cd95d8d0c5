"""M-of-N multisig wallets: submit, confirm, revoke, execute.

A proposal executes atomically in the same block as the confirmation that
reaches the threshold. Submission auto-confirms by the submitter, so a 1-of-N
wallet executes on submit. Administrative actions (owner set, requirement,
naming) and value actions (mint/transfer/withdraw) resolve against a host
interface supplied by the chain runtime; asset and policy actions delegate
through the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

from .errors import (
    AlreadyConfirmedError,
    AlreadyExecutedError,
    ConfigError,
    DomainError,
    NotConfirmedError,
    NotFoundError,
    NotOwnerError,
    OwnerError,
    ThresholdError,
)

#: action kinds a proposal may carry, in the wire spelling used by the
#: decision log and the fee tables.
PROPOSAL_ACTION_KINDS = (
    "setMultisigName",
    "addOwner",
    "removeOwner",
    "changeRequirement",
    "mint",
    "transfer",
    "withdraw",
    "registerAsset",
    "updateAssetState",
    "updatePolicy",
)

_ACTION_FIELDS = {
    "setMultisigName": {"name"},
    "addOwner": {"owner"},
    "removeOwner": {"owner"},
    "changeRequirement": {"required"},
    "mint": {"token", "to", "amount"},
    "transfer": {"token", "to", "amount"},
    "withdraw": {"token", "to", "amount"},
    "registerAsset": {"asset_id", "asset_class", "metadata"},
    "updateAssetState": {"asset_id", "to_state", "measurement_digest"},
    "updatePolicy": {"asset_class", "action_kind", "new_validator", "new_min_confirmations", "justification"},
}

_OPTIONAL_FIELDS = {
    "registerAsset": {"metadata"},
    "updateAssetState": {"measurement_digest"},
    "updatePolicy": {"new_validator", "new_min_confirmations", "justification"},
}


def normalize_action(action: dict) -> dict:
    """Validate an action dict and return it in canonical field order."""
    kind = action.get("kind")
    if kind not in PROPOSAL_ACTION_KINDS:
        raise ConfigError(f"unknown proposal action kind {kind!r}")
    allowed = _ACTION_FIELDS[kind]
    optional = _OPTIONAL_FIELDS.get(kind, set())
    given = set(action) - {"kind"}
    if given - allowed:
        raise ConfigError(f"{kind}: unexpected fields {sorted(given - allowed)}")
    missing = (allowed - optional) - given
    if missing:
        raise ConfigError(f"{kind}: missing fields {sorted(missing)}")
    out = {"kind": kind}
    for name in sorted(allowed):
        if name in action:
            out[name] = action[name]
        elif name in optional:
            out[name] = None if name != "metadata" else {}
    if kind in ("mint", "transfer", "withdraw") and int(out["amount"]) <= 0:
        raise ConfigError(f"{kind}: amount must be > 0")
    if kind == "changeRequirement" and int(out["required"]) < 1:
        raise ConfigError("changeRequirement: target must be >= 1")
    if kind == "updatePolicy" and out["new_validator"] is None and out["new_min_confirmations"] is None:
        raise ConfigError("updatePolicy: at least one of new_validator/new_min_confirmations must change")
    return out


class ProposalStatus(str, Enum):
    PENDING = "pending"
    EXECUTED = "executed"
    FAILED = "failed"


@dataclass
class Provenance:
    """Reference proving an action was approved by an executed proposal."""

    wallet: str
    proposal_id: int
    confirmations: int
    height: int

    def to_json(self) -> dict:
        return {
            "wallet": self.wallet,
            "proposal_id": self.proposal_id,
            "confirmations": self.confirmations,
            "height": self.height,
        }


@dataclass
class Proposal:
    id: int
    destination: str  # address hex
    action: dict
    submitted_by: str  # address hex
    description: str
    confirmations: list[str] = field(default_factory=list)
    status: ProposalStatus = ProposalStatus.PENDING
    executed_at: int | None = None
    confirmations_at_execution: int | None = None
    failure_reason: str | None = None

    @property
    def action_kind(self) -> str:
        return self.action["kind"]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "destination": self.destination,
            "action": self.action,
            "submitted_by": self.submitted_by,
            "description": self.description,
            "confirmations": list(self.confirmations),
            "status": self.status.value,
            "executed_at": self.executed_at,
            "confirmations_at_execution": self.confirmations_at_execution,
            "failure_reason": self.failure_reason,
        }


class WalletHost(Protocol):
    """Chain-side services a wallet needs while executing an action."""

    def execution_height(self) -> int: ...

    def set_name(self, address_hex: str, name: str) -> None: ...

    def mint_tokens(self, token: str, to_hex: str, amount: int) -> None: ...

    def move_tokens(self, frm_hex: str, token: str, to_hex: str, amount: int) -> None: ...

    def register_asset(self, asset_id: str, asset_class: str, metadata: dict, provenance: Provenance) -> None: ...

    def update_asset_state(
        self, asset_id: str, to_state: str, measurement_digest: str | None, provenance: Provenance
    ) -> None: ...

    def apply_policy_update(self, action: dict, provenance: Provenance) -> None: ...


class Wallet:
    def __init__(self, address: str, name: str, owners: list[str], required: int):
        if not owners:
            raise OwnerError("wallet needs at least one owner")
        if len(set(owners)) != len(owners):
            raise OwnerError("duplicate owners")
        if not 1 <= required <= len(owners):
            raise ThresholdError(f"required {required} out of bounds for {len(owners)} owners")
        self.address = address
        self.initial_name = name
        self.owners: list[str] = list(owners)
        self.required = required
        self.proposals: list[Proposal] = []
        self.next_proposal_id = 0

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    def submit_proposal(
        self, proposer: str, destination: str, action: dict, description: str, host: WalletHost
    ) -> Proposal:
        """Create a proposal; the proposer's confirmation is recorded immediately."""
        if proposer not in self.owners:
            raise NotOwnerError(f"{proposer} is not an owner of {self.address}")
        action = normalize_action(action)
        proposal = Proposal(
            id=self.next_proposal_id,
            destination=destination,
            action=action,
            submitted_by=proposer,
            description=description,
            confirmations=[proposer],
        )
        self.next_proposal_id += 1
        self.proposals.append(proposal)
        self._maybe_execute(proposal, host)
        return proposal

    def confirm(self, owner: str, proposal_id: int, host: WalletHost) -> Proposal:
        proposal = self.get_proposal(proposal_id)
        if owner not in self.owners:
            raise NotOwnerError(f"{owner} is not an owner of {self.address}")
        if proposal.status is not ProposalStatus.PENDING:
            raise AlreadyExecutedError(f"proposal {proposal_id} is {proposal.status.value}")
        if owner in proposal.confirmations:
            raise AlreadyConfirmedError(f"{owner} already confirmed proposal {proposal_id}")
        proposal.confirmations.append(owner)
        self._maybe_execute(proposal, host)
        return proposal

    def revoke(self, owner: str, proposal_id: int) -> Proposal:
        proposal = self.get_proposal(proposal_id)
        if proposal.status is not ProposalStatus.PENDING:
            raise AlreadyExecutedError(f"proposal {proposal_id} is {proposal.status.value}")
        if owner not in proposal.confirmations:
            raise NotConfirmedError(f"{owner} has not confirmed proposal {proposal_id}")
        proposal.confirmations.remove(owner)
        return proposal

    def get_proposal(self, proposal_id: int) -> Proposal:
        if not 0 <= proposal_id < len(self.proposals):
            raise NotFoundError(f"no proposal {proposal_id} on wallet {self.address}")
        return self.proposals[proposal_id]

    def list_proposals(self, status: str | None = None) -> list[Proposal]:
        """Proposals in ascending id order; `status` of None or "all" lists everything."""
        if status in (None, "all"):
            return list(self.proposals)
        return [p for p in self.proposals if p.status.value == status]

    # ------------------------------------------------------------------
    # execution
    # ------------------------------------------------------------------

    def _maybe_execute(self, proposal: Proposal, host: WalletHost) -> None:
        if len(proposal.confirmations) >= self.required:
            self._execute(proposal, host)

    def _execute(self, proposal: Proposal, host: WalletHost) -> None:
        # Marked executed before the action runs so delegates (asset registry,
        # policy journal) see consistent provenance; rolled back to failed if
        # the action raises. The flip is invisible outside this command.
        proposal.status = ProposalStatus.EXECUTED
        proposal.confirmations_at_execution = len(proposal.confirmations)
        proposal.executed_at = host.execution_height()
        try:
            self._apply_action(proposal, host)
        except DomainError as err:
            proposal.status = ProposalStatus.FAILED
            proposal.failure_reason = f"{err.code}: {err}"
            proposal.executed_at = None
            proposal.confirmations_at_execution = None

    def _apply_action(self, proposal: Proposal, host: WalletHost) -> None:
        action = proposal.action
        kind = action["kind"]
        if kind == "setMultisigName":
            host.set_name(proposal.destination, action["name"])
        elif kind == "addOwner":
            self._require_self_destination(proposal)
            if action["owner"] in self.owners:
                raise OwnerError(f"{action['owner']} is already an owner")
            self.owners.append(action["owner"])
        elif kind == "removeOwner":
            self._require_self_destination(proposal)
            if action["owner"] not in self.owners:
                raise OwnerError(f"{action['owner']} is not an owner")
            if len(self.owners) == 1:
                raise OwnerError("cannot remove the last owner")
            self.owners.remove(action["owner"])
            if self.required > len(self.owners):
                self.required = len(self.owners)
        elif kind == "changeRequirement":
            self._require_self_destination(proposal)
            target = int(action["required"])
            if not 1 <= target <= len(self.owners):
                raise ThresholdError(f"requirement {target} out of bounds for {len(self.owners)} owners")
            self.required = target
        elif kind == "mint":
            host.mint_tokens(action["token"], action["to"], int(action["amount"]))
        elif kind in ("transfer", "withdraw"):
            host.move_tokens(self.address, action["token"], action["to"], int(action["amount"]))
        elif kind == "registerAsset":
            host.register_asset(
                action["asset_id"], action["asset_class"], action.get("metadata") or {}, self._provenance(proposal, host)
            )
        elif kind == "updateAssetState":
            host.update_asset_state(
                action["asset_id"], action["to_state"], action.get("measurement_digest"), self._provenance(proposal, host)
            )
        elif kind == "updatePolicy":
            host.apply_policy_update(action, self._provenance(proposal, host))
        else:  # pragma: no cover - normalize_action gates kinds
            raise ConfigError(f"unhandled action kind {kind!r}")

    def _require_self_destination(self, proposal: Proposal) -> None:
        if proposal.destination != self.address:
            raise OwnerError("administrative actions must target the hosting wallet")

    def _provenance(self, proposal: Proposal, host: WalletHost) -> Provenance:
        return Provenance(
            wallet=self.address,
            proposal_id=proposal.id,
            confirmations=len(proposal.confirmations),
            height=host.execution_height(),
        )

    def to_json(self) -> dict:
        return {
            "address": self.address,
            "owners": list(self.owners),
            "required": self.required,
            "next_proposal_id": self.next_proposal_id,
            "proposals": [p.to_json() for p in self.proposals],
        }


class WalletRegistry:
    """Wallets hosted on one chain, keyed by address."""

    def __init__(self):
        self.wallets: dict[str, Wallet] = {}
        self._order: list[str] = []

    def create(self, address: str, name: str, owners: list[str], required: int) -> Wallet:
        if address in self.wallets:
            raise ConfigError(f"wallet address {address} already in use")
        wallet = Wallet(address, name, owners, required)
        self.wallets[address] = wallet
        self._order.append(address)
        return wallet

    def get(self, address: str) -> Wallet:
        wallet = self.wallets.get(address)
        if wallet is None:
            raise NotFoundError(f"no wallet at {address}")
        return wallet

    def __contains__(self, address: str) -> bool:
        return address in self.wallets

    def in_order(self) -> list[Wallet]:
        return [self.wallets[a] for a in self._order]

    def state_view(self) -> dict:
        return {a: self.wallets[a].to_json() for a in self._order}
