"""Transparent rule/policy decision-making.

Two pieces: an append-only decision log disclosing every executed
governance-chain proposal (destination, action, participant, confirmation
count, description), and a policy registry mapping (asset class, action kind)
scopes to the validator wallet and confirmation threshold that must approve
matching data-chain actions. Policy changes arrive only through bridge-relayed
governance decisions and take effect strictly after the relay height.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Callable

from .errors import DuplicateError, NotExecutedError, PolicyMissingError, ProvenanceError
from .multisig import Proposal, ProposalStatus


@dataclass(frozen=True)
class DecisionRecord:
    id: int
    destination: str  # address hex
    action: str  # action kind, e.g. "setMultisigName"
    submitted_by: str  # actor display name
    confirmations: int
    description: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "destination": self.destination,
            "action": self.action,
            "submitted_by": self.submitted_by,
            "confirmations": self.confirmations,
            "description": self.description,
        }


class DecisionLog:
    """Deterministic projection of executed governance proposals."""

    def __init__(self):
        self.records: list[DecisionRecord] = []
        self._recorded: set[tuple[str, int]] = set()

    def record_decision(self, wallet_address: str, proposal: Proposal, name_of: Callable[[str], str]) -> DecisionRecord:
        if proposal.status is not ProposalStatus.EXECUTED:
            raise NotExecutedError(f"proposal {proposal.id} is {proposal.status.value}, not executed")
        key = (wallet_address, proposal.id)
        if key in self._recorded:
            raise DuplicateError(f"proposal {proposal.id} on {wallet_address} already recorded")
        record = DecisionRecord(
            id=len(self.records),
            destination=proposal.destination,
            action=proposal.action_kind,
            submitted_by=name_of(proposal.submitted_by),
            confirmations=proposal.confirmations_at_execution or 0,
            description=proposal.description,
        )
        self.records.append(record)
        self._recorded.add(key)
        return record

    def decision_log(
        self,
        destination: str | None = None,
        action: str | None = None,
        actor: str | None = None,
    ) -> list[DecisionRecord]:
        out = []
        for record in self.records:
            if destination is not None and record.destination != destination:
                continue
            if action is not None and record.action != action:
                continue
            if actor is not None and record.submitted_by != actor:
                continue
            out.append(record)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "destination", "action", "submitted_by", "confirmations", "description"])
        for r in self.records:
            writer.writerow([r.id, r.destination, r.action, r.submitted_by, r.confirmations, r.description])
        return buf.getvalue()

    def state_view(self) -> list[dict]:
        return [r.to_json() for r in self.records]


@dataclass(frozen=True)
class Policy:
    asset_class: str
    action_kind: str
    validator_wallet: str | None  # None: any wallet may validate
    min_confirmations: int | None  # None: the wallet's own requirement governs

    def to_json(self) -> dict:
        return {
            "class": self.asset_class,
            "action_kind": self.action_kind,
            "validator_wallet": self.validator_wallet,
            "min_confirmations": self.min_confirmations,
        }


@dataclass(frozen=True)
class RuleUpdate:
    asset_class: str
    action_kind: str
    new_validator: str | None
    new_min_confirmations: int | None
    justification: str

    def __post_init__(self):
        if self.new_validator is None and self.new_min_confirmations is None:
            raise ProvenanceError("rule update changes nothing")
        if self.new_min_confirmations is not None and self.new_min_confirmations < 1:
            raise ProvenanceError("min confirmations must be >= 1")

    @classmethod
    def from_action(cls, action: dict) -> "RuleUpdate":
        return cls(
            asset_class=action["asset_class"],
            action_kind=action["action_kind"],
            new_validator=action.get("new_validator"),
            new_min_confirmations=action.get("new_min_confirmations"),
            justification=action.get("justification") or "",
        )

    def to_json(self) -> dict:
        return {
            "asset_class": self.asset_class,
            "action_kind": self.action_kind,
            "new_validator": self.new_validator,
            "new_min_confirmations": self.new_min_confirmations,
            "justification": self.justification,
        }


# Raises ProvenanceError unless the receipt is genuine and matches the update.
ReceiptVerifier = Callable[[object, RuleUpdate], None]


class PolicyRegistry:
    """Journal of applied policies; the last entry for a scope wins.

    Entries become effective strictly after the height at which the relayed
    update was applied, so a policy change never retroactively invalidates
    events recorded before it landed.
    """

    def __init__(self, default: Policy | None = None, receipt_verifier: ReceiptVerifier | None = None):
        self.default = default
        self.receipt_verifier = receipt_verifier
        # (policy, receipt_id, effective_from) in application order
        self.journal: list[tuple[Policy, int | None, int]] = []

    def apply_rule_update(self, update: RuleUpdate, provenance, effective_from: int) -> Policy:
        if self.receipt_verifier is not None:
            self.receipt_verifier(provenance, update)
        elif provenance is None:
            raise ProvenanceError("policy update lacks a relay receipt")
        previous = self._latest(update.asset_class, update.action_kind)
        base = previous or self.default or Policy(update.asset_class, update.action_kind, None, None)
        policy = Policy(
            asset_class=update.asset_class,
            action_kind=update.action_kind,
            validator_wallet=update.new_validator if update.new_validator is not None else base.validator_wallet,
            min_confirmations=(
                update.new_min_confirmations
                if update.new_min_confirmations is not None
                else base.min_confirmations
            ),
        )
        receipt_id = getattr(provenance, "receipt_id", None)
        self.journal.append((policy, receipt_id, effective_from))
        return policy

    def _latest(self, asset_class: str, action_kind: str, height: int | None = None) -> Policy | None:
        found = None
        for policy, _, effective_from in self.journal:
            if policy.asset_class != asset_class or policy.action_kind != action_kind:
                continue
            if height is not None and effective_from > height:
                continue
            found = policy
        return found

    def current_policy(self, asset_class: str, action_kind: str) -> Policy:
        policy = self._latest(asset_class, action_kind)
        if policy is not None:
            return policy
        if self.default is not None:
            return self.default
        raise PolicyMissingError(f"no policy for ({asset_class}, {action_kind}) and no default configured")

    def policy_at(self, asset_class: str, action_kind: str, height: int) -> Policy:
        policy = self._latest(asset_class, action_kind, height=height)
        if policy is not None:
            return policy
        if self.default is not None:
            return self.default
        raise PolicyMissingError(f"no policy for ({asset_class}, {action_kind}) and no default configured")

    def state_view(self) -> list[dict]:
        return [
            {"policy": policy.to_json(), "receipt_id": receipt_id, "effective_from": effective_from}
            for policy, receipt_id, effective_from in self.journal
        ]
