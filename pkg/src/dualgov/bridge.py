"""Cross-chain bridge: token lock/mint round trips and governance relay.

A single trusted relayer moves value by escrowing on the source chain and
minting an equal amount on the destination chain (burn-and-release for the
way back), and carries executed policy-update decisions from the governance
chain into the data chain's policy registry, leaving a verifiable receipt.
Each leg rides the host chain's normal block production.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canonical import digest_of
from .errors import (
    ActionKindError,
    BalanceError,
    ConfigError,
    DuplicateError,
    NotExecutedError,
    ProvenanceError,
    ReconcileError,
)
from .governance import RuleUpdate
from .multisig import ProposalStatus

DATA_TO_GOV = "data_to_gov"
GOV_TO_DATA = "gov_to_data"

INITIATED = "initiated"
COMPLETED = "completed"
REFUNDED = "refunded"


@dataclass
class BridgeTransfer:
    transfer_id: int
    direction: str
    mode: str  # lock_and_mint | burn_and_release
    token: str
    amount: int
    holder: str  # address hex
    status: str = INITIATED
    lock_height: int | None = None
    mint_height: int | None = None
    burn_height: int | None = None
    release_height: int | None = None

    def to_json(self) -> dict:
        return {
            "transfer_id": self.transfer_id,
            "direction": self.direction,
            "mode": self.mode,
            "token": self.token,
            "amount": self.amount,
            "holder": self.holder,
            "status": self.status,
            "lock_height": self.lock_height,
            "mint_height": self.mint_height,
            "burn_height": self.burn_height,
            "release_height": self.release_height,
        }


@dataclass
class RelayReceipt:
    receipt_id: int
    source_wallet: str
    source_proposal_id: int
    source_block: int
    payload_digest: str
    applied_at: int | None = None

    def to_json(self) -> dict:
        return {
            "receipt_id": self.receipt_id,
            "source_wallet": self.source_wallet,
            "source_proposal_id": self.source_proposal_id,
            "source_block": self.source_block,
            "payload_digest": self.payload_digest,
            "applied_at": self.applied_at,
        }


@dataclass
class ConservationReport:
    token: str
    escrow_locked: int
    foreign_minted: int
    foreign_burned: int

    @property
    def delta(self) -> int:
        return self.escrow_locked - self.foreign_minted + self.foreign_burned

    def to_json(self) -> dict:
        return {
            "token": self.token,
            "escrow_locked": self.escrow_locked,
            "foreign_minted": self.foreign_minted,
            "foreign_burned": self.foreign_burned,
            "delta": self.delta,
        }


class Bridge:
    """Relayer state; chain-side effects go through the world's command stream.

    The world object passed in must expose `chains` (label -> Chain),
    `escrow_hex`, `bridge_actor` and `submit_system_tx(chain_label, payload)`.
    """

    def __init__(self, world):
        self.world = world
        self.transfers: list[BridgeTransfer] = []
        self.receipts: list[RelayReceipt] = []
        self._relayed: set[tuple[str, int]] = set()
        # per (token, holder) liability created by bridge mints, net of burns
        self.bridged_balance: dict[tuple[str, str], int] = {}
        self.foreign_minted: dict[str, int] = {}
        self.foreign_burned: dict[str, int] = {}
        self.halted = False

    # ------------------------------------------------------------------
    # token legs
    # ------------------------------------------------------------------

    def _legs(self, direction: str) -> tuple[str, str]:
        if direction == DATA_TO_GOV:
            return "data", "gov"
        if direction == GOV_TO_DATA:
            return "gov", "data"
        raise ConfigError(f"unknown bridge direction {direction!r}")

    def lock_and_mint(self, direction: str, token: str, amount: int, holder_hex: str) -> BridgeTransfer:
        """Escrow `amount` on the source chain, then mint it to the holder on the
        destination chain; each leg lands in the next block of its chain."""
        if amount <= 0:
            raise ConfigError("bridge amount must be > 0")
        self._refuse_if_halted()
        source, _ = self._legs(direction)
        chain = self.world.chains[source]
        if not chain.knows_token(token) or chain.balance_of(token, holder_hex) < amount:
            raise BalanceError(f"{holder_hex} holds less than {amount} {token} on {source}")
        transfer = BridgeTransfer(
            transfer_id=len(self.transfers),
            direction=direction,
            mode="lock_and_mint",
            token=token,
            amount=amount,
            holder=holder_hex,
        )
        self.transfers.append(transfer)
        self.world.submit_actor_tx(
            source,
            holder_hex,
            {"cmd": "bridgeLock", "transfer_id": transfer.transfer_id, "token": token, "amount": amount},
        )
        return transfer

    def burn_and_release(self, direction: str, token: str, amount: int, holder_hex: str) -> BridgeTransfer:
        """Burn previously bridged tokens on the destination chain and release
        the matching escrow on the origin chain.

        `direction` names the original lock direction; the burn happens on that
        direction's destination chain.
        """
        if amount <= 0:
            raise ConfigError("bridge amount must be > 0")
        self._refuse_if_halted()
        source, dest = self._legs(direction)
        bridged = self.bridged_balance.get((token, holder_hex), 0)
        if bridged < amount:
            raise BalanceError(f"{holder_hex} has only {bridged} bridged {token}, cannot release {amount}")
        escrow = self._escrow_balance(source, token)
        liability = self.foreign_minted.get(token, 0) - self.foreign_burned.get(token, 0)
        if escrow < liability:
            self.halted = True
            raise ReconcileError(
                f"escrow holds {escrow} {token} against liability {liability}; bridging halted"
            )
        if escrow < amount:
            self.halted = True
            raise ReconcileError(f"escrow underflow: {escrow} {token} < release {amount}; bridging halted")
        transfer = BridgeTransfer(
            transfer_id=len(self.transfers),
            direction=direction,
            mode="burn_and_release",
            token=token,
            amount=amount,
            holder=holder_hex,
        )
        self.transfers.append(transfer)
        self.world.submit_actor_tx(
            dest,
            holder_hex,
            {"cmd": "bridgeBurn", "transfer_id": transfer.transfer_id, "token": token, "amount": amount},
        )
        return transfer

    def _escrow_balance(self, chain_label: str, token: str) -> int:
        chain = self.world.chains[chain_label]
        if not chain.knows_token(token):
            return 0
        return chain.balance_of(token, self.world.escrow_hex)

    def _refuse_if_halted(self) -> None:
        if self.halted:
            raise ReconcileError("bridge is halted after a conservation breach")

    # ------------------------------------------------------------------
    # command handlers (invoked by chain executors during block production)
    # ------------------------------------------------------------------

    def handle_lock(self, chain, payload: dict, sender_hex: str, height: int) -> dict:
        transfer = self._transfer(payload["transfer_id"])
        if sender_hex != transfer.holder:
            raise ProvenanceError("lock must be sent by the transfer holder")
        try:
            chain.move(transfer.token, transfer.holder, self.world.escrow_hex, transfer.amount)
        except ConfigError as err:
            transfer.status = REFUNDED
            raise BalanceError(str(err))
        transfer.lock_height = height
        _, dest = self._legs(transfer.direction)
        self.world.submit_system_tx(
            dest,
            {
                "cmd": "bridgeMint",
                "transfer_id": transfer.transfer_id,
                "token": transfer.token,
                "to": transfer.holder,
                "amount": transfer.amount,
            },
        )
        return {"transfer_id": transfer.transfer_id}

    def handle_mint(self, chain, payload: dict, sender_hex: str, height: int) -> dict:
        if sender_hex != self.world.bridge_actor.address.hex:
            raise ProvenanceError("bridge mints must come from the relayer account")
        transfer = self._transfer(payload["transfer_id"])
        if transfer.mint_height is not None or transfer.lock_height is None:
            raise ProvenanceError(f"transfer {transfer.transfer_id} has no pending mint leg")
        chain.mint(transfer.token, transfer.holder, transfer.amount)
        transfer.mint_height = height
        transfer.status = COMPLETED
        key = (transfer.token, transfer.holder)
        self.bridged_balance[key] = self.bridged_balance.get(key, 0) + transfer.amount
        self.foreign_minted[transfer.token] = self.foreign_minted.get(transfer.token, 0) + transfer.amount
        return {"transfer_id": transfer.transfer_id}

    def handle_burn(self, chain, payload: dict, sender_hex: str, height: int) -> dict:
        transfer = self._transfer(payload["transfer_id"])
        if sender_hex != transfer.holder:
            raise ProvenanceError("burn must be sent by the transfer holder")
        try:
            chain.burn(transfer.token, transfer.holder, transfer.amount)
        except ConfigError as err:
            transfer.status = REFUNDED
            raise BalanceError(str(err))
        transfer.burn_height = height
        key = (transfer.token, transfer.holder)
        self.bridged_balance[key] = self.bridged_balance.get(key, 0) - transfer.amount
        self.foreign_burned[transfer.token] = self.foreign_burned.get(transfer.token, 0) + transfer.amount
        source, _ = self._legs(transfer.direction)
        self.world.submit_system_tx(
            source,
            {
                "cmd": "bridgeRelease",
                "transfer_id": transfer.transfer_id,
                "token": transfer.token,
                "to": transfer.holder,
                "amount": transfer.amount,
            },
        )
        return {"transfer_id": transfer.transfer_id}

    def handle_release(self, chain, payload: dict, sender_hex: str, height: int) -> dict:
        if sender_hex != self.world.bridge_actor.address.hex:
            raise ProvenanceError("escrow releases must come from the relayer account")
        transfer = self._transfer(payload["transfer_id"])
        if transfer.release_height is not None or transfer.burn_height is None:
            raise ProvenanceError(f"transfer {transfer.transfer_id} has no pending release leg")
        chain.move(transfer.token, self.world.escrow_hex, transfer.holder, transfer.amount)
        transfer.release_height = height
        transfer.status = COMPLETED
        return {"transfer_id": transfer.transfer_id}

    def _transfer(self, transfer_id: int) -> BridgeTransfer:
        if not 0 <= transfer_id < len(self.transfers):
            raise ProvenanceError(f"unknown bridge transfer {transfer_id}")
        return self.transfers[transfer_id]

    # ------------------------------------------------------------------
    # governance relay
    # ------------------------------------------------------------------

    def relay_decision(self, wallet_hex: str, proposal_id: int) -> RelayReceipt:
        """Carry an executed governance-chain policy update to the data chain."""
        chain_label, wallet = self.world.find_wallet(wallet_hex)
        if chain_label != "gov":
            raise ProvenanceError("only governance-chain decisions are relayed")
        proposal = wallet.get_proposal(proposal_id)
        if proposal.action_kind != "updatePolicy":
            raise ActionKindError(f"cannot relay a {proposal.action_kind} proposal")
        if proposal.status is not ProposalStatus.EXECUTED:
            raise NotExecutedError(f"proposal {proposal_id} is {proposal.status.value}, not executed")
        key = (wallet_hex, proposal_id)
        if key in self._relayed:
            raise DuplicateError(f"proposal {proposal_id} on {wallet_hex} already relayed")
        update = RuleUpdate.from_action(proposal.action)
        receipt = RelayReceipt(
            receipt_id=len(self.receipts),
            source_wallet=wallet_hex,
            source_proposal_id=proposal_id,
            source_block=proposal.executed_at or 0,
            payload_digest=digest_of(update.to_json()),
        )
        self.receipts.append(receipt)
        self._relayed.add(key)
        self.world.submit_system_tx(
            "data",
            {"cmd": "applyPolicy", "receipt_id": receipt.receipt_id, "update": update.to_json()},
        )
        return receipt

    def verify_receipt(self, receipt, update: RuleUpdate) -> None:
        """Receipt verifier handed to the data chain's policy registry."""
        if not isinstance(receipt, RelayReceipt):
            raise ProvenanceError("policy provenance is not a relay receipt")
        if not (0 <= receipt.receipt_id < len(self.receipts)) or self.receipts[receipt.receipt_id] is not receipt:
            raise ProvenanceError("relay receipt was not issued by this bridge")
        if receipt.payload_digest != digest_of(update.to_json()):
            raise ProvenanceError("relay receipt does not match the rule update")

    def handle_apply_policy(self, chain, payload: dict, sender_hex: str, height: int) -> dict:
        if sender_hex != self.world.bridge_actor.address.hex:
            raise ProvenanceError("policy applications must come from the relayer account")
        receipt_id = payload["receipt_id"]
        if not 0 <= receipt_id < len(self.receipts):
            raise ProvenanceError(f"unknown relay receipt {receipt_id}")
        receipt = self.receipts[receipt_id]
        update = RuleUpdate.from_action(payload["update"])
        # effective strictly after the block carrying the relay
        self.world.policy_registry.apply_rule_update(update, receipt, effective_from=height + 1)
        receipt.applied_at = height
        return {"receipt_id": receipt_id}

    # ------------------------------------------------------------------
    # audit
    # ------------------------------------------------------------------

    def reconcile(self, token: str) -> ConservationReport:
        escrow = self._escrow_balance("data", token) + self._escrow_balance("gov", token)
        return ConservationReport(
            token=token,
            escrow_locked=escrow,
            foreign_minted=self.foreign_minted.get(token, 0),
            foreign_burned=self.foreign_burned.get(token, 0),
        )

    def state_view(self) -> dict:
        return {
            "transfers": [t.to_json() for t in self.transfers],
            "receipts": [r.to_json() for r in self.receipts],
            "bridged": {f"{token}/{holder}": v for (token, holder), v in sorted(self.bridged_balance.items())},
            "foreign_minted": dict(self.foreign_minted),
            "foreign_burned": dict(self.foreign_burned),
            "halted": self.halted,
        }
