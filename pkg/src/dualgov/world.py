"""The two-chain world: wiring, command routing and world-level hashing.

A world owns exactly two chains (labels "data" and "gov"), a shared actor
directory, the bridge between the chains, the data-chain asset and policy
registries and the governance-chain decision log. All mutation funnels into
per-chain command streams; `tick` produces the next block. With `auto_tick`
on, every high-level operation is followed immediately by the block that
applies it, which is how the interactive API serves synchronous results.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .assets import AssetRegistry, BlobStore, TransitionGraph
from .bridge import Bridge
from .canonical import digest_of
from .errors import ConfigError, NotFoundError, PolicyError, error_for_code
from .governance import DecisionLog, Policy, PolicyRegistry
from .keys import (
    Actor,
    Address,
    KeyedHashAuthenticator,
    account_address,
    escrow_address,
    named_address,
    token_address,
    wallet_address,
)
from .ledger import Block, Chain, ChainConfig, Receipt, SignedTransaction, fee_model_from_json
from .multisig import Proposal, ProposalStatus, Provenance, Wallet, WalletRegistry

BRIDGE_ACTOR_NAME = "(bridge)"

_CMD_KINDS = {
    "createWallet": "createWallet",
    "confirm": "confirm",
    "revoke": "revoke",
    "bridgeLock": "bridgeLock",
    "bridgeMint": "bridgeMint",
    "bridgeBurn": "bridgeBurn",
    "bridgeRelease": "bridgeRelease",
    "applyPolicy": "applyPolicy",
    "noop": "noop",
}


class ChainExecutor:
    """Interprets commands for one chain and hosts its wallet registry."""

    def __init__(self, world: "World", label: str):
        self.world = world
        self.label = label
        self.chain: Chain | None = None
        self.wallets = WalletRegistry()
        self._height = 0

    # -- CommandExecutor -------------------------------------------------

    def action_kind(self, payload: dict) -> str:
        cmd = payload.get("cmd", "noop")
        if cmd == "submit":
            return payload["action"]["kind"]
        return _CMD_KINDS.get(cmd, "noop")

    def apply(self, chain: Chain, tx: SignedTransaction, height: int) -> dict | None:
        self._height = height
        payload = tx.payload
        cmd = payload.get("cmd", "noop")
        if cmd == "noop":
            return None
        if cmd == "createWallet":
            wallet = self.wallets.create(
                payload["address"], payload.get("name", ""), list(payload["owners"]), int(payload["required"])
            )
            if payload.get("name"):
                chain.set_name(wallet.address, payload["name"])
            return {"wallet": wallet.address}
        if cmd == "submit":
            wallet = self.wallets.get(payload["wallet"])
            proposal = wallet.submit_proposal(
                tx.sender, payload["destination"], payload["action"], payload.get("description", ""), self
            )
            self._project_decision(wallet, proposal)
            return {"proposal_id": proposal.id, "status": proposal.status.value}
        if cmd == "confirm":
            wallet = self.wallets.get(payload["wallet"])
            proposal = wallet.confirm(tx.sender, int(payload["proposal_id"]), self)
            self._project_decision(wallet, proposal)
            return {"proposal_id": proposal.id, "status": proposal.status.value}
        if cmd == "revoke":
            wallet = self.wallets.get(payload["wallet"])
            proposal = wallet.revoke(tx.sender, int(payload["proposal_id"]))
            return {"proposal_id": proposal.id, "status": proposal.status.value}
        if cmd == "bridgeLock":
            return self.world.bridge.handle_lock(chain, payload, tx.sender, height)
        if cmd == "bridgeMint":
            return self.world.bridge.handle_mint(chain, payload, tx.sender, height)
        if cmd == "bridgeBurn":
            return self.world.bridge.handle_burn(chain, payload, tx.sender, height)
        if cmd == "bridgeRelease":
            return self.world.bridge.handle_release(chain, payload, tx.sender, height)
        if cmd == "applyPolicy":
            return self.world.bridge.handle_apply_policy(chain, payload, tx.sender, height)
        raise ConfigError(f"unknown command {cmd!r}")

    def state_view(self) -> dict:
        view: dict = {"wallets": self.wallets.state_view()}
        if self.label == "data":
            view["assets"] = self.world.asset_registry.state_view()
            view["policies"] = self.world.policy_registry.state_view()
        if self.label == "gov":
            view["decisions"] = self.world.decision_log.state_view()
        return view

    def _project_decision(self, wallet: Wallet, proposal: Proposal) -> None:
        # The decision log discloses executed governance-chain proposals, one
        # record per execution, appended in the block that executed it.
        if self.label == "gov" and proposal.status is ProposalStatus.EXECUTED:
            self.world.decision_log.record_decision(wallet.address, proposal, self.world.display_name)

    # -- WalletHost ------------------------------------------------------

    def execution_height(self) -> int:
        return self._height

    def set_name(self, address_hex: str, name: str) -> None:
        self.chain.set_name(address_hex, name)

    def mint_tokens(self, token: str, to_hex: str, amount: int) -> None:
        self.chain.mint(token, to_hex, amount)

    def move_tokens(self, frm_hex: str, token: str, to_hex: str, amount: int) -> None:
        self.chain.move(token, frm_hex, to_hex, amount)

    def register_asset(self, asset_id: str, asset_class: str, metadata: dict, provenance: Provenance) -> None:
        if self.label != "data":
            raise ConfigError("asset registry lives on the data chain")
        self.world.asset_registry.apply_register(asset_id, asset_class, metadata, provenance)

    def update_asset_state(
        self, asset_id: str, to_state: str, measurement_digest: str | None, provenance: Provenance
    ) -> None:
        if self.label != "data":
            raise ConfigError("asset registry lives on the data chain")
        self.world.asset_registry.apply_state_update(asset_id, to_state, measurement_digest, provenance)

    def apply_policy_update(self, action: dict, provenance: Provenance) -> None:
        if self.label != "gov":
            raise ConfigError("policy updates are decided on the governance chain and relayed")
        # Executing on the governance chain only finalizes the decision; the
        # data chain's registry changes when the bridge relays it.


@dataclass
class OpResult:
    tx_digest: str
    receipt: Receipt | None = None

    @property
    def result(self) -> dict:
        return (self.receipt.result if self.receipt else None) or {}


class World:
    def __init__(
        self,
        chain_configs: list[ChainConfig],
        actor_names: list[str],
        graphs: dict[str, TransitionGraph] | None = None,
        default_policy: Policy | None = None,
        blob_root: Path | str | None = None,
        auto_tick: bool = False,
    ):
        self.authenticator = KeyedHashAuthenticator()
        self.auto_tick = auto_tick
        self.actors: dict[str, Actor] = {}
        self.actor_by_hex: dict[str, Actor] = {}
        self.bridge_actor = self._register_actor(BRIDGE_ACTOR_NAME)
        for name in actor_names:
            self.register_actor(name)
        self.escrow_hex = escrow_address().hex

        self.blob_store = BlobStore(blob_root)
        self.decision_log = DecisionLog()
        if default_policy is None:
            default_policy = Policy("*", "*", validator_wallet=None, min_confirmations=None)
        self.policy_registry = PolicyRegistry(default=default_policy)
        self.asset_registry = AssetRegistry(
            graphs=graphs,
            blob_store=self.blob_store,
            proposal_resolver=self._resolve_proposal,
            policy_gate=self._policy_gate,
        )

        self.chains: dict[str, Chain] = {}
        self.executors: dict[str, ChainExecutor] = {}
        seen_ids: set[int] = set()
        for config in chain_configs:
            if config.chain_id in seen_ids:
                raise ConfigError(f"duplicate chain_id {config.chain_id}")
            seen_ids.add(config.chain_id)
            if config.label in self.chains:
                raise ConfigError(f"duplicate chain label {config.label!r}")
            executor = ChainExecutor(self, config.label)
            chain = Chain(config, self.authenticator, executor)
            executor.chain = chain
            self.chains[config.label] = chain
            self.executors[config.label] = executor
        if set(self.chains) != {"data", "gov"}:
            raise ConfigError("a world needs exactly one 'data' and one 'gov' chain")

        self.bridge = Bridge(self)
        self.policy_registry.receipt_verifier = self.bridge.verify_receipt
        self.wallet_labels: dict[str, str] = {}  # scenario label -> wallet hex
        self.wallet_chain: dict[str, str] = {}  # wallet hex -> chain label
        self._wallet_seq: dict[str, int] = {label: 0 for label in self.chains}

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_config(cls, config: dict, blob_root: Path | str | None = None) -> "World":
        actor_names = list(config.get("actors", []))
        graphs = None
        if config.get("transition_graphs"):
            graphs = {}
            for spec in config["transition_graphs"]:
                graph = TransitionGraph.from_json(spec)
                graphs[graph.asset_class] = graph
        default_policy = None
        if "default_policy" in config:
            spec = config["default_policy"] or {}
            validator = spec.get("validator_wallet")
            default_policy = Policy(
                "*",
                "*",
                validator_wallet=validator,
                min_confirmations=spec.get("min_confirmations"),
            )
        world = cls.__new__(cls)
        chain_configs = []
        # chain configs may reference authorities symbolically; resolve with a
        # throwaway directory so derived addresses match the final world's.
        for chain_spec in config.get("chains", []):
            authorities = tuple(
                _resolve_static_ref(ref, actor_names) for ref in chain_spec.get("authorities", [])
            )
            chain_configs.append(
                ChainConfig(
                    chain_id=int(chain_spec["chain_id"]),
                    label=chain_spec["label"],
                    authorities=authorities,
                    fee_model=fee_model_from_json(chain_spec["fee_model"]),
                    block_size_limit=int(chain_spec.get("block_size_limit", 100)),
                )
            )
        world.__init__(
            chain_configs,
            actor_names,
            graphs=graphs,
            default_policy=default_policy,
            blob_root=blob_root,
            auto_tick=bool(config.get("auto_tick", False)),
        )
        return world

    def _register_actor(self, name: str) -> Actor:
        actor = Actor.named(name)
        self.actors[name] = actor
        self.actor_by_hex[actor.address.hex] = actor
        self.authenticator.register(actor.address, actor.key)
        return actor

    def register_actor(self, name: str) -> Actor:
        if name == BRIDGE_ACTOR_NAME:
            raise ConfigError(f"{BRIDGE_ACTOR_NAME} is reserved")
        if name in self.actors:
            raise ConfigError(f"duplicate actor name {name!r}")
        return self._register_actor(name)

    # ------------------------------------------------------------------
    # directory / refs
    # ------------------------------------------------------------------

    def display_name(self, address_hex: str) -> str:
        actor = self.actor_by_hex.get(address_hex)
        if actor is not None:
            return actor.name
        return Address.from_hex(address_hex).display

    def actor_named(self, name: str) -> Actor:
        actor = self.actors.get(name)
        if actor is None:
            raise NotFoundError(f"unknown actor {name!r}")
        return actor

    def resolve_ref(self, ref: str) -> str:
        """Resolve an address reference ("actor:Tom", "wallet:main", hex, ...) to hex."""
        if ref.startswith("0x"):
            return Address.from_hex(ref).hex
        if ":" in ref:
            prefix, _, name = ref.partition(":")
            if prefix == "actor":
                return self.actor_named(name).address.hex
            if prefix == "wallet":
                if name not in self.wallet_labels:
                    raise NotFoundError(f"no wallet labelled {name!r}")
                return self.wallet_labels[name]
            if prefix == "token":
                return token_address(name).hex
            if prefix == "account":
                return account_address(name).hex
            if prefix == "authority":
                return named_address("authority", name).hex
        if ref == "escrow":
            return self.escrow_hex
        raise ConfigError(f"cannot resolve address reference {ref!r}")

    def find_wallet(self, wallet_hex: str) -> tuple[str, Wallet]:
        label = self.wallet_chain.get(wallet_hex)
        if label is not None and wallet_hex in self.executors[label].wallets:
            return label, self.executors[label].wallets.get(wallet_hex)
        for label, executor in self.executors.items():
            if wallet_hex in executor.wallets:
                return label, executor.wallets.get(wallet_hex)
        raise NotFoundError(f"no wallet at {wallet_hex}")

    def wallets_in_order(self) -> list[tuple[str, Wallet]]:
        out = []
        for label in ("data", "gov"):
            for wallet in self.executors[label].wallets.in_order():
                out.append((label, wallet))
        return out

    # ------------------------------------------------------------------
    # command stream
    # ------------------------------------------------------------------

    def _sign_tx(self, chain: Chain, actor: Actor, payload: dict) -> SignedTransaction:
        nonce = chain.next_nonce(actor.address.hex)
        unsigned = SignedTransaction(sender=actor.address.hex, nonce=nonce, payload=payload, signature="")
        signature = self.authenticator.sign(actor.key, unsigned.signing_message())
        return SignedTransaction(sender=actor.address.hex, nonce=nonce, payload=payload, signature=signature)

    def submit_actor_tx(self, chain_label: str, sender: str, payload: dict) -> str:
        """Sign and enqueue a command; `sender` is an actor name or address hex."""
        actor = self.actor_by_hex.get(sender) or self.actors.get(sender)
        if actor is None:
            raise NotFoundError(f"unknown sender {sender!r}")
        chain = self.chain(chain_label)
        return chain.submit_signed(self._sign_tx(chain, actor, payload))

    def submit_system_tx(self, chain_label: str, payload: dict) -> str:
        chain = self.chain(chain_label)
        return chain.submit_signed(self._sign_tx(chain, self.bridge_actor, payload))

    def chain(self, label: str) -> Chain:
        if label not in self.chains:
            raise NotFoundError(f"no chain labelled {label!r}")
        return self.chains[label]

    def tick(self, chain_label: str) -> Block:
        return self.chain(chain_label).produce_block()

    def _finish(self, chain_label: str, tx_digest: str) -> OpResult:
        if not self.auto_tick:
            return OpResult(tx_digest=tx_digest)
        self.tick(chain_label)
        receipt = self.chains[chain_label].receipts[tx_digest]
        if receipt.status != "success":
            raise error_for_code(receipt.error_code or "DomainError", receipt.reason or "command rejected")
        return OpResult(tx_digest=tx_digest, receipt=receipt)

    # ------------------------------------------------------------------
    # high-level operations (scenario runner, API and CLI share these)
    # ------------------------------------------------------------------

    def create_wallet(
        self,
        chain_label: str,
        creator: str,
        name: str,
        owners: list[str],
        required: int,
        label: str | None = None,
    ) -> tuple[str, OpResult]:
        chain = self.chain(chain_label)
        address = wallet_address(chain.config.chain_id, self._wallet_seq[chain_label]).hex
        self._wallet_seq[chain_label] += 1
        payload = {
            "cmd": "createWallet",
            "address": address,
            "name": name,
            "owners": owners,
            "required": required,
        }
        tx = self.submit_actor_tx(chain_label, creator, payload)
        self.wallet_chain[address] = chain_label
        if label:
            self.wallet_labels[label] = address
        return address, self._finish(chain_label, tx)

    def submit_proposal(
        self, wallet_hex: str, proposer: str, destination: str, action: dict, description: str
    ) -> OpResult:
        chain_label = self._wallet_chain_label(wallet_hex)
        payload = {
            "cmd": "submit",
            "wallet": wallet_hex,
            "destination": destination,
            "action": action,
            "description": description,
        }
        tx = self.submit_actor_tx(chain_label, proposer, payload)
        return self._finish(chain_label, tx)

    def confirm(self, wallet_hex: str, owner: str, proposal_id: int) -> OpResult:
        chain_label = self._wallet_chain_label(wallet_hex)
        payload = {"cmd": "confirm", "wallet": wallet_hex, "proposal_id": proposal_id}
        tx = self.submit_actor_tx(chain_label, owner, payload)
        return self._finish(chain_label, tx)

    def revoke(self, wallet_hex: str, owner: str, proposal_id: int) -> OpResult:
        chain_label = self._wallet_chain_label(wallet_hex)
        payload = {"cmd": "revoke", "wallet": wallet_hex, "proposal_id": proposal_id}
        tx = self.submit_actor_tx(chain_label, owner, payload)
        return self._finish(chain_label, tx)

    def _wallet_chain_label(self, wallet_hex: str) -> str:
        label = self.wallet_chain.get(wallet_hex)
        if label is None:
            label, _ = self.find_wallet(wallet_hex)
        return label

    def bridge_transfer(self, direction: str, token: str, amount: int, holder: str, mode: str = "lock_and_mint"):
        holder_hex = holder if holder.startswith("0x") else self.actor_named(holder).address.hex
        if mode == "lock_and_mint":
            transfer = self.bridge.lock_and_mint(direction, token, amount, holder_hex)
            first = "data" if direction == "data_to_gov" else "gov"
            second = "gov" if direction == "data_to_gov" else "data"
        elif mode == "burn_and_release":
            transfer = self.bridge.burn_and_release(direction, token, amount, holder_hex)
            # the burn happens on the original destination, the release back home
            first = "gov" if direction == "data_to_gov" else "data"
            second = "data" if direction == "data_to_gov" else "gov"
        else:
            raise ConfigError(f"unknown bridge mode {mode!r}")
        if self.auto_tick:
            self.tick(first)
            self.tick(second)
        return transfer

    def relay(self, wallet_hex: str, proposal_id: int):
        receipt = self.bridge.relay_decision(wallet_hex, proposal_id)
        if self.auto_tick:
            self.tick("data")
        return receipt

    # ------------------------------------------------------------------
    # cross-module gates
    # ------------------------------------------------------------------

    def _resolve_proposal(self, wallet_hex: str, proposal_id: int) -> tuple[str, int] | None:
        label = self.wallet_chain.get(wallet_hex)
        if label is None:
            return None
        registry = self.executors[label].wallets
        if wallet_hex not in registry:
            return None
        wallet = registry.get(wallet_hex)
        if not 0 <= proposal_id < len(wallet.proposals):
            return None
        proposal = wallet.proposals[proposal_id]
        confirmations = proposal.confirmations_at_execution or len(proposal.confirmations)
        return proposal.status.value, confirmations

    def _policy_gate(self, asset_class: str, action_kind: str, provenance: Provenance) -> None:
        policy = self.policy_registry.policy_at(asset_class, action_kind, provenance.height)
        if policy.validator_wallet is not None and policy.validator_wallet != provenance.wallet:
            raise PolicyError(
                f"policy for ({asset_class}, {action_kind}) requires validator {policy.validator_wallet}"
            )
        if policy.min_confirmations is not None and provenance.confirmations < policy.min_confirmations:
            raise PolicyError(
                f"policy for ({asset_class}, {action_kind}) requires {policy.min_confirmations} confirmations, "
                f"got {provenance.confirmations}"
            )

    # ------------------------------------------------------------------
    # hashing / reporting / queries
    # ------------------------------------------------------------------

    def digest(self) -> str:
        """World digest covering chain state, chain position, queued commands,
        bridge bookkeeping and the off-chain blob index."""
        return digest_of(
            {
                "chains": {
                    label: {
                        "state": chain.state_digest(),
                        "height": chain.height,
                        "head": chain.head.block_hash,
                        "mempool": [tx.digest for tx in chain.mempool],
                    }
                    for label, chain in self.chains.items()
                },
                "bridge": self.bridge.state_view(),
                "blobs": self.blob_store.digests(),
            }
        )

    def fee_report(self) -> dict:
        chains = {}
        for label, chain in self.chains.items():
            receipts = chain.all_receipts()
            fees = [r.fee_paid for r in receipts]
            by_action: dict[str, dict] = {}
            for r in receipts:
                agg = by_action.setdefault(r.action_kind, {"count": 0, "total_fees": 0, "gas_used": 0})
                agg["count"] += 1
                agg["total_fees"] += r.fee_paid
                agg["gas_used"] += r.gas_used
            chains[label] = {
                "tx_count": len(receipts),
                "total_fees": sum(fees),
                "min_fee": min(fees) if fees else 0,
                "max_fee": max(fees) if fees else 0,
                "mean_fee": (sum(fees) / len(fees)) if fees else 0.0,
                "by_action": {k: by_action[k] for k in sorted(by_action)},
            }
        return {"chains": chains}

    def query(self, spec: dict):
        """Evaluate a read-only query (scenario asserts and the CLI share this)."""
        q = spec.get("query")
        if q == "balance":
            chain = self.chain(spec["chain"])
            holder = self.resolve_ref(spec["holder"])
            return chain.balance_of(spec["token"], holder) if chain.knows_token(spec["token"]) else 0
        if q == "chain_height":
            return self.chain(spec["chain"]).height
        if q == "decision_count":
            return len(self.decision_log.records)
        if q == "decision_actions":
            return [r.action for r in self.decision_log.records]
        if q == "decision_confirmations":
            return [r.confirmations for r in self.decision_log.records]
        if q == "decision_submitters":
            return [r.submitted_by for r in self.decision_log.records]
        if q == "wallet_required":
            _, wallet = self.find_wallet(self.resolve_ref(spec["wallet"]))
            return wallet.required
        if q == "wallet_owner_count":
            _, wallet = self.find_wallet(self.resolve_ref(spec["wallet"]))
            return len(wallet.owners)
        if q == "wallet_name":
            wallet_hex = self.resolve_ref(spec["wallet"])
            label, _ = self.find_wallet(wallet_hex)
            return self.chains[label].name_of(wallet_hex)
        if q == "proposal_status":
            _, wallet = self.find_wallet(self.resolve_ref(spec["wallet"]))
            return wallet.get_proposal(int(spec["id"])).status.value
        if q == "asset_state":
            return self.asset_registry._get(spec["asset_id"]).current_state
        if q == "asset_event_count":
            return len(self.asset_registry.asset_history(spec["asset_id"]))
        if q == "reconcile_delta":
            return self.bridge.reconcile(spec["token"]).delta
        if q == "policy_min_confirmations":
            policy = self.policy_registry.current_policy(spec["class"], spec["action_kind"])
            return policy.min_confirmations
        raise ConfigError(f"unknown query {q!r}")


def _resolve_static_ref(ref: str, actor_names: list[str]) -> Address:
    """Resolve an address reference without a live world (genesis configs)."""
    if ref.startswith("0x"):
        return Address.from_hex(ref)
    if ":" in ref:
        prefix, _, name = ref.partition(":")
        if prefix == "actor":
            if name not in actor_names:
                raise ConfigError(f"authority actor {name!r} not declared")
            return Actor.named(name).address
        if prefix == "authority":
            return named_address("authority", name)
        if prefix == "account":
            return account_address(name)
    raise ConfigError(f"cannot resolve genesis address reference {ref!r}")
