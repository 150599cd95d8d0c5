"""Supply-chain asset registry with off-chain measurement storage.

Assets move through a configured per-class transition graph; every event is
stamped with the multisig provenance that approved it. Bulky measurement
payloads never touch the chain: they live in a content-addressed blob store
and only the 32-byte digest is anchored in the event.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .canonical import sha256_hex
from .errors import (
    AnchorError,
    ConfigError,
    DuplicateAssetError,
    NotFoundError,
    ProvenanceError,
    TransitionError,
)
from .multisig import Provenance


@dataclass(frozen=True)
class TransitionGraph:
    asset_class: str
    states: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    initial: str

    def validate(self) -> None:
        if self.initial not in self.states:
            raise ConfigError(f"initial state {self.initial!r} not in states")
        for frm, to in self.edges:
            if frm not in self.states or to not in self.states:
                raise ConfigError(f"edge ({frm}, {to}) leaves the state set")

    def allows(self, frm: str, to: str) -> bool:
        return (frm, to) in self.edges

    @classmethod
    def linear(cls, asset_class: str, states: list[str]) -> "TransitionGraph":
        edges = frozenset(zip(states, states[1:]))
        return cls(asset_class=asset_class, states=tuple(states), edges=edges, initial=states[0])

    @classmethod
    def from_json(cls, spec: dict) -> "TransitionGraph":
        graph = cls(
            asset_class=spec["class"],
            states=tuple(spec["states"]),
            edges=frozenset((f, t) for f, t in spec["edges"]),
            initial=spec["initial"],
        )
        graph.validate()
        return graph

    def to_json(self) -> dict:
        return {
            "class": self.asset_class,
            "states": list(self.states),
            "edges": sorted([f, t] for f, t in self.edges),
            "initial": self.initial,
        }


#: default beef-chain lifecycle; the graph is configuration, this is only a
#: plausible out-of-the-box value.
CATTLE_GRAPH = TransitionGraph.linear(
    "cattle", ["Registered", "OnFarm", "InTransit", "Processing", "Processed", "Retail"]
)


class BlobStore:
    """Append-only content-addressed store; sha256 digests address the bytes.

    With a root directory each blob is one file named by its lowercase hex
    digest; without one the store is memory-backed (used by replays and tests).
    """

    def __init__(self, root: Path | str | None = None):
        self.root = Path(root) if root is not None else None
        self._memory: dict[str, bytes] = {}
        # blobs put through this store instance, in insertion order; the world
        # digest covers these, not whatever happens to sit in the directory
        self._session: dict[str, None] = {}
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes) -> str:
        digest = sha256_hex(data)
        if self.root is not None:
            path = self.root / digest
            if not path.exists():
                path.write_bytes(data)
        else:
            self._memory[digest] = data
        self._session.setdefault(digest)
        return digest

    def get(self, digest: str) -> bytes:
        if self.root is not None:
            path = self.root / digest
            if not path.exists():
                raise NotFoundError(f"no blob {digest}")
            return path.read_bytes()
        if digest not in self._memory:
            raise NotFoundError(f"no blob {digest}")
        return self._memory[digest]

    def has(self, digest: str) -> bool:
        if self.root is not None:
            return (self.root / digest).exists()
        return digest in self._memory

    def digests(self) -> list[str]:
        """Digests put through this store instance, sorted."""
        return sorted(self._session)


@dataclass
class AssetEvent:
    seq: int
    kind: str  # registered | state_updated
    from_state: str | None
    to_state: str
    measurement_digest: str | None
    provenance: Provenance

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "from_state": self.from_state,
            "to_state": self.to_state,
            "measurement_digest": self.measurement_digest,
            "provenance": self.provenance.to_json(),
        }


@dataclass
class Asset:
    asset_id: str
    asset_class: str
    current_state: str
    registered_at: int
    metadata: dict = field(default_factory=dict)
    events: list[AssetEvent] = field(default_factory=list)

    @property
    def last_measurement_digest(self) -> str | None:
        for event in reversed(self.events):
            if event.measurement_digest:
                return event.measurement_digest
        return None

    def to_json(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "class": self.asset_class,
            "current_state": self.current_state,
            "registered_at": self.registered_at,
            "metadata": dict(self.metadata),
            "events": [e.to_json() for e in self.events],
        }


# (status, confirmations_at_execution) of the proposal a provenance points at,
# or None when the proposal cannot be resolved.
ProposalResolver = Callable[[str, int], "tuple[str, int] | None"]
# Raises PolicyError when the provenance does not satisfy the policy in force
# for (asset_class, action_kind) at the provenance height.
PolicyGate = Callable[[str, str, Provenance], None]


class AssetRegistry:
    """Assets on the data chain, validated by multisig provenance and policy."""

    def __init__(
        self,
        graphs: dict[str, TransitionGraph] | None = None,
        blob_store: BlobStore | None = None,
        proposal_resolver: ProposalResolver | None = None,
        policy_gate: PolicyGate | None = None,
    ):
        self.graphs = dict(graphs) if graphs else {CATTLE_GRAPH.asset_class: CATTLE_GRAPH}
        self.blob_store = blob_store if blob_store is not None else BlobStore()
        self.proposal_resolver = proposal_resolver
        self.policy_gate = policy_gate
        self.assets: dict[str, Asset] = {}
        self._order: list[str] = []

    def _check_provenance(self, asset_class: str, action_kind: str, provenance: Provenance) -> None:
        if self.proposal_resolver is not None:
            resolved = self.proposal_resolver(provenance.wallet, provenance.proposal_id)
            if resolved is None:
                raise ProvenanceError(
                    f"provenance cites unknown proposal {provenance.proposal_id} on {provenance.wallet}"
                )
            status, confirmations = resolved
            if status != "executed":
                raise ProvenanceError(f"provenance cites a {status} proposal, not an executed one")
            if confirmations != provenance.confirmations:
                raise ProvenanceError("provenance confirmation count does not match the proposal")
        if self.policy_gate is not None:
            self.policy_gate(asset_class, action_kind, provenance)

    def apply_register(self, asset_id: str, asset_class: str, metadata: dict, provenance: Provenance) -> Asset:
        if asset_class not in self.graphs:
            raise ConfigError(f"no transition graph for asset class {asset_class!r}")
        if asset_id in self.assets:
            raise DuplicateAssetError(f"asset {asset_id!r} already registered")
        self._check_provenance(asset_class, "registerAsset", provenance)
        graph = self.graphs[asset_class]
        asset = Asset(
            asset_id=asset_id,
            asset_class=asset_class,
            current_state=graph.initial,
            registered_at=provenance.height,
            metadata=dict(metadata),
        )
        asset.events.append(
            AssetEvent(
                seq=0,
                kind="registered",
                from_state=None,
                to_state=graph.initial,
                measurement_digest=None,
                provenance=provenance,
            )
        )
        self.assets[asset_id] = asset
        self._order.append(asset_id)
        return asset

    def apply_state_update(
        self, asset_id: str, to_state: str, measurement_digest: str | None, provenance: Provenance
    ) -> AssetEvent:
        asset = self._get(asset_id)
        graph = self.graphs[asset.asset_class]
        if not graph.allows(asset.current_state, to_state):
            raise TransitionError(
                f"{asset.asset_class} cannot move {asset.current_state!r} -> {to_state!r}"
            )
        if measurement_digest is not None and not self.blob_store.has(measurement_digest):
            raise AnchorError(f"measurement digest {measurement_digest} not present in the blob store")
        self._check_provenance(asset.asset_class, "updateAssetState", provenance)
        event = AssetEvent(
            seq=len(asset.events),
            kind="state_updated",
            from_state=asset.current_state,
            to_state=to_state,
            measurement_digest=measurement_digest,
            provenance=provenance,
        )
        asset.events.append(event)
        asset.current_state = to_state
        return event

    def _get(self, asset_id: str) -> Asset:
        asset = self.assets.get(asset_id)
        if asset is None:
            raise NotFoundError(f"no asset {asset_id!r}")
        return asset

    def asset_history(self, asset_id: str) -> list[AssetEvent]:
        return list(self._get(asset_id).events)

    def asset_view(self, asset_class: str | None = None, state: str | None = None) -> list[dict]:
        """(asset_id, class, current_state, last measurement digest) rows, sorted by id."""
        rows = []
        for asset_id in sorted(self.assets):
            asset = self.assets[asset_id]
            if asset_class is not None and asset.asset_class != asset_class:
                continue
            if state is not None and asset.current_state != state:
                continue
            rows.append(
                {
                    "asset_id": asset.asset_id,
                    "class": asset.asset_class,
                    "current_state": asset.current_state,
                    "last_digest": asset.last_measurement_digest or "",
                }
            )
        return rows

    def view_csv(self, asset_class: str | None = None, state: str | None = None) -> str:
        lines = ["asset_id,class,current_state,last_digest"]
        for row in self.asset_view(asset_class, state):
            lines.append(f"{row['asset_id']},{row['class']},{row['current_state']},{row['last_digest']}")
        return "\n".join(lines) + "\n"

    def state_view(self) -> dict:
        return {
            "graphs": {c: g.to_json() for c, g in sorted(self.graphs.items())},
            "assets": {a: self.assets[a].to_json() for a in self._order},
        }
