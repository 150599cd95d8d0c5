"""HTTP service exposing a world to the console and external tools.

The service is a pure projection of the world object: every mutation funnels
through the same high-level operations the scenario runner uses, and with
auto-tick on (the default for served worlds) each mutating request returns
post-block state. Identity is a static bearer-token table mapping tokens to
configured actors.
"""

from __future__ import annotations

import threading

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, Response

from ..errors import (
    AlreadyConfirmedError,
    AlreadyExecutedError,
    AuthError,
    BalanceError,
    ConfigError,
    DomainError,
    DuplicateAssetError,
    DuplicateError,
    NonceError,
    NotConfirmedError,
    NotFoundError,
    NotOwnerError,
    ReconcileError,
)
from ..keys import ellipsize
from ..multisig import Proposal, ProposalStatus, Wallet
from ..world import World
from . import schemas

#: module error -> HTTP status; anything unlisted is a 400.
STATUS_BY_ERROR = {
    AuthError: 403,
    NotOwnerError: 403,
    NotFoundError: 404,
    AlreadyConfirmedError: 409,
    AlreadyExecutedError: 409,
    NotConfirmedError: 409,
    DuplicateError: 409,
    DuplicateAssetError: 409,
    NonceError: 409,
    ReconcileError: 409,
}


def _status_for(err: DomainError) -> int:
    for cls, status in STATUS_BY_ERROR.items():
        if isinstance(err, cls):
            return status
    return 400


def create_app(world: World, tokens: dict[str, str]) -> FastAPI:
    """Build the service around an initialized world.

    `tokens` maps bearer tokens to configured actor names; unknown names are
    rejected up front so a typo fails at startup, not at first request.
    """
    for actor_name in tokens.values():
        world.actor_named(actor_name)

    app = FastAPI(title="dualgov", version="0.1.0")
    lock = threading.Lock()

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, err: DomainError):
        return JSONResponse(status_code=_status_for(err), content={"code": err.code, "message": str(err)})

    def identity(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise _unauthorized("missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        actor = tokens.get(token)
        if actor is None:
            raise _unauthorized("unknown token")
        return actor

    # ------------------------------------------------------------------
    # projections
    # ------------------------------------------------------------------

    def party(address_hex: str) -> schemas.PartyInfo:
        actor = world.actor_by_hex.get(address_hex)
        return schemas.PartyInfo(
            address=address_hex,
            display=ellipsize(address_hex),
            name=actor.name if actor else "",
        )

    def proposal_info(wallet: Wallet, proposal: Proposal) -> schemas.ProposalInfo:
        return schemas.ProposalInfo(
            id=proposal.id,
            wallet=wallet.address,
            destination=proposal.destination,
            destination_display=ellipsize(proposal.destination),
            action=proposal.action,
            action_kind=proposal.action_kind,
            submitted_by=party(proposal.submitted_by),
            description=proposal.description,
            confirmations=[party(a) for a in proposal.confirmations],
            status=proposal.status.value,
            executed_at=proposal.executed_at,
            confirmations_at_execution=proposal.confirmations_at_execution,
            failure_reason=proposal.failure_reason,
        )

    def wallet_info(chain_label: str, wallet: Wallet) -> schemas.WalletInfo:
        chain = world.chains[chain_label]
        balances = {
            token: holders[wallet.address]
            for token, holders in chain.balances.items()
            if holders.get(wallet.address)
        }
        return schemas.WalletInfo(
            address=wallet.address,
            display=ellipsize(wallet.address),
            chain=chain_label,
            name=chain.name_of(wallet.address),
            owners=[party(o) for o in wallet.owners],
            required=wallet.required,
            proposal_count=len(wallet.proposals),
            pending_count=sum(1 for p in wallet.proposals if p.status is ProposalStatus.PENDING),
            balances=balances,
        )

    def page(items: list, offset: int, limit: int) -> list:
        return items[offset : offset + limit]

    # ------------------------------------------------------------------
    # chains / wallets / proposals
    # ------------------------------------------------------------------

    @app.get("/v1/chains", response_model=list[schemas.ChainInfo])
    def get_chains():
        return [
            schemas.ChainInfo(
                chain_id=chain.config.chain_id,
                label=label,
                height=chain.height,
                head=chain.head.block_hash,
                state_digest=chain.state_digest(),
                fee_model=chain.config.fee_model.to_json(),
                authorities=[a.hex for a in chain.config.authorities],
            )
            for label, chain in sorted(world.chains.items())
        ]

    @app.get("/v1/wallets", response_model=list[schemas.WalletInfo])
    def list_wallets(offset: int = Query(0, ge=0), limit: int = Query(100, ge=1, le=1000)):
        rows = [wallet_info(label, wallet) for label, wallet in world.wallets_in_order()]
        return page(rows, offset, limit)

    @app.post("/v1/wallets", response_model=schemas.WalletInfo, status_code=201)
    def create_wallet(body: schemas.CreateWalletRequest, actor: str = Depends(identity)):
        with lock:
            address, _ = world.create_wallet(body.chain, actor, body.name, body.owners, body.required)
            return wallet_info(body.chain, world.executors[body.chain].wallets.get(address))

    @app.get("/v1/wallets/{address}", response_model=schemas.WalletInfo)
    def get_wallet(address: str):
        label, wallet = world.find_wallet(address)
        return wallet_info(label, wallet)

    @app.get("/v1/wallets/{address}/proposals", response_model=list[schemas.ProposalInfo])
    def list_proposals(
        address: str,
        status: str = Query("all", pattern="^(pending|executed|failed|all)$"),
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=1, le=1000),
    ):
        _, wallet = world.find_wallet(address)
        rows = [proposal_info(wallet, p) for p in wallet.list_proposals(status)]
        return page(rows, offset, limit)

    @app.post("/v1/wallets/{address}/proposals", response_model=schemas.ProposalInfo, status_code=201)
    def submit_proposal(address: str, body: schemas.SubmitProposalRequest, actor: str = Depends(identity)):
        with lock:
            _, wallet = world.find_wallet(address)
            result = world.submit_proposal(address, actor, body.destination, body.action, body.description)
            return proposal_info(wallet, wallet.get_proposal(result.result["proposal_id"]))

    @app.post("/v1/wallets/{address}/proposals/{proposal_id}/confirmations", response_model=schemas.ProposalInfo)
    def confirm_proposal(address: str, proposal_id: int, actor: str = Depends(identity)):
        with lock:
            _, wallet = world.find_wallet(address)
            wallet.get_proposal(proposal_id)  # 404 before the command is queued
            world.confirm(address, actor, proposal_id)
            return proposal_info(wallet, wallet.get_proposal(proposal_id))

    @app.delete("/v1/wallets/{address}/proposals/{proposal_id}/confirmations", response_model=schemas.ProposalInfo)
    def revoke_confirmation(address: str, proposal_id: int, actor: str = Depends(identity)):
        with lock:
            _, wallet = world.find_wallet(address)
            wallet.get_proposal(proposal_id)
            world.revoke(address, actor, proposal_id)
            return proposal_info(wallet, wallet.get_proposal(proposal_id))

    # ------------------------------------------------------------------
    # governance
    # ------------------------------------------------------------------

    @app.get("/v1/governance/decisions", response_model=list[schemas.DecisionRow])
    def list_decisions(
        destination: str | None = None,
        action: str | None = None,
        actor: str | None = None,
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=1, le=1000),
    ):
        records = world.decision_log.decision_log(destination=destination, action=action, actor=actor)
        rows = [
            schemas.DecisionRow(
                id=r.id,
                destination=r.destination,
                destination_display=ellipsize(r.destination),
                action=r.action,
                submitted_by=r.submitted_by,
                confirmations=r.confirmations,
                description=r.description,
            )
            for r in records
        ]
        return page(rows, offset, limit)

    @app.get("/v1/governance/policies", response_model=schemas.PolicyTable)
    def list_policies():
        registry = world.policy_registry
        default = None
        if registry.default is not None:
            default = schemas.PolicyRow(
                asset_class=registry.default.asset_class,
                action_kind=registry.default.action_kind,
                validator_wallet=registry.default.validator_wallet,
                min_confirmations=registry.default.min_confirmations,
            )
        journal = [
            schemas.PolicyRow(
                asset_class=policy.asset_class,
                action_kind=policy.action_kind,
                validator_wallet=policy.validator_wallet,
                min_confirmations=policy.min_confirmations,
                effective_from=effective_from,
                receipt_id=receipt_id,
            )
            for policy, receipt_id, effective_from in registry.journal
        ]
        return schemas.PolicyTable(default=default, journal=journal)

    # ------------------------------------------------------------------
    # assets / blobs
    # ------------------------------------------------------------------

    @app.get("/v1/assets", response_model=list[schemas.AssetRow])
    def list_assets(
        asset_class: str | None = None,
        state: str | None = None,
        offset: int = Query(0, ge=0),
        limit: int = Query(100, ge=1, le=1000),
    ):
        rows = [
            schemas.AssetRow(
                asset_id=row["asset_id"],
                asset_class=row["class"],
                current_state=row["current_state"],
                last_digest=row["last_digest"],
            )
            for row in world.asset_registry.asset_view(asset_class, state)
        ]
        return page(rows, offset, limit)

    @app.get("/v1/assets/{asset_id}/history", response_model=list[schemas.AssetEventRow])
    def asset_history(asset_id: str):
        return [
            schemas.AssetEventRow(
                seq=e.seq,
                kind=e.kind,
                from_state=e.from_state,
                to_state=e.to_state,
                measurement_digest=e.measurement_digest,
                provenance=schemas.ProvenanceInfo(**e.provenance.to_json()),
            )
            for e in world.asset_registry.asset_history(asset_id)
        ]

    @app.post("/v1/blobs", response_model=schemas.BlobInfo, status_code=201)
    def put_blob(body: schemas.BlobUploadRequest, actor: str = Depends(identity)):
        if body.data is None and body.data_hex is None:
            raise ConfigError("provide data or data_hex")
        payload = body.data.encode("utf-8") if body.data is not None else bytes.fromhex(body.data_hex)
        with lock:
            digest = world.blob_store.put(payload)
        return schemas.BlobInfo(digest=digest, size=len(payload))

    @app.get("/v1/blobs/{digest}")
    def get_blob(digest: str):
        return Response(content=world.blob_store.get(digest), media_type="application/octet-stream")

    # ------------------------------------------------------------------
    # bridge / fees
    # ------------------------------------------------------------------

    @app.post("/v1/bridge/transfers", response_model=schemas.TransferInfo, status_code=201)
    def bridge_transfer(body: schemas.BridgeTransferRequest, actor: str = Depends(identity)):
        if body.amount <= 0:
            raise BalanceError("amount must be > 0")
        with lock:
            transfer = world.bridge_transfer(body.direction, body.token, body.amount, actor, mode=body.mode)
        return schemas.TransferInfo(**transfer.to_json())

    @app.get("/v1/bridge/transfers", response_model=list[schemas.TransferInfo])
    def list_transfers(offset: int = Query(0, ge=0), limit: int = Query(100, ge=1, le=1000)):
        rows = [schemas.TransferInfo(**t.to_json()) for t in world.bridge.transfers]
        return page(rows, offset, limit)

    @app.get("/v1/bridge/reconcile/{token}", response_model=schemas.ReconcileInfo)
    def reconcile(token: str):
        return schemas.ReconcileInfo(**world.bridge.reconcile(token).to_json())

    @app.get("/v1/fees/report")
    def fees_report():
        return world.fee_report()

    app.state.world = world
    return app


class Unauthorized(DomainError):
    """Missing or unknown bearer token on a mutating request."""


def _unauthorized(message: str) -> DomainError:
    return Unauthorized(message)


STATUS_BY_ERROR[Unauthorized] = 401
