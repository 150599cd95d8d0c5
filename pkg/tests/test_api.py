import pytest
from fastapi.testclient import TestClient

from dualgov.api import create_app
from dualgov.scenario import load_scenario_file, run
from dualgov.world import World

from conftest import FIG5_SCENARIO, world_config

TOKENS = {"tom-token": "Tom", "warwick-token": "Warwick", "santiago-token": "Santiago Del Valle"}


def auth(token="tom-token"):
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def client():
    world = World.from_config(world_config())
    app = create_app(world, TOKENS)
    return TestClient(app)


@pytest.fixture(scope="module")
def golden_client():
    result = run(load_scenario_file(FIG5_SCENARIO))
    result.world.auto_tick = True
    app = create_app(result.world, TOKENS)
    return TestClient(app)


def create_wallet(client, owners, required=1, chain="gov", name="", token="tom-token"):
    response = client.post(
        "/v1/wallets",
        json={"chain": chain, "name": name, "owners": owners, "required": required},
        headers=auth(token),
    )
    assert response.status_code == 201, response.text
    return response.json()


def owner_addresses(client, *names):
    world = client.app.state.world
    return [world.actors[name].address.hex for name in names]


class TestAuth:
    def test_mutation_without_token_is_401(self, client):
        response = client.post("/v1/wallets", json={"chain": "gov", "owners": ["0x" + "11" * 20], "required": 1})
        assert response.status_code == 401
        body = response.json()
        assert set(body) == {"code", "message"}

    def test_unknown_token_is_401(self, client):
        response = client.post(
            "/v1/wallets",
            json={"chain": "gov", "owners": ["0x" + "11" * 20], "required": 1},
            headers=auth("wrong"),
        )
        assert response.status_code == 401

    def test_reads_are_open(self, client):
        assert client.get("/v1/chains").status_code == 200


class TestWalletsAndProposals:
    def test_create_and_get(self, client):
        owners = owner_addresses(client, "Tom", "Warwick")
        wallet = create_wallet(client, owners, required=2, name="Board")
        fetched = client.get(f"/v1/wallets/{wallet['address']}").json()
        assert fetched["name"] == "Board"
        assert fetched["required"] == 2
        assert [o["name"] for o in fetched["owners"]] == ["Tom", "Warwick"]

    def test_submit_executes_on_one_of_n(self, client):
        owners = owner_addresses(client, "Tom")
        wallet = create_wallet(client, owners)
        response = client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "setMultisigName", "name": "X"},
                  "description": "The account needs a name."},
            headers=auth(),
        )
        assert response.status_code == 201
        body = response.json()
        assert body["status"] == "executed"
        assert body["confirmations_at_execution"] == 1

    def test_threshold_confirmation_flow(self, client):
        owners = owner_addresses(client, "Tom", "Warwick")
        wallet = create_wallet(client, owners, required=2)
        submitted = client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "changeRequirement", "required": 1}},
            headers=auth(),
        ).json()
        assert submitted["status"] == "pending"
        confirmed = client.post(
            f"/v1/wallets/{wallet['address']}/proposals/{submitted['id']}/confirmations",
            headers=auth("warwick-token"),
        )
        assert confirmed.status_code == 200
        assert confirmed.json()["status"] == "executed"
        assert confirmed.json()["confirmations_at_execution"] == 2

    def test_double_confirm_is_409(self, client):
        owners = owner_addresses(client, "Tom", "Warwick")
        wallet = create_wallet(client, owners, required=2)
        client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "changeRequirement", "required": 1}},
            headers=auth(),
        )
        response = client.post(f"/v1/wallets/{wallet['address']}/proposals/0/confirmations", headers=auth())
        assert response.status_code == 409
        assert response.json()["code"] == "AlreadyConfirmedError"

    def test_confirm_unknown_proposal_is_404(self, client):
        owners = owner_addresses(client, "Tom")
        wallet = create_wallet(client, owners)
        response = client.post(f"/v1/wallets/{wallet['address']}/proposals/99/confirmations", headers=auth())
        assert response.status_code == 404
        assert response.json()["code"] == "NotFoundError"

    def test_non_owner_submit_is_403(self, client):
        owners = owner_addresses(client, "Tom")
        wallet = create_wallet(client, owners)
        response = client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "setMultisigName", "name": "x"}},
            headers=auth("warwick-token"),
        )
        assert response.status_code == 403
        assert response.json()["code"] == "NotOwnerError"

    def test_revoke_via_delete(self, client):
        owners = owner_addresses(client, "Tom", "Warwick")
        wallet = create_wallet(client, owners, required=2)
        client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "changeRequirement", "required": 1}},
            headers=auth(),
        )
        response = client.delete(f"/v1/wallets/{wallet['address']}/proposals/0/confirmations", headers=auth())
        assert response.status_code == 200
        assert response.json()["confirmations"] == []

    def test_status_filter(self, client):
        owners = owner_addresses(client, "Tom", "Warwick")
        wallet = create_wallet(client, owners, required=2)
        for _ in range(3):
            client.post(
                f"/v1/wallets/{wallet['address']}/proposals",
                json={"destination": wallet["address"], "action": {"kind": "changeRequirement", "required": 1}},
                headers=auth(),
            )
        client.post(f"/v1/wallets/{wallet['address']}/proposals/1/confirmations", headers=auth("warwick-token"))
        pending = client.get(f"/v1/wallets/{wallet['address']}/proposals", params={"status": "pending"}).json()
        executed = client.get(f"/v1/wallets/{wallet['address']}/proposals", params={"status": "executed"}).json()
        assert [p["id"] for p in pending] == [0, 2]
        assert [p["id"] for p in executed] == [1]


class TestGoldenWorldProjections:
    def test_three_wallet_entities_visible(self, golden_client):
        wallets = golden_client.get("/v1/wallets").json()
        assert len(wallets) == 3

    def test_decision_log_rows(self, golden_client):
        rows = golden_client.get("/v1/governance/decisions").json()
        assert [r["id"] for r in rows] == list(range(10))
        assert rows[0]["submitted_by"] == "Tom"
        assert [r["confirmations"] for r in rows] == [1, 1, 1, 1, 1, 2, 2, 2, 2, 2]
        assert list(rows[0]) == ["id", "destination", "destination_display", "action", "submitted_by",
                                 "confirmations", "description"]

    def test_decision_filter_mint(self, golden_client):
        rows = golden_client.get("/v1/governance/decisions", params={"action": "mint"}).json()
        assert [r["id"] for r in rows] == [1, 8, 9]

    def test_pagination_is_stable(self, golden_client):
        first = golden_client.get("/v1/governance/decisions", params={"offset": 0, "limit": 4}).json()
        second = golden_client.get("/v1/governance/decisions", params={"offset": 4, "limit": 4}).json()
        third = golden_client.get("/v1/governance/decisions", params={"offset": 8, "limit": 4}).json()
        assert [r["id"] for r in first + second + third] == list(range(10))

    def test_assets_view(self, golden_client):
        rows = golden_client.get("/v1/assets").json()
        assert rows == [
            {
                "asset_id": "NLIS-0001",
                "asset_class": "cattle",
                "current_state": "OnFarm",
                "last_digest": rows[0]["last_digest"],
            }
        ]
        history = golden_client.get("/v1/assets/NLIS-0001/history").json()
        assert [e["seq"] for e in history] == [0, 1]
        assert history[1]["provenance"]["confirmations"] == 1

    def test_chain_info_exposes_digests(self, golden_client):
        chains = golden_client.get("/v1/chains").json()
        assert {c["label"] for c in chains} == {"data", "gov"}
        for c in chains:
            assert len(c["state_digest"]) == 64

    def test_fees_report_served(self, golden_client):
        report = golden_client.get("/v1/fees/report").json()
        assert report["chains"]["data"]["min_fee"] == report["chains"]["data"]["max_fee"] == 1


class TestBridgeAndBlobs:
    def test_bridge_transfer_endpoint(self, client):
        world = client.app.state.world
        tom = world.actors["Tom"].address.hex
        wallet = create_wallet(client, [tom])
        client.post(
            f"/v1/wallets/{wallet['address']}/proposals",
            json={"destination": wallet["address"], "action": {"kind": "mint", "token": "STN", "to": tom, "amount": 500}},
            headers=auth(),
        )
        response = client.post(
            "/v1/bridge/transfers",
            json={"direction": "gov_to_data", "token": "STN", "amount": 200},
            headers=auth(),
        )
        assert response.status_code == 201
        assert response.json()["status"] == "completed"
        report = client.get("/v1/bridge/reconcile/STN").json()
        assert report["delta"] == 0
        assert set(report) == {"token", "escrow_locked", "foreign_minted", "foreign_burned", "delta"}

    def test_insufficient_bridge_balance(self, client):
        response = client.post(
            "/v1/bridge/transfers",
            json={"direction": "gov_to_data", "token": "STN", "amount": 200},
            headers=auth(),
        )
        assert response.status_code == 400
        assert response.json()["code"] == "BalanceError"

    def test_blob_round_trip(self, client):
        response = client.post("/v1/blobs", json={"data": "weight=452"}, headers=auth())
        assert response.status_code == 201
        digest = response.json()["digest"]
        fetched = client.get(f"/v1/blobs/{digest}")
        assert fetched.content == b"weight=452"

    def test_unknown_blob_is_404(self, client):
        assert client.get("/v1/blobs/" + "0" * 64).status_code == 404


class TestDifferential:
    def test_api_drive_matches_library_drive(self, client):
        # same command sequence through HTTP and through the library must
        # reach identical world digests
        library = World.from_config(world_config())
        tom = library.actors["Tom"].address.hex
        warwick = library.actors["Warwick"].address.hex

        wallet = create_wallet(client, [tom, warwick], required=2, name="Board")
        addr, _ = library.create_wallet("gov", "Tom", "Board", [tom, warwick], 2)
        assert wallet["address"] == addr

        client.post(
            f"/v1/wallets/{addr}/proposals",
            json={"destination": addr, "action": {"kind": "addOwner", "owner": library.actors["Santiago Del Valle"].address.hex},
                  "description": "grow the board"},
            headers=auth(),
        )
        library.submit_proposal(addr, "Tom", addr,
                                {"kind": "addOwner", "owner": library.actors["Santiago Del Valle"].address.hex},
                                "grow the board")
        client.post(f"/v1/wallets/{addr}/proposals/0/confirmations", headers=auth("warwick-token"))
        library.confirm(addr, "Warwick", 0)

        assert client.app.state.world.digest() == library.digest()
