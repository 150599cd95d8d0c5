"""Command-line entry point.

`run`, `replay` and `serve` operate on an embedded world. The wallet,
proposal, decision, asset, bridge and fee subcommands are a thin client for a
running service (`--url`/`--token`); the read-only ones also work against a
local event journal (`--config` with a `journal` entry), which rebuilds the
world by replay before querying it.

Exit codes: 0 ok, 1 command error, 2 assertion failure, 3 scenario error,
4 replay divergence, 64 usage.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import httpx

from .errors import (
    AssertionFailure,
    ConfigError,
    DomainError,
    ReplayDivergence,
    ScenarioError,
    error_for_code,
)
from .keys import ellipsize
from .scenario import (
    EXIT_ASSERTION,
    EXIT_REPLAY,
    EXIT_SCENARIO,
    load_scenario_file,
    read_journal,
    replay as replay_journal,
    run as run_scenario,
    write_fee_report,
)
from .world import World


@dataclass
class CliContext:
    service_url: str | None = None
    token: str | None = None
    journal: str | None = None
    fmt: str = "table"

    def require_service(self) -> str:
        if not self.service_url:
            raise ConfigError("this command needs a running service; pass --url or set service_url in --config")
        return self.service_url

    def world(self) -> World:
        """Embedded mode: rebuild the world by replaying the configured journal."""
        if not self.journal:
            raise ConfigError("no service url and no journal configured; pass --url or --config")
        records = read_journal(self.journal)
        replay_journal(records)  # verifies digests before we trust the state
        world = World.from_config(records[0].event["config"])
        from .scenario import Runner

        runner = Runner(world)
        for record in records[1:]:
            runner.apply_step(record.event)
        return world


class Client:
    def __init__(self, ctx: CliContext):
        self.base = ctx.require_service().rstrip("/")
        self.headers = {}
        if ctx.token:
            self.headers["Authorization"] = f"Bearer {ctx.token}"

    def request(self, method: str, path: str, **kwargs):
        response = httpx.request(method, self.base + path, headers=self.headers, timeout=30.0, **kwargs)
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                raise DomainError(f"HTTP {response.status_code}: {response.text}")
            raise error_for_code(body.get("code", "DomainError"), body.get("message", "request failed"))
        if response.status_code == 204 or not response.content:
            return None
        return response.json()

    def get(self, path: str, params: dict | None = None):
        return self.request("GET", path, params=params)

    def post(self, path: str, body: dict):
        return self.request("POST", path, json=body)

    def delete(self, path: str):
        return self.request("DELETE", path)


def emit(ctx: CliContext, rows, headers: list[str] | None = None, csv_text: str | None = None):
    if ctx.fmt == "json":
        click.echo(json.dumps(rows, indent=2, sort_keys=True))
        return
    if ctx.fmt == "csv":
        if csv_text is None:
            raise ConfigError("csv output is not available for this command")
        click.echo(csv_text, nl=False)
        return
    if headers is None:
        click.echo(json.dumps(rows, indent=2, sort_keys=True))
        return
    table_rows = [[str(row.get(h, "")) for h in headers] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in table_rows)) if table_rows else len(h) for i, h in enumerate(headers)]
    click.echo("  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip())
    for row in table_rows:
        click.echo("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON file with service_url/token or journal.")
@click.option("--url", default=None, help="Service base URL (overrides --config).")
@click.option("--token", default=None, help="Bearer token for mutating commands.")
@click.option("--format", "fmt", type=click.Choice(["table", "json", "csv"]), default="table")
@click.pass_context
def cli(ctx, config_path, url, token, fmt):
    settings = CliContext(fmt=fmt)
    if config_path:
        raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        settings.service_url = raw.get("service_url")
        settings.token = raw.get("token")
        settings.journal = raw.get("journal")
        if settings.service_url and settings.journal:
            raise ConfigError("config must choose one of service_url or journal, not both")
    if url:
        settings.service_url = url
    if token:
        settings.token = token
    ctx.obj = settings


# ----------------------------------------------------------------------
# scenario lifecycle
# ----------------------------------------------------------------------


@cli.command("run")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out",
              help="Directory for the event journal, blobs and fee report.")
@click.option("--quiet", is_flag=True, help="Print only the final digest.")
@click.pass_obj
def run_cmd(settings: CliContext, scenario, out_dir, quiet):
    """Run a scenario file, journal its events and print the decision log."""
    spec = load_scenario_file(scenario)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    journal_path = out / f"{spec.name}.events.jsonl"
    result = run_scenario(spec, blob_root=out / "blobs", journal_path=journal_path)
    write_fee_report(result, out / f"{spec.name}.fees.json")
    if not quiet:
        rows = [
            {
                "id": r.id,
                "destination": ellipsize(r.destination),
                "action": r.action,
                "submitted_by": r.submitted_by,
                "confirmations": r.confirmations,
                "description": r.description,
            }
            for r in result.world.decision_log.records
        ]
        emit(
            settings,
            rows,
            headers=["id", "destination", "action", "submitted_by", "confirmations", "description"],
            csv_text=result.world.decision_log.to_csv(),
        )
        click.echo(f"events: {journal_path}")
    click.echo(f"final state digest: {result.final_state_digest}")


@cli.command("replay")
@click.argument("journal", type=click.Path(exists=True, dir_okay=False))
def replay_cmd(journal):
    """Re-apply an event journal and verify every intermediate digest."""
    digest = replay_journal(journal)
    click.echo(f"replayed ok, final state digest: {digest}")


@cli.command("serve")
@click.option("--scenario", "scenario_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Scenario file that builds the served world (steps optional).")
@click.option("--tokens", "tokens_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON file mapping bearer tokens to actor names.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8440, type=int)
@click.option("--blob-dir", type=click.Path(file_okay=False), default=None)
def serve_cmd(scenario_path, tokens_path, host, port, blob_dir):
    """Run the scenario, then expose the resulting world over HTTP."""
    import uvicorn

    from .api import create_app
    from .errors import StartupError

    spec = load_scenario_file(scenario_path)
    result = run_scenario(spec, blob_root=blob_dir)
    world = result.world
    world.auto_tick = True  # interactive service always ticks per command
    tokens = json.loads(Path(tokens_path).read_text(encoding="utf-8"))
    app = create_app(world, tokens)
    click.echo(f"serving world from {scenario_path} at http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as err:
        raise StartupError(f"cannot bind {host}:{port}: {err}")


# ----------------------------------------------------------------------
# wallets / proposals
# ----------------------------------------------------------------------


def _wallet_rows_from_world(world: World) -> list[dict]:
    rows = []
    for label, wallet in world.wallets_in_order():
        chain = world.chains[label]
        rows.append(
            {
                "address": wallet.address,
                "display": ellipsize(wallet.address),
                "chain": label,
                "name": chain.name_of(wallet.address),
                "owners": len(wallet.owners),
                "required": wallet.required,
                "pending": sum(1 for p in wallet.proposals if p.status.value == "pending"),
            }
        )
    return rows


@cli.group()
def wallets():
    """Inspect and create multisig wallets."""


@wallets.command("list")
@click.pass_obj
def wallets_list(settings: CliContext):
    if settings.service_url:
        data = Client(settings).get("/v1/wallets")
        rows = [
            {
                "address": w["address"],
                "display": w["display"],
                "chain": w["chain"],
                "name": w["name"],
                "owners": len(w["owners"]),
                "required": w["required"],
                "pending": w["pending_count"],
            }
            for w in data
        ]
    else:
        rows = _wallet_rows_from_world(settings.world())
    emit(settings, rows, headers=["display", "chain", "name", "owners", "required", "pending", "address"])


@wallets.command("create")
@click.option("--chain", required=True, type=click.Choice(["data", "gov"]))
@click.option("--name", default="")
@click.option("--owner", "owners", multiple=True, required=True, help="Owner address (repeatable).")
@click.option("--required", required=True, type=int)
@click.pass_obj
def wallets_create(settings: CliContext, chain, name, owners, required):
    body = {"chain": chain, "name": name, "owners": list(owners), "required": required}
    data = Client(settings).post("/v1/wallets", body)
    emit(settings, [data], headers=["address", "chain", "name", "required"])


def _proposal_row(p: dict) -> dict:
    return {
        "id": p["id"],
        "status": p["status"],
        "action": p["action_kind"],
        "destination": p["destination_display"],
        "submitted_by": p["submitted_by"]["name"] or p["submitted_by"]["display"],
        "confirmations": len(p["confirmations"]),
        "description": p["description"],
    }


@cli.group()
def proposals():
    """Work with wallet proposals."""


@proposals.command("list")
@click.option("--wallet", "wallet_addr", required=True)
@click.option("--status", type=click.Choice(["pending", "executed", "failed", "all"]), default="all")
@click.pass_obj
def proposals_list(settings: CliContext, wallet_addr, status):
    if settings.service_url:
        data = Client(settings).get(f"/v1/wallets/{wallet_addr}/proposals", params={"status": status})
        rows = [_proposal_row(p) for p in data]
    else:
        world = settings.world()
        _, wallet = world.find_wallet(wallet_addr)
        rows = [
            {
                "id": p.id,
                "status": p.status.value,
                "action": p.action_kind,
                "destination": ellipsize(p.destination),
                "submitted_by": world.display_name(p.submitted_by),
                "confirmations": len(p.confirmations),
                "description": p.description,
            }
            for p in wallet.list_proposals(status)
        ]
    emit(settings, rows, headers=["id", "status", "action", "destination", "submitted_by", "confirmations", "description"])


@proposals.command("submit")
@click.option("--wallet", "wallet_addr", required=True)
@click.option("--dest", "destination", required=True, help="Destination address hex.")
@click.option("--action", "action_json", required=True, help='Action JSON, e.g. {"kind":"mint",...}.')
@click.option("--description", default="")
@click.pass_obj
def proposals_submit(settings: CliContext, wallet_addr, destination, action_json, description):
    try:
        action = json.loads(action_json)
    except json.JSONDecodeError as err:
        raise ConfigError(f"--action is not valid JSON: {err.msg}")
    body = {"destination": destination, "action": action, "description": description}
    data = Client(settings).post(f"/v1/wallets/{wallet_addr}/proposals", body)
    emit(settings, [_proposal_row(data)], headers=["id", "status", "action", "confirmations"])


@proposals.command("confirm")
@click.option("--wallet", "wallet_addr", required=True)
@click.option("--id", "proposal_id", required=True, type=int)
@click.pass_obj
def proposals_confirm(settings: CliContext, wallet_addr, proposal_id):
    data = Client(settings).post(f"/v1/wallets/{wallet_addr}/proposals/{proposal_id}/confirmations", {})
    emit(settings, [_proposal_row(data)], headers=["id", "status", "action", "confirmations"])


@proposals.command("revoke")
@click.option("--wallet", "wallet_addr", required=True)
@click.option("--id", "proposal_id", required=True, type=int)
@click.pass_obj
def proposals_revoke(settings: CliContext, wallet_addr, proposal_id):
    data = Client(settings).delete(f"/v1/wallets/{wallet_addr}/proposals/{proposal_id}/confirmations")
    emit(settings, [_proposal_row(data)], headers=["id", "status", "action", "confirmations"])


# ----------------------------------------------------------------------
# decisions / assets
# ----------------------------------------------------------------------


@cli.group()
def decisions():
    """The disclosed governance decision log."""


@decisions.command("list")
@click.option("--action", default=None)
@click.option("--actor", default=None)
@click.option("--destination", default=None)
@click.pass_obj
def decisions_list(settings: CliContext, action, actor, destination):
    if settings.service_url:
        params = {k: v for k, v in {"action": action, "actor": actor, "destination": destination}.items() if v}
        data = Client(settings).get("/v1/governance/decisions", params=params)
        rows = [
            {
                "id": d["id"],
                "destination": d["destination_display"],
                "action": d["action"],
                "submitted_by": d["submitted_by"],
                "confirmations": d["confirmations"],
                "description": d["description"],
            }
            for d in data
        ]
        csv_text = _decisions_csv(data)
    else:
        world = settings.world()
        records = world.decision_log.decision_log(destination=destination, action=action, actor=actor)
        rows = [
            {
                "id": r.id,
                "destination": ellipsize(r.destination),
                "action": r.action,
                "submitted_by": r.submitted_by,
                "confirmations": r.confirmations,
                "description": r.description,
            }
            for r in records
        ]
        csv_text = world.decision_log.to_csv()
    emit(settings, rows, headers=["id", "destination", "action", "submitted_by", "confirmations", "description"],
         csv_text=csv_text)


def _decisions_csv(data: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "destination", "action", "submitted_by", "confirmations", "description"])
    for d in data:
        writer.writerow([d["id"], d["destination"], d["action"], d["submitted_by"], d["confirmations"], d["description"]])
    return buf.getvalue()


@cli.group()
def assets():
    """Registered supply-chain assets."""


@assets.command("list")
@click.option("--asset-class", "asset_class", default=None)
@click.option("--state", default=None)
@click.pass_obj
def assets_list(settings: CliContext, asset_class, state):
    if settings.service_url:
        params = {k: v for k, v in {"asset_class": asset_class, "state": state}.items() if v}
        data = Client(settings).get("/v1/assets", params=params)
        rows = [
            {"asset_id": a["asset_id"], "class": a["asset_class"], "current_state": a["current_state"],
             "last_digest": a["last_digest"]}
            for a in data
        ]
    else:
        rows = settings.world().asset_registry.asset_view(asset_class, state)
    csv_lines = ["asset_id,class,current_state,last_digest"]
    csv_lines += [f"{r['asset_id']},{r['class']},{r['current_state']},{r['last_digest']}" for r in rows]
    emit(settings, rows, headers=["asset_id", "class", "current_state", "last_digest"],
         csv_text="\n".join(csv_lines) + "\n")


@assets.command("history")
@click.argument("asset_id")
@click.pass_obj
def assets_history(settings: CliContext, asset_id):
    if settings.service_url:
        data = Client(settings).get(f"/v1/assets/{asset_id}/history")
        rows = [
            {
                "seq": e["seq"],
                "kind": e["kind"],
                "from_state": e["from_state"] or "",
                "to_state": e["to_state"],
                "measurement_digest": e["measurement_digest"] or "",
                "wallet": ellipsize(e["provenance"]["wallet"]),
                "proposal": e["provenance"]["proposal_id"],
                "confirmations": e["provenance"]["confirmations"],
                "height": e["provenance"]["height"],
            }
            for e in data
        ]
    else:
        world = settings.world()
        rows = [
            {
                "seq": e.seq,
                "kind": e.kind,
                "from_state": e.from_state or "",
                "to_state": e.to_state,
                "measurement_digest": e.measurement_digest or "",
                "wallet": ellipsize(e.provenance.wallet),
                "proposal": e.provenance.proposal_id,
                "confirmations": e.provenance.confirmations,
                "height": e.provenance.height,
            }
            for e in world.asset_registry.asset_history(asset_id)
        ]
    emit(settings, rows, headers=["seq", "kind", "from_state", "to_state", "measurement_digest",
                                  "wallet", "proposal", "confirmations", "height"])


# ----------------------------------------------------------------------
# bridge / fees
# ----------------------------------------------------------------------


@cli.group()
def bridge():
    """Cross-chain transfers and conservation audit."""


@bridge.command("transfer")
@click.option("--direction", required=True, type=click.Choice(["data_to_gov", "gov_to_data"]))
@click.option("--token", required=True)
@click.option("--amount", required=True, type=int)
@click.option("--mode", type=click.Choice(["lock_and_mint", "burn_and_release"]), default="lock_and_mint")
@click.pass_obj
def bridge_transfer(settings: CliContext, direction, token, amount, mode):
    body = {"direction": direction, "token": token, "amount": amount, "mode": mode}
    data = Client(settings).post("/v1/bridge/transfers", body)
    emit(settings, [data], headers=["transfer_id", "direction", "mode", "token", "amount", "status"])


@bridge.command("reconcile")
@click.argument("token")
@click.pass_obj
def bridge_reconcile(settings: CliContext, token):
    if settings.service_url:
        data = Client(settings).get(f"/v1/bridge/reconcile/{token}")
    else:
        data = settings.world().bridge.reconcile(token).to_json()
    emit(settings, [data], headers=["token", "escrow_locked", "foreign_minted", "foreign_burned", "delta"])


@cli.group()
def fees():
    """Transaction fee accounting."""


@fees.command("report")
@click.pass_obj
def fees_report(settings: CliContext):
    if settings.service_url:
        data = Client(settings).get("/v1/fees/report")
    else:
        data = settings.world().fee_report()
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="dualgov")
        return 0
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.UsageError as err:
        click.echo(f"error: {err.format_message()}", err=True)
        context = err.ctx
        if context is not None:
            click.echo(context.get_usage(), err=True)
        return 64
    except click.ClickException as err:
        err.show()
        return 1
    except AssertionFailure as err:
        click.echo(f"assertion failed: {err}", err=True)
        return EXIT_ASSERTION
    except ScenarioError as err:
        click.echo(f"scenario error: {err}", err=True)
        return EXIT_SCENARIO
    except ReplayDivergence as err:
        click.echo(f"replay divergence: {err}", err=True)
        return EXIT_REPLAY
    except DomainError as err:
        click.echo(f"error [{err.code}]: {err}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
