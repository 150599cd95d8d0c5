"""Declarative scenario runner with an append-only, replayable event journal.

A scenario JSON file declares the two chains, the actors and an ordered step
list (wallet creation, proposals, confirmations, bridge transfers, relays,
block ticks, blob uploads and assertions). Running one journals every step
together with the world digest reached after it; replaying a journal rebuilds
the world from genesis and verifies every intermediate digest, so a single
tampered event is caught at its exact sequence number.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import AssertionFailure, DomainError, ReplayDivergence, ScenarioError
from .world import World

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_SCENARIO = 3
EXIT_REPLAY = 4

MUTATING_OPS = ("create_wallet", "submit", "confirm", "revoke", "bridge", "relay")
ALL_OPS = MUTATING_OPS + ("produce_block", "put_blob", "assert")

_REQUIRED_FIELDS = {
    "create_wallet": {"chain", "by", "owners", "required"},
    "submit": {"wallet", "by", "destination", "action"},
    "confirm": {"wallet", "by", "id"},
    "revoke": {"wallet", "by", "id"},
    "bridge": {"direction", "token", "amount", "holder"},
    "relay": {"wallet", "id"},
    "produce_block": {"chain"},
    "put_blob": {"as"},
    "assert": {"expected"},
}


@dataclass
class Scenario:
    name: str
    config: dict  # everything except the steps; enough to rebuild the world
    steps: list[dict]
    step_lines: list[int | None]


def _step_lines(text: str, count: int) -> list[int | None]:
    """Best-effort line number of each step: the i-th `"op"` key in the file."""
    lines: list[int | None] = []
    offset = 0
    for _ in range(count):
        at = text.find('"op"', offset)
        if at < 0:
            lines.append(None)
            continue
        lines.append(text.count("\n", 0, at) + 1)
        offset = at + 4
    return lines


def load_scenario(text: str, name: str | None = None) -> Scenario:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"invalid JSON: {err.msg}", line=err.lineno)
    if not isinstance(document, dict):
        raise ScenarioError("scenario document must be a JSON object")
    steps = document.get("steps", [])
    if not isinstance(steps, list):
        raise ScenarioError("steps must be a list")
    config = {k: v for k, v in document.items() if k != "steps"}
    scenario = Scenario(
        name=name or document.get("name", "scenario"),
        config=config,
        steps=steps,
        step_lines=_step_lines(text, len(steps)),
    )
    _validate(scenario)
    return scenario


def load_scenario_file(path: Path | str) -> Scenario:
    path = Path(path)
    return load_scenario(path.read_text(encoding="utf-8"), name=path.stem.replace(".scenario", ""))


def _validate(scenario: Scenario) -> None:
    config = scenario.config
    chain_labels = {spec.get("label") for spec in config.get("chains", [])}
    if chain_labels and chain_labels != {"data", "gov"}:
        raise ScenarioError(f"chains must be labelled data and gov, got {sorted(chain_labels)}")
    actors = list(config.get("actors", []))
    if len(set(actors)) != len(actors):
        raise ScenarioError("duplicate actor names")
    known_actors = set(actors)
    wallet_labels: set[str] = set()
    wallet_chain_by_label: dict[str, str] = {}
    blob_labels: set[str] = set()
    auto_tick = bool(config.get("auto_tick", False))
    dirty: set[str] = set()

    def fail(i: int, message: str):
        raise ScenarioError(f"steps[{i}]: {message}", line=scenario.step_lines[i])

    def check_refs(i: int, value):
        if isinstance(value, dict):
            for v in value.values():
                check_refs(i, v)
        elif isinstance(value, list):
            for v in value:
                check_refs(i, v)
        elif isinstance(value, str):
            prefix, _, name = value.partition(":")
            if prefix == "actor" and name not in known_actors:
                fail(i, f"undeclared actor {name!r}")
            if prefix == "wallet" and name not in wallet_labels:
                fail(i, f"wallet label {name!r} not defined by an earlier create_wallet")
            if prefix == "blob" and name not in blob_labels:
                fail(i, f"blob label {name!r} not defined by an earlier put_blob")

    for i, step in enumerate(scenario.steps):
        if not isinstance(step, dict) or "op" not in step:
            fail(i, "step must be an object with an 'op' field")
        op = step["op"]
        if op not in ALL_OPS:
            fail(i, f"unknown op {op!r}")
        missing = _REQUIRED_FIELDS[op] - set(step)
        if missing:
            fail(i, f"{op} step missing fields {sorted(missing)}")
        if op in ("create_wallet", "submit", "confirm", "revoke") and step.get("by") not in known_actors:
            fail(i, f"undeclared actor {step.get('by')!r}")
        if op in ("create_wallet", "produce_block") and step.get("chain") not in ("data", "gov"):
            fail(i, f"unknown chain {step.get('chain')!r}")
        check_refs(i, {k: v for k, v in step.items() if k not in ("op", "as", "by", "description")})
        if op == "create_wallet" and step.get("as"):
            wallet_labels.add(step["as"])
            wallet_chain_by_label[step["as"]] = step["chain"]
        if op == "put_blob":
            blob_labels.add(step["as"])
            if "data" not in step and "data_hex" not in step:
                fail(i, "put_blob needs data or data_hex")
        if op == "assert" and not auto_tick and dirty:
            fail(i, f"assert while chains {sorted(dirty)} have unapplied commands; produce a block first")
        if not auto_tick:
            if op == "create_wallet":
                dirty.add(step["chain"])
            elif op in ("submit", "confirm", "revoke"):
                ref = step.get("wallet", "")
                label = ref.partition(":")[2] if isinstance(ref, str) and ref.startswith("wallet:") else None
                if label in wallet_chain_by_label:
                    dirty.add(wallet_chain_by_label[label])
                else:
                    dirty.update({"data", "gov"})
            elif op in ("bridge", "relay"):
                dirty.update({"data", "gov"})
            elif op == "produce_block":
                dirty.discard(step["chain"])


@dataclass
class EventRecord:
    seq: int
    stream: str
    event: dict
    digest: str

    def to_json(self) -> dict:
        return {"seq": self.seq, "stream": self.stream, "event": self.event, "digest": self.digest}


@dataclass
class RunResult:
    world: World
    records: list[EventRecord]
    final_state_digest: str
    fee_report: dict


class Runner:
    """Applies scenario steps to a world; shared by run() and replay()."""

    def __init__(self, world: World):
        self.world = world
        self.blob_labels: dict[str, str] = {}

    def resolve(self, ref: str) -> str:
        if isinstance(ref, str) and ref.startswith("blob:"):
            label = ref.split(":", 1)[1]
            if label not in self.blob_labels:
                raise ScenarioError(f"blob label {label!r} not defined")
            return self.blob_labels[label]
        return self.world.resolve_ref(ref)

    def _resolve_action(self, action: dict) -> dict:
        out = dict(action)
        for field in ("to", "owner", "new_validator"):
            if isinstance(out.get(field), str):
                out[field] = self.resolve(out[field])
        if isinstance(out.get("measurement_digest"), str) and out["measurement_digest"].startswith("blob:"):
            out["measurement_digest"] = self.resolve(out["measurement_digest"])
        return out

    def apply_step(self, step: dict) -> str:
        """Apply one step; returns the stream it touched."""
        op = step["op"]
        if op == "create_wallet":
            owners = [self.resolve(o) for o in step["owners"]]
            self.world.create_wallet(
                step["chain"],
                step["by"],
                step.get("name", ""),
                owners,
                int(step["required"]),
                label=step.get("as"),
            )
            return step["chain"]
        if op == "submit":
            wallet_hex = self.resolve(step["wallet"])
            self.world.submit_proposal(
                wallet_hex,
                step["by"],
                self.resolve(step["destination"]),
                self._resolve_action(step["action"]),
                step.get("description", ""),
            )
            return self.world.wallet_chain.get(wallet_hex, "?")
        if op == "confirm":
            wallet_hex = self.resolve(step["wallet"])
            self.world.confirm(wallet_hex, step["by"], int(step["id"]))
            return self.world.wallet_chain.get(wallet_hex, "?")
        if op == "revoke":
            wallet_hex = self.resolve(step["wallet"])
            self.world.revoke(wallet_hex, step["by"], int(step["id"]))
            return self.world.wallet_chain.get(wallet_hex, "?")
        if op == "bridge":
            self.world.bridge_transfer(
                step["direction"],
                step["token"],
                int(step["amount"]),
                self.resolve(step["holder"]),
                mode=step.get("mode", "lock_and_mint"),
            )
            return "bridge"
        if op == "relay":
            self.world.relay(self.resolve(step["wallet"]), int(step["id"]))
            return "bridge"
        if op == "produce_block":
            self.world.tick(step["chain"])
            return step["chain"]
        if op == "put_blob":
            data = step["data"].encode("utf-8") if "data" in step else bytes.fromhex(step["data_hex"])
            digest = self.world.blob_store.put(data)
            self.blob_labels[step["as"]] = digest
            return "blobs"
        if op == "assert":
            spec = {k: v for k, v in step.items() if k not in ("op", "expected")}
            actual = self.world.query(spec)
            if actual != step["expected"]:
                raise AssertionFailure(spec, step["expected"], actual)
            return "scenario"
        raise ScenarioError(f"unknown op {op!r}")


def run(
    scenario: Scenario,
    blob_root: Path | str | None = None,
    journal_path: Path | str | None = None,
) -> RunResult:
    """Execute a scenario from genesis, journaling every event."""
    world = World.from_config(scenario.config, blob_root=blob_root)
    runner = Runner(world)
    records = [EventRecord(seq=0, stream="scenario", event={"op": "genesis", "config": scenario.config}, digest=world.digest())]
    sink = _JournalSink(journal_path)
    try:
        sink.write(records[0])
        for index, step in enumerate(scenario.steps):
            try:
                stream = runner.apply_step(step)
            except AssertionFailure:
                raise
            except DomainError as err:
                raise ScenarioError(
                    f"steps[{index}]: {err}", line=scenario.step_lines[index]
                ) from err
            record = EventRecord(seq=len(records), stream=stream, event=step, digest=world.digest())
            records.append(record)
            sink.write(record)
    finally:
        sink.close()
    return RunResult(
        world=world,
        records=records,
        final_state_digest=world.digest(),
        fee_report=world.fee_report(),
    )


class _JournalSink:
    def __init__(self, path: Path | str | None):
        self.handle = open(path, "w", encoding="utf-8") if path is not None else None

    def write(self, record: EventRecord) -> None:
        if self.handle is not None:
            self.handle.write(json.dumps(record.to_json(), sort_keys=True) + "\n")

    def close(self) -> None:
        if self.handle is not None:
            self.handle.flush()
            os.fsync(self.handle.fileno())
            self.handle.close()


def read_journal(path: Path | str) -> list[EventRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as err:
            raise ScenarioError(f"invalid journal line: {err.msg}", line=lineno)
        records.append(EventRecord(seq=row["seq"], stream=row["stream"], event=row["event"], digest=row["digest"]))
    if not records:
        raise ScenarioError("journal is empty")
    return records


def replay(journal: list[EventRecord] | Path | str) -> str:
    """Re-apply a journal from genesis, checking every intermediate digest.

    Returns the final digest; raises ReplayDivergence at the first sequence
    number whose recomputed digest (or re-evaluated assertion) disagrees.
    """
    records = read_journal(journal) if not isinstance(journal, list) else journal
    genesis = records[0]
    if genesis.event.get("op") != "genesis":
        raise ScenarioError("journal does not start with a genesis record")
    world = World.from_config(genesis.event["config"], blob_root=None)
    runner = Runner(world)
    if world.digest() != genesis.digest:
        raise ReplayDivergence(genesis.seq, "genesis digest mismatch")
    for record in records[1:]:
        try:
            runner.apply_step(record.event)
        except AssertionFailure as err:
            raise ReplayDivergence(record.seq, f"journaled assertion no longer holds: {err}")
        except DomainError as err:
            raise ReplayDivergence(record.seq, f"event failed to re-apply: {err}")
        digest = world.digest()
        if digest != record.digest:
            raise ReplayDivergence(record.seq, f"digest mismatch: journal {record.digest}, replay {digest}")
    return world.digest()


def fee_report(result: RunResult) -> dict:
    return result.world.fee_report()


def write_fee_report(result: RunResult, path: Path | str) -> None:
    Path(path).write_text(json.dumps(result.fee_report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
