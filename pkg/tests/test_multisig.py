import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualgov.errors import (
    AlreadyConfirmedError,
    AlreadyExecutedError,
    ConfigError,
    NotConfirmedError,
    NotFoundError,
    NotOwnerError,
    OwnerError,
    ThresholdError,
)
from dualgov.multisig import Proposal, ProposalStatus, Wallet, WalletRegistry, normalize_action


class FakeHost:
    """Records side effects; raises what a chain host would raise."""

    def __init__(self):
        self.names: dict[str, str] = {}
        self.balances: dict[tuple[str, str], int] = {}
        self.height = 1

    def execution_height(self):
        return self.height

    def set_name(self, address, name):
        self.names[address] = name

    def mint_tokens(self, token, to, amount):
        self.balances[(token, to)] = self.balances.get((token, to), 0) + amount

    def move_tokens(self, frm, token, to, amount):
        held = self.balances.get((token, frm), 0)
        if held < amount:
            raise ConfigError(f"insufficient {token}")
        self.balances[(token, frm)] = held - amount
        self.balances[(token, to)] = self.balances.get((token, to), 0) + amount

    def register_asset(self, asset_id, asset_class, metadata, provenance):
        pass

    def update_asset_state(self, asset_id, to_state, digest, provenance):
        pass

    def apply_policy_update(self, action, provenance):
        pass


OWNERS = [f"0x{i:040x}" for i in range(1, 10)]
TOM, SANTIAGO, WARWICK, CHARLES = OWNERS[:4]


def wallet_of(owners, required):
    return Wallet("0x" + "ab" * 20, "", list(owners), required)


class TestCreateWallet:
    def test_one_of_two(self):
        w = wallet_of([TOM, SANTIAGO], 1)
        assert w.required == 1
        assert w.next_proposal_id == 0

    def test_required_above_owner_count(self):
        with pytest.raises(ThresholdError):
            wallet_of([TOM], 2)

    def test_required_zero(self):
        with pytest.raises(ThresholdError):
            wallet_of([TOM], 0)

    def test_duplicate_owner(self):
        with pytest.raises(OwnerError):
            wallet_of([TOM, TOM], 1)

    def test_empty_owner_set(self):
        with pytest.raises(OwnerError):
            wallet_of([], 1)

    def test_registry_rejects_reused_address(self):
        registry = WalletRegistry()
        registry.create("0x" + "01" * 20, "", [TOM], 1)
        with pytest.raises(ConfigError):
            registry.create("0x" + "01" * 20, "", [TOM], 1)


class TestSubmit:
    def test_submit_auto_confirms_and_executes_on_one_of_n(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(TOM, "0x" + "cd" * 20, {"kind": "setMultisigName", "name": "X"}, "The account needs a name.", host)
        assert p.id == 0
        assert p.status is ProposalStatus.EXECUTED
        assert p.confirmations_at_execution == 1
        assert host.names["0x" + "cd" * 20] == "X"

    def test_mint_executes_with_one_confirmation(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(
            SANTIAGO, "0x" + "ee" * 20, {"kind": "mint", "token": "STN", "to": w.address, "amount": 1000},
            "Devs testing minting 1000 STN", host,
        )
        assert p.id == 0
        assert p.status is ProposalStatus.EXECUTED
        assert host.balances[("STN", w.address)] == 1000

    def test_non_owner_cannot_submit(self):
        w, host = wallet_of([TOM], 1), FakeHost()
        with pytest.raises(NotOwnerError):
            w.submit_proposal(OWNERS[8], w.address, {"kind": "setMultisigName", "name": "X"}, "", host)

    def test_ids_are_dense(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        ids = [
            w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host).id
            for _ in range(4)
        ]
        assert ids == [0, 1, 2, 3]


class TestConfirm:
    def test_second_confirmation_executes_add_owner(self):
        w, host = wallet_of([TOM, SANTIAGO, WARWICK], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "addOwner", "owner": CHARLES}, "Adding Charles Morris", host)
        assert p.status is ProposalStatus.PENDING
        p = w.confirm(WARWICK, p.id, host)
        assert p.status is ProposalStatus.EXECUTED
        assert p.confirmations_at_execution == 2
        assert CHARLES in w.owners

    def test_double_confirm(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        with pytest.raises(AlreadyConfirmedError):
            w.confirm(TOM, p.id, host)

    def test_unknown_proposal(self):
        w, host = wallet_of([TOM], 1), FakeHost()
        with pytest.raises(NotFoundError):
            w.confirm(TOM, 99, host)

    def test_confirm_after_execution(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "setMultisigName", "name": "n"}, "", host)
        with pytest.raises(AlreadyExecutedError):
            w.confirm(SANTIAGO, p.id, host)

    def test_non_owner_cannot_confirm(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        with pytest.raises(NotOwnerError):
            w.confirm(OWNERS[8], p.id, host)


class TestRevoke:
    def test_confirm_revoke_is_an_inverse_pair(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        assert p.confirmations == [TOM]
        w.revoke(TOM, p.id)
        assert p.confirmations == []
        w.confirm(TOM, p.id, host)
        assert p.confirmations == [TOM]  # back to the submitter only

    def test_revoke_after_execution(self):
        w, host = wallet_of([TOM], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "setMultisigName", "name": "n"}, "", host)
        with pytest.raises(AlreadyExecutedError):
            w.revoke(TOM, p.id)

    def test_revoke_without_confirmation(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        with pytest.raises(NotConfirmedError):
            w.revoke(SANTIAGO, p.id)

    def test_revoke_reconfirm_then_execute(self):
        # replay oracle over the three-step sequence: the end state must match
        # a fresh submit+confirm pair
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        w.revoke(TOM, p.id)
        w.confirm(TOM, p.id, host)
        p = w.confirm(SANTIAGO, p.id, host)
        assert p.status is ProposalStatus.EXECUTED
        assert p.confirmations_at_execution == 2

        w2, host2 = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        q = w2.submit_proposal(TOM, w2.address, {"kind": "changeRequirement", "required": 1}, "", host2)
        q = w2.confirm(SANTIAGO, q.id, host2)
        assert (q.status, q.confirmations_at_execution, w2.required) == (p.status, p.confirmations_at_execution, w.required)


class TestExecution:
    def test_change_requirement_takes_effect(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 2}, "Changing to 2 signers", host)
        assert w.required == 2
        p = w.submit_proposal(TOM, w.address, {"kind": "setMultisigName", "name": "later"}, "", host)
        assert p.status is ProposalStatus.PENDING  # now needs 2

    def test_remove_owner_clamps_requirement(self):
        # brute-force oracle over all configurations with <= 4 owners
        for n in range(2, 5):
            for required in range(1, n + 1):
                w, host = wallet_of(OWNERS[:n], required), FakeHost()
                w.submit_proposal(TOM, w.address, {"kind": "removeOwner", "owner": OWNERS[n - 1]}, "", host)
                for owner in OWNERS[1:required]:
                    if w.proposals[0].status is ProposalStatus.PENDING and owner in w.owners:
                        w.confirm(owner, 0, host)
                if w.proposals[0].status is ProposalStatus.EXECUTED:
                    expected_required = min(required, n - 1)
                    assert len(w.owners) == n - 1
                    assert w.required == expected_required
                assert 1 <= w.required <= len(w.owners)

    def test_remove_last_owner_fails(self):
        w, host = wallet_of([TOM], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "removeOwner", "owner": TOM}, "", host)
        assert p.status is ProposalStatus.FAILED
        assert w.owners == [TOM]

    def test_add_existing_owner_fails_without_changes(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "addOwner", "owner": SANTIAGO}, "", host)
        assert p.status is ProposalStatus.FAILED
        assert "already an owner" in p.failure_reason
        assert w.owners == [TOM, SANTIAGO]

    def test_failed_delegate_leaves_wallet_untouched(self):
        w, host = wallet_of([TOM], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "withdraw", "token": "STN", "to": SANTIAGO, "amount": 10}, "", host)
        assert p.status is ProposalStatus.FAILED
        assert host.balances == {}

    def test_admin_action_must_target_host_wallet(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(TOM, "0x" + "99" * 20, {"kind": "addOwner", "owner": WARWICK}, "", host)
        assert p.status is ProposalStatus.FAILED

    def test_change_requirement_out_of_bounds_fails(self):
        w, host = wallet_of([TOM, SANTIAGO], 1), FakeHost()
        p = w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 5}, "", host)
        assert p.status is ProposalStatus.FAILED
        assert w.required == 1


class TestListProposals:
    def test_fresh_wallet_empty(self):
        w = wallet_of([TOM], 1)
        assert w.list_proposals("pending") == []

    def test_partition(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        for _ in range(3):
            w.submit_proposal(TOM, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        w.confirm(SANTIAGO, 0, host)
        assert [p.id for p in w.list_proposals("pending")] == [1, 2]
        assert [p.id for p in w.list_proposals("executed")] == [0]
        assert [p.id for p in w.list_proposals()] == [0, 1, 2]

    def test_ascending_id_order(self):
        w, host = wallet_of([TOM, SANTIAGO], 2), FakeHost()
        for _ in range(5):
            w.submit_proposal(SANTIAGO, w.address, {"kind": "changeRequirement", "required": 1}, "", host)
        assert [p.id for p in w.list_proposals()] == [0, 1, 2, 3, 4]


class TestActionValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            normalize_action({"kind": "teleport"})

    def test_zero_amount(self):
        with pytest.raises(ConfigError):
            normalize_action({"kind": "mint", "token": "STN", "to": TOM, "amount": 0})

    def test_requirement_below_one(self):
        with pytest.raises(ConfigError):
            normalize_action({"kind": "changeRequirement", "required": 0})

    def test_policy_update_must_change_something(self):
        with pytest.raises(ConfigError):
            normalize_action({"kind": "updatePolicy", "asset_class": "cattle", "action_kind": "updateAssetState"})

    def test_unexpected_field(self):
        with pytest.raises(ConfigError):
            normalize_action({"kind": "mint", "token": "STN", "to": TOM, "amount": 1, "memo": "hi"})


class TestOrderIndependence:
    def test_small_exhaustive_permutations(self):
        # one representative instance; the acceptance suite sweeps the space
        owners = OWNERS[:3]
        confirmer_sets = [{0, 1}, {1, 2}, {0, 1, 2}]
        results = set()
        base_events = []
        for pid, members in enumerate(confirmer_sets):
            base_events.extend((pid, m) for m in sorted(members)[1:])
        for perm in itertools.permutations(base_events):
            w, host = wallet_of(owners, 2), FakeHost()
            for members in confirmer_sets:
                w.submit_proposal(owners[sorted(members)[0]], w.address, {"kind": "setMultisigName", "name": "x"}, "", host)
            for pid, member in perm:
                if w.proposals[pid].status is ProposalStatus.PENDING:
                    w.confirm(owners[member], pid, host)
            executed = frozenset(p.id for p in w.proposals if p.status is ProposalStatus.EXECUTED)
            results.add((executed, w.required, tuple(w.owners)))
        assert len(results) == 1


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_random_sequences_hold_invariants(data):
    n = data.draw(st.integers(1, 5), label="owners")
    owners = OWNERS[:n]
    required = data.draw(st.integers(1, n), label="required")
    w, host = wallet_of(owners, required), FakeHost()
    executed_snapshots: dict[int, dict] = {}
    for _ in range(data.draw(st.integers(1, 25), label="ops")):
        op = data.draw(st.sampled_from(["submit", "confirm", "revoke"]), label="op")
        try:
            if op == "submit":
                actor = data.draw(st.sampled_from(owners))
                kind = data.draw(st.sampled_from(["setMultisigName", "addOwner", "removeOwner", "changeRequirement"]))
                if kind == "setMultisigName":
                    action = {"kind": kind, "name": "n"}
                elif kind == "changeRequirement":
                    action = {"kind": kind, "required": data.draw(st.integers(1, 6))}
                else:
                    action = {"kind": kind, "owner": data.draw(st.sampled_from(OWNERS))}
                w.submit_proposal(actor, w.address, action, "", host)
            elif op == "confirm" and w.proposals:
                w.confirm(data.draw(st.sampled_from(OWNERS[:6])), data.draw(st.integers(0, len(w.proposals) - 1)), host)
            elif op == "revoke" and w.proposals:
                w.revoke(data.draw(st.sampled_from(OWNERS[:6])), data.draw(st.integers(0, len(w.proposals) - 1)))
        except (NotOwnerError, AlreadyConfirmedError, AlreadyExecutedError, NotConfirmedError, NotFoundError):
            pass
        # invariants after every operation
        assert 1 <= w.required <= len(w.owners)
        assert [p.id for p in w.proposals] == list(range(len(w.proposals)))
        for p in w.proposals:
            assert len(set(p.confirmations)) == len(p.confirmations)
            if p.status is ProposalStatus.EXECUTED:
                snapshot = p.to_json()
                if p.id in executed_snapshots:
                    assert executed_snapshots[p.id] == snapshot
                else:
                    executed_snapshots[p.id] = snapshot
