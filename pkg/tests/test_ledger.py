import pytest

from dualgov.errors import AuthError, ConfigError, NonceError
from dualgov.keys import Actor, named_address
from dualgov.ledger import ChainConfig, FlatFee, VariableGas
from dualgov.world import World

from conftest import actor_tx, flat_chain, gas_chain, world_config

TOM = Actor.named("Tom")


class TestChainConfig:
    def test_genesis_block(self):
        chain = flat_chain(fee=0)
        assert chain.height == 0
        assert chain.blocks[0].transactions == ()

    def test_gas_price_indexed_by_height(self):
        chain = gas_chain([1, 2, 3, 4, 5])
        assert chain.config.fee_model.price_at(2) == 3

    def test_empty_authorities_rejected(self):
        with pytest.raises(ConfigError):
            ChainConfig(1, "data", (), FlatFee(0)).validate()

    def test_negative_flat_fee_rejected(self):
        with pytest.raises(ConfigError):
            ChainConfig(1, "data", (named_address("authority", "a"),), FlatFee(-1)).validate()

    def test_zero_gas_price_rejected(self):
        with pytest.raises(ConfigError):
            VariableGas(schedule=(1, 0, 2)).validate()

    def test_gas_table_must_cover_every_kind(self):
        with pytest.raises(ConfigError, match="missing action kinds"):
            VariableGas(schedule=(1,), gas_table={"confirm": 50}).validate()

    def test_duplicate_chain_id_rejected(self):
        cfg = world_config()
        cfg["chains"][1]["chain_id"] = 1
        with pytest.raises(ConfigError, match="duplicate chain_id"):
            World.from_config(cfg)

    def test_world_needs_both_labels(self):
        cfg = world_config()
        cfg["chains"][1]["label"] = "data"
        with pytest.raises(ConfigError):
            World.from_config(cfg)


class TestSubmission:
    def test_valid_tx_queued(self):
        chain = flat_chain()
        digest = chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"}))
        assert len(chain.mempool) == 1
        assert digest == chain.mempool[0].digest

    def test_nonce_reuse_rejected(self):
        chain = flat_chain()
        tx = actor_tx(chain, TOM, {"kind": "noop"})
        chain.submit_signed(tx)
        with pytest.raises(NonceError):
            chain.submit_signed(tx)

    def test_nonce_gap_rejected(self):
        chain = flat_chain()
        with pytest.raises(NonceError):
            chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"}, nonce=5))

    def test_tampered_payload_rejected(self):
        chain = flat_chain()
        tx = actor_tx(chain, TOM, {"kind": "noop", "value": 1})
        tampered = type(tx)(sender=tx.sender, nonce=tx.nonce, payload={"kind": "noop", "value": 2}, signature=tx.signature)
        with pytest.raises(AuthError):
            chain.submit_signed(tampered)

    def test_unknown_sender_rejected(self):
        chain = flat_chain()
        eve = Actor.named("Eve")
        tx = actor_tx(chain, TOM, {"kind": "noop"})
        forged = type(tx)(sender=eve.address.hex, nonce=1, payload=tx.payload, signature=tx.signature)
        with pytest.raises(AuthError):
            chain.submit_signed(forged)

    def test_unknown_action_kind_on_gas_chain(self):
        chain = gas_chain([1])
        with pytest.raises(ConfigError):
            chain.submit_signed(actor_tx(chain, TOM, {"kind": "teleport"}))


class TestBlockProduction:
    def test_fifo_inclusion(self):
        chain = flat_chain(limit=10)
        for _ in range(3):
            chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"}))
        block = chain.produce_block()
        assert block.height == 1
        assert len(block.transactions) == 3

    def test_empty_block_keeps_state_digest(self):
        chain = flat_chain()
        parent_state = chain.head.state_digest
        block = chain.produce_block()
        assert block.height == 1
        assert block.state_digest == parent_state
        assert block.parent_digest == chain.blocks[0].block_hash

    def test_block_size_limit_splits_fifo(self):
        chain = flat_chain(limit=10)
        digests = [chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"})) for _ in range(12)]
        first = chain.produce_block()
        second = chain.produce_block()
        assert [len(first.transactions), len(second.transactions)] == [10, 2]
        # FIFO oracle: inclusion order equals submission order
        included = [tx.digest for tx in first.transactions + second.transactions]
        assert included == digests

    def test_producer_rotates_round_robin(self):
        chain = flat_chain(authorities=3)
        for _ in range(7):
            chain.produce_block()
        for block in chain.blocks:
            expected = chain.config.authorities[block.height % 3].hex
            assert block.producer == expected

    def test_rejected_tx_never_mutates_state(self):
        chain = flat_chain()
        before = chain.state_digest()
        chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop", "fail": "boom"}))
        chain.produce_block()
        receipt = chain.all_receipts()[0]
        assert receipt.status == "rejected"
        assert chain.state_digest() != before  # nonce advanced by inclusion
        # the module state outside nonces is untouched
        state = chain.state()
        assert state["balances"] == {} and state["names"] == {}

    def test_replay_is_bit_identical(self):
        def build():
            chain = flat_chain(fee=2)
            for i in range(5):
                chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop", "i": i}))
                chain.produce_block()
            return [b.state_digest for b in chain.blocks], [b.block_hash for b in chain.blocks]

        assert build() == build()


class TestFees:
    def test_flat_fee_ignores_action_and_height(self):
        chain = flat_chain(fee=7)
        assert chain.fee_for("mint", 1) == 7
        assert chain.fee_for("confirm", 100) == 7

    def test_flat_zero_fee(self):
        chain = flat_chain(fee=0)
        assert chain.fee_for("anything", 3) == 0

    def test_variable_gas_product(self):
        table = {k: 1 for k in _all_kinds()}
        table["confirm"] = 50
        chain = gas_chain([1, 1, 1, 1, 3], gas_table=table)
        assert chain.fee_for("confirm", 4) == 150

    def test_schedule_clamps_past_end(self):
        chain = gas_chain([1, 2, 3])
        price = chain.config.fee_model.price_at(99)
        assert price == 3

    def test_flat_receipts_all_equal(self):
        chain = flat_chain(fee=4)
        for i in range(6):
            chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"}))
        chain.produce_block()
        fees = {r.fee_paid for r in chain.all_receipts()}
        assert fees == {4}

    def test_variable_receipt_matches_schedule(self):
        chain = gas_chain([1, 2, 3, 4], gas_table={k: 10 for k in _all_kinds()})
        chain.submit_signed(actor_tx(chain, TOM, {"kind": "noop"}))
        chain.produce_block()  # height 1, price 2
        receipt = chain.all_receipts()[0]
        assert receipt.gas_used == 10
        assert receipt.fee_paid == 20


class TestBalances:
    def test_mint_1000(self):
        chain = flat_chain()
        wallet = named_address("wallet", "w").hex
        chain.mint("STN", wallet, 1000)
        assert chain.balance_of("STN", wallet) == 1000

    def test_unknown_holder_is_zero(self):
        chain = flat_chain()
        chain.mint("STN", named_address("wallet", "w").hex, 5)
        assert chain.balance_of("STN", named_address("wallet", "other").hex) == 0

    def test_unknown_token_is_config_error(self):
        chain = flat_chain()
        with pytest.raises(ConfigError):
            chain.balance_of("GHOST", named_address("wallet", "w").hex)

    def test_mint_then_withdraw_arithmetic(self):
        # independent ledger arithmetic oracle: fold the operation list
        ops = [("mint", 1000), ("move", 400)]
        expected = 0
        for op, amount in ops:
            expected += amount if op == "mint" else -amount
        chain = flat_chain()
        wallet = named_address("wallet", "w").hex
        other = named_address("account", "fund").hex
        chain.mint("STN", wallet, 1000)
        chain.move("STN", wallet, other, 400)
        assert chain.balance_of("STN", wallet) == expected == 600

    def test_conservation_checked_after_block(self):
        chain = flat_chain()
        wallet = named_address("wallet", "w").hex
        chain.mint("STN", wallet, 100)
        chain.burn("STN", wallet, 30)
        chain.produce_block()
        total = sum(chain.balances["STN"].values())
        assert total == chain.minted["STN"] - chain.burned["STN"] == 70


def _all_kinds():
    from dualgov.ledger import ACTION_KINDS

    return ACTION_KINDS
