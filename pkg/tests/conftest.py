from pathlib import Path

import pytest

from dualgov.keys import Actor, KeyedHashAuthenticator, named_address
from dualgov.ledger import Chain, ChainConfig, FlatFee, VariableGas
from dualgov.world import World

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
FIG5_SCENARIO = FIXTURES / "fig5.scenario.json"
CATTLE_SCENARIO = FIXTURES / "cattle.scenario.json"
BRIDGE_SCENARIO = FIXTURES / "bridge.scenario.json"


def world_config(
    data_fee: int = 1,
    gov_schedule: list[int] | None = None,
    actors: list[str] | None = None,
    auto_tick: bool = True,
    **extra,
):
    cfg = {
        "auto_tick": auto_tick,
        "chains": [
            {
                "chain_id": 1,
                "label": "data",
                "authorities": ["authority:d1"],
                "fee_model": {"flat": data_fee},
                "block_size_limit": 10,
            },
            {
                "chain_id": 2,
                "label": "gov",
                "authorities": ["authority:g1"],
                "fee_model": {"variable_gas": {"schedule": gov_schedule or [1, 2, 3, 4, 5, 6, 7, 8]}},
                "block_size_limit": 10,
            },
        ],
        "actors": actors or ["Tom", "Santiago Del Valle", "Warwick"],
    }
    cfg.update(extra)
    return cfg


@pytest.fixture
def world():
    return World.from_config(world_config())


@pytest.fixture
def batch_world():
    return World.from_config(world_config(auto_tick=False))


def flat_chain(fee: int = 0, authorities: int = 1, limit: int = 10) -> Chain:
    auth = KeyedHashAuthenticator()
    config = ChainConfig(
        chain_id=1,
        label="data",
        authorities=tuple(named_address("authority", f"a{i}") for i in range(authorities)),
        fee_model=FlatFee(fee),
        block_size_limit=limit,
    )
    return Chain(config, auth)


def gas_chain(schedule: list[int], gas_table: dict | None = None, limit: int = 10) -> Chain:
    auth = KeyedHashAuthenticator()
    kwargs = {"schedule": tuple(schedule)}
    if gas_table is not None:
        kwargs["gas_table"] = gas_table
    config = ChainConfig(
        chain_id=2,
        label="gov",
        authorities=(named_address("authority", "g0"),),
        fee_model=VariableGas(**kwargs),
        block_size_limit=limit,
    )
    return Chain(config, auth)


def actor_tx(chain: Chain, actor: Actor, payload: dict, nonce: int | None = None):
    """Sign a raw transaction for direct ledger tests."""
    from dualgov.ledger import SignedTransaction

    chain.authenticator.register(actor.address, actor.key)
    n = nonce if nonce is not None else chain.next_nonce(actor.address.hex)
    unsigned = SignedTransaction(sender=actor.address.hex, nonce=n, payload=payload, signature="")
    sig = chain.authenticator.sign(actor.key, unsigned.signing_message())
    return SignedTransaction(sender=actor.address.hex, nonce=n, payload=payload, signature=sig)
