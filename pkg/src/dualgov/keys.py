"""Addresses, actors and the default keyed-hash authenticator.

Key material is deterministic (derived from stable seeds) because the whole
simulator must replay bit-identically; the authenticator is pluggable for
anyone who wants real asymmetric signatures instead.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

from .errors import AuthError

ADDRESS_BYTES = 20


@dataclass(frozen=True)
class Address:
    """20-byte account identifier."""

    raw: bytes

    def __post_init__(self):
        if len(self.raw) != ADDRESS_BYTES:
            raise ValueError(f"address must be {ADDRESS_BYTES} bytes, got {len(self.raw)}")

    @property
    def hex(self) -> str:
        return "0x" + self.raw.hex()

    @property
    def display(self) -> str:
        """Middle-ellipsis form, e.g. 0x1a2b3...8c9d0."""
        return ellipsize(self.hex)

    @classmethod
    def from_hex(cls, text: str) -> "Address":
        body = text[2:] if text.startswith("0x") else text
        return cls(bytes.fromhex(body))

    def __str__(self) -> str:
        return self.hex


def ellipsize(hex_addr: str) -> str:
    body = hex_addr[2:] if hex_addr.startswith("0x") else hex_addr
    return f"0x{body[:5]}...{body[-5:]}"


def _derive(namespace: str, material: bytes) -> bytes:
    return hashlib.sha256(namespace.encode("utf-8") + b"/" + material).digest()


def derive_key(name: str) -> bytes:
    """Deterministic signing key for a named actor."""
    return _derive("dualgov/key", name.encode("utf-8"))


def address_for_key(key: bytes) -> Address:
    return Address(_derive("dualgov/address", key)[:ADDRESS_BYTES])


def named_address(namespace: str, name: str) -> Address:
    """Address of a contract-like entity (token, escrow, plain account)."""
    return Address(_derive(f"dualgov/{namespace}", name.encode("utf-8"))[:ADDRESS_BYTES])


def token_address(token: str) -> Address:
    return named_address("token", token)


def account_address(label: str) -> Address:
    return named_address("account", label)


def escrow_address() -> Address:
    return named_address("escrow", "bridge")


def wallet_address(chain_id: int, index: int) -> Address:
    """Fresh deterministic address for the index-th wallet deployed on a chain."""
    return named_address("wallet", f"{chain_id}/{index}")


@dataclass(frozen=True)
class Actor:
    name: str
    key: bytes
    address: Address

    @classmethod
    def named(cls, name: str) -> "Actor":
        key = derive_key(name)
        return cls(name=name, key=key, address=address_for_key(key))


class KeyedHashAuthenticator:
    """Default signature scheme: HMAC-SHA256 over the canonical message.

    Verification requires the signer's key to be registered, which stands in
    for public-key recovery.
    """

    def __init__(self):
        self._keys: dict[str, bytes] = {}

    def register(self, address: Address, key: bytes) -> None:
        self._keys[address.hex] = key

    def knows(self, address_hex: str) -> bool:
        return address_hex in self._keys

    def sign(self, key: bytes, message: bytes) -> str:
        return hmac.new(key, message, hashlib.sha256).hexdigest()

    def verify(self, address_hex: str, message: bytes, signature: str) -> None:
        key = self._keys.get(address_hex)
        if key is None:
            raise AuthError(f"no key registered for {address_hex}")
        expected = hmac.new(key, message, hashlib.sha256).hexdigest()
        if not hmac.compare_digest(expected, signature):
            raise AuthError(f"bad signature from {address_hex}")
