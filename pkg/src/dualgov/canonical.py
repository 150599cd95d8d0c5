"""Canonical serialization and digests.

Every state hash in the simulator is SHA-256 over JSON with lexicographically
sorted keys and compact separators, so replay equality is bit-exact across
runs and machines.
"""

from __future__ import annotations

import hashlib
import json

ZERO_DIGEST = "0" * 64


def canonical_json(value) -> bytes:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_of(value) -> str:
    """Hex digest of a JSON-serializable value's canonical form."""
    return sha256_hex(canonical_json(value))
