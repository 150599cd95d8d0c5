"""dualgov: deterministic dual-chain simulator for multisig-governed supply-chain data."""

from .errors import DomainError
from .world import World

__version__ = "0.1.0"

__all__ = ["World", "DomainError", "__version__"]
