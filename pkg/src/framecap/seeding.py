"""Deterministic seed derivation for reproducible, schedule-independent runs."""

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a mixed tuple of ints and strings.

    Hash-based so that (seed, trial) streams are independent of each other
    and of execution order.
    """
    token = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derived_rng(*parts) -> np.random.Generator:
    """A fresh generator seeded from derive_seed(*parts)."""
    return np.random.default_rng(derive_seed(*parts))
