"""Deterministic RNG derivation.

Every random choice in the pipeline flows from one integer root seed.
Sub-streams are labelled, so a stage (or a single direction within a
stage) reproduces identically in isolation, independent of what ran
before it.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(root: int, label: str) -> int:
    """Fold a root seed and a stream label into a 64-bit sub-seed."""
    digest = hashlib.sha256(f"{root}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(root: int, label: str) -> random.Random:
    """A fresh Mersenne Twister seeded from (root, label)."""
    return random.Random(derive_seed(root, label))
