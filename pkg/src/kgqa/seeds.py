"""Stable seed derivation for schedule-independent randomness.

Generation steps that need per-record randomness (distractor sampling, option
shuffling, mask placement) derive one child seed per record from the run seed
and the record's stable identity. Records can then be processed in any order,
or in parallel, and still come out bit-identical. ``hashlib`` is used instead
of ``hash()`` because the latter is salted per process.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *parts: int | str) -> int:
    """Derive a 64-bit child seed from a run seed and identifying parts."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed).encode("utf-8"))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def derived_rng(seed: int, *parts: int | str) -> random.Random:
    """A ``random.Random`` seeded with :func:`derive_seed` of the arguments."""
    return random.Random(derive_seed(seed, *parts))
