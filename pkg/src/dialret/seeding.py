"""Deterministic seed derivation.

Every stochastic component takes one base seed; sub-seeds are derived by
hashing the base with string labels, so adding a component never shifts the
randomness of another.
"""

from __future__ import annotations

import hashlib


def derive_seed(base: int, *labels: object) -> int:
    """Stable 64-bit sub-seed from a base seed and a label path."""
    material = str(int(base)) + "".join(f"|{label}" for label in labels)
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
