"""Deterministic seed derivation.

Every random draw in the pipeline flows from one top-level seed. Stage- and
group-level generators get sub-seeds derived by hashing the seed together
with string labels, so rerunning a single stage reproduces exactly what a
full-pipeline run would have drawn.
"""

from __future__ import annotations

import hashlib


def derive_seed(seed: int, *labels: str) -> int:
    """Derive a 63-bit sub-seed from ``seed`` and a label path.

    Uses SHA-256 rather than ``hash()`` so the derivation is stable across
    processes and Python invocations.
    """
    material = ":".join([str(seed), *labels]).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "big") >> 1
