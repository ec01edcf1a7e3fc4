"""Deterministic seed derivation shared by the simulator, learners, and eval.

Sub-seeds are the first 8 bytes of a sha256 over the unit-separated string
forms of the parts, so identical (seed, labels...) tuples give identical
generators on every platform and run.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    payload = "\x1f".join(str(part) for part in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def rng_from(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
