"""Deterministic seed derivation for independently-seeded subtasks."""
import hashlib


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from a tuple of ints/strings; independent of
    PYTHONHASHSEED and process boundaries."""
    blob = repr(parts).encode()
    digest = hashlib.blake2b(blob, digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
