"""Content-addressed seed derivation.

Every stochastic routine takes a seed derived from the master seed plus
string tags describing what is being fitted, so that adding or removing
unrelated work never shifts anyone else's random stream.
"""

import hashlib


def seed_for(master: int, *tags) -> int:
    """Derive a 64-bit seed from a master seed and a tag path."""
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "big")
