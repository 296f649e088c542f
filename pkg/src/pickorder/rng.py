"""Seeded random streams.

Every random draw in the package flows through :func:`stream`, which returns a
Philox4x64-10 counter-based generator.  The key is the first 128 bits of the
SHA-256 digest of the canonical ``"part|part|..."`` encoding of the stream
label, so identical labels give identical streams on any platform and
independent labels give statistically independent streams.
"""

import hashlib

import numpy as np


def stream(*parts) -> np.random.Generator:
    """Return a deterministic generator keyed by `parts` (ints / strings)."""
    text = "|".join(_canon(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def _canon(part) -> str:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("boolean stream parts are ambiguous; use int or str")
    if isinstance(part, (int, np.integer)):
        return f"i{int(part)}"
    if isinstance(part, str):
        return f"s{part}"
    raise TypeError(f"unsupported stream part type: {type(part)!r}")
