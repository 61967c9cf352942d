"""Deterministic random streams used everywhere a seed appears.

The generator is splitmix64 (Steele et al.'s standard constants). It was chosen
over ``random.Random`` / numpy generators because its integer state transition
is trivially portable: any consumer in any language can reproduce centroid
seeding, prompt draws, and stitch masks bit for bit from the seed alone.
``ALGORITHM`` tags serialized artifacts so a reader knows which stream
produced them.
"""

from __future__ import annotations

ALGORITHM = "splitmix64/v1"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


class SplitMix64:
    """A 64-bit splitmix64 stream seeded with an arbitrary integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1) with 53 bits of mantissa."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Plain modulo; the tiny bias is irrelevant here
        and keeps the stream reproducible from the definition alone."""
        if n <= 0:
            raise ValueError("randrange() requires n >= 1")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        self.shuffle(items)
        return items


def fnv1a64(text: str) -> int:
    """FNV-1a hash of the UTF-8 bytes; used to fold string tags into seeds."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, *tags: str | int) -> int:
    """Derive a sub-seed from a root seed and a sequence of tags.

    Each tag is hashed (FNV-1a on its decimal/text form), XOR-folded into the
    running value, and scrambled through one splitmix64 step so related tags
    do not produce related streams.
    """
    h = seed & _MASK64
    for tag in tags:
        h = SplitMix64(h ^ fnv1a64(str(tag))).next_u64()
    return h
