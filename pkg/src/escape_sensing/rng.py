"""SplitMix64 streams keyed by (seed, tag).

Every random draw in the package goes through here so that instances and
heuristic runs are reproducible bit for bit on any platform.
"""
import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def fnv1a(text: str) -> int:
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK
    return h


def derive_seed(*parts) -> int:
    """Hash an arbitrary tuple of ints/strings into a 64-bit seed."""
    h = 0x243F6A8885A308D3
    for p in parts:
        if isinstance(p, str):
            v = fnv1a(p)
        else:
            v = int(p) & MASK
        h = mix64(h ^ v)
        h = mix64((h + GOLDEN) & MASK)
    return h


class SplitMix64:
    """Sequential SplitMix64 generator.

    Draws can be taken one at a time (python ints) or in blocks (numpy);
    both views advance the same counter.
    """

    def __init__(self, seed: int, tag: str = ""):
        self.state = mix64((int(seed) & MASK) ^ fnv1a(tag)) if tag else int(seed) & MASK
        self.seed = int(seed) & MASK
        self.tag = tag

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        return mix64(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) / 9007199254740992.0

    def randbelow(self, m: int) -> int:
        # floor(u * m), as used by the selection rules
        if m <= 0:
            raise ValueError("randbelow needs m >= 1")
        return min(int(self.random() * m), m - 1)

    def u64_block(self, count: int) -> np.ndarray:
        if count <= 0:
            return np.zeros(0, dtype=np.uint64)
        with np.errstate(over="ignore"):
            idx = np.arange(1, count + 1, dtype=np.uint64)
            z = np.uint64(self.state) + idx * np.uint64(GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + count * GOLDEN) & MASK
        return z

    def random_block(self, count: int) -> np.ndarray:
        return (self.u64_block(count) >> np.uint64(11)).astype(np.float64) / 9007199254740992.0

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of 0..n-1 (j drawn from floor(u*(i+1)))."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.int64)


def stream(seed: int, tag: str) -> SplitMix64:
    return SplitMix64(seed, tag)
