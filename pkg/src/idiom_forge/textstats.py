"""Token-level text statistics used by the offline stub backends and ROUGE."""

from __future__ import annotations

from collections import Counter

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def tokenize(text: str) -> list[str]:
    return text.lower().split()


def token_f1(a: str, b: str) -> float:
    """2 * |multiset intersection| / (|A| + |B|) over lowercased whitespace tokens."""
    ta, tb = Counter(tokenize(a)), Counter(tokenize(b))
    total = sum(ta.values()) + sum(tb.values())
    if total == 0:
        return 0.0
    common = sum((ta & tb).values())
    return 2.0 * common / total


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b)) with one row of memory."""
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]
