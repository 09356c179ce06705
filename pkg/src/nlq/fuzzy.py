"""Levenshtein edit distance and the normalized similarity used for fuzzy tagging."""

from __future__ import annotations

# Matches below this normalized similarity are not considered matches at all.
SIMILARITY_THRESHOLD = 0.8


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs for insert, delete, substitute."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        row = [i]
        for j, cb in enumerate(b, start=1):
            row.append(min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = row
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """Normalized similarity: 1 - distance/max(len); 1.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
