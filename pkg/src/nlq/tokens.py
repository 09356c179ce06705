"""Deterministic surface tokenization for incoming questions.

Splitting is intentionally dumb: whitespace plus a fixed set of punctuation
and comparison characters that become standalone tokens. No stemming, no
spell correction; downstream tagging owns all interpretation.
"""

from __future__ import annotations

from dataclasses import dataclass

# Characters that always form their own token, even when glued to a word.
# '.' is special-cased below so decimal literals like 10.5 stay whole.
PUNCTUATION = set("?.,!'\"<>=")


@dataclass(frozen=True)
class Token:
    """One surface token: original text, case-folded copy, sentence position."""

    text: str
    lower: str
    index: int


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens; punctuation and comparison symbols are isolated.

    Lossless up to whitespace: concatenating token texts reproduces the input
    with all whitespace removed. Empty input yields an empty list.
    """
    pieces: list[str] = []
    current: list[str] = []
    for pos, ch in enumerate(text):
        if ch.isspace():
            if current:
                pieces.append("".join(current))
                current = []
        elif ch in PUNCTUATION:
            # A dot flanked by digits is part of a decimal literal, not punctuation.
            if (
                ch == "."
                and current
                and current[-1].isdigit()
                and pos + 1 < len(text)
                and text[pos + 1].isdigit()
            ):
                current.append(ch)
                continue
            if current:
                pieces.append("".join(current))
                current = []
            pieces.append(ch)
        else:
            current.append(ch)
    if current:
        pieces.append("".join(current))
    return [Token(text=p, lower=p.casefold(), index=i) for i, p in enumerate(pieces)]
