"""Shared token constants and helpers.

A token sequence is a plain ``list[str]``.  The text form is the
space-joined sequence, so individual tokens are assumed to contain no
whitespace (quoted PENMAN constants with internal spaces survive in
memory but not a text round trip).
"""

import re

MASK = "[mask]"

TEXT_START = "<s>"
TEXT_END = "</s>"
GRAPH_START = "<g>"
GRAPH_END = "</g>"
MARKERS = (TEXT_START, TEXT_END, GRAPH_START, GRAPH_END)

OPEN = "("
CLOSE = ")"

_POINTER_RE = re.compile(r"<Z(\d+)>")


def pointer(index: int) -> str:
    return f"<Z{index}>"


def pointer_index(token: str) -> int | None:
    match = _POINTER_RE.fullmatch(token)
    return int(match.group(1)) if match else None


def is_pointer(token: str) -> bool:
    return pointer_index(token) is not None


def is_relation(token: str) -> bool:
    return len(token) > 1 and token.startswith(":")


def is_structural(token: str) -> bool:
    """True for tokens that carry sequence structure rather than content."""
    return token in (OPEN, CLOSE) or is_relation(token) or is_pointer(token)


def to_text(tokens) -> str:
    return " ".join(tokens)


def from_text(text: str) -> list[str]:
    return text.split()
