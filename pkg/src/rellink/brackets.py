"""Escaping and splitting helpers for the bracketed ``[a | b]`` text structures.

Both the encoder-side entity structures and the decoder-side argument-relation
pairs use square brackets with ``|`` field separators and comma-separated
lists.  Payload text may contain any of those characters, so they are
backslash-escaped on render and honored on parse.
"""

from __future__ import annotations

RESERVED = "\\[]|,"


class BracketError(ValueError):
    """Malformed bracketed text; carries the offending chunk."""

    def __init__(self, message: str, chunk: str = ""):
        super().__init__(message)
        self.chunk = chunk


def escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in RESERVED:
            out.append("\\")
        out.append(ch)
    return "".join(out)


def unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] in RESERVED:
            out.append(text[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def split_unescaped(text: str, sep: str) -> list[str]:
    """Split on unescaped occurrences of a single separator character."""
    parts: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            current.append(ch)
            current.append(text[i + 1])
            i += 2
            continue
        if ch == sep:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


def bracket_groups(text: str) -> list[str]:
    """Extract the inner text of each top-level ``[...]`` group.

    Groups may be separated by whitespace, a comma, or both.  Anything else
    between groups, or an unclosed bracket, raises :class:`BracketError`.
    Escaped brackets inside a group do not open or close it.
    """
    groups: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        if text[i] != "[":
            raise BracketError(f"expected '[' at position {i}", text[i:])
        start = i + 1
        j = start
        while j < n:
            if text[j] == "\\" and j + 1 < n:
                j += 2
                continue
            if text[j] == "]":
                break
            j += 1
        if j >= n:
            raise BracketError("unclosed bracket group", text[i:])
        groups.append(text[start:j])
        i = j + 1
        while i < n and text[i].isspace():
            i += 1
        if i < n and text[i] == ",":
            i += 1
    return groups
