"""Find documented methods inside .java files.

Methods are located lexically: a /** javadoc */ block followed by a
method header and a brace-balanced body. The javadoc's first sentence
becomes the summary; the method text (javadoc excluded) is handed to
the parser.
"""

from __future__ import annotations

import re

_JAVADOC_RE = re.compile(r"/\*\*(?P<body>.*?)\*/", re.DOTALL)


def javadoc_summary(body: str) -> str:
    """First sentence of a javadoc body, tags and markup stripped."""
    lines = []
    for line in body.splitlines():
        line = line.strip().lstrip("*").strip()
        if line.startswith("@"):
            break
        lines.append(line)
    text = " ".join(l for l in lines if l).strip()
    text = re.sub(r"<[^>]+>", " ", text)  # drop inline HTML tags
    text = re.sub(r"\{@\w+\s+([^}]*)\}", r"\1", text)  # unwrap {@code x} etc.
    text = re.sub(r"\s+", " ", text).strip()
    if "." in text:
        text = text.split(".")[0]
    return text.strip()


def _balanced_body_end(source: str, open_brace: int) -> int:
    """Index just past the brace that closes the block at `open_brace`."""
    depth = 0
    i = open_brace
    n = len(source)
    while i < n:
        c = source[i]
        if c == '"' or c == "'":
            quote = c
            i += 1
            while i < n and source[i] != quote:
                i += 2 if source[i] == "\\" else 1
            i += 1
            continue
        if source.startswith("//", i):
            i = source.find("\n", i)
            if i == -1:
                return -1
            continue
        if source.startswith("/*", i):
            i = source.find("*/", i)
            if i == -1:
                return -1
            i += 2
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return -1


def documented_methods(source: str):
    """Yield (summary, method_text) pairs for each javadoc'd method."""
    for match in _JAVADOC_RE.finditer(source):
        summary = javadoc_summary(match.group("body"))
        rest = source[match.end():]
        header_end = rest.find("{")
        semi = rest.find(";")
        if header_end == -1:
            continue
        header = rest[:header_end]
        if semi != -1 and semi < header_end:
            continue  # abstract/interface signature or field
        if "(" not in header or ")" not in header:
            continue  # field or type javadoc
        if re.search(r"\b(class|interface|enum|record)\b", header):
            continue
        body_end = _balanced_body_end(rest, header_end)
        if body_end == -1:
            continue
        yield summary, rest[:body_end].strip()
