"""Corpus statistics over an extracted dataset JSONL file."""

from __future__ import annotations

import json
import re

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")


class StatsError(Exception):
    pass


def _token_count(text):
    return _TOKEN_RE.findall(text)


def compute_stats(path):
    """Average lengths, unique-token counts, and AST node counts.

    Returns a dict with code/nl length statistics and max/avg node
    counts; zeros (plus a warning flag) for an empty file.
    """
    n = 0
    code_len_total = 0
    nl_len_total = 0
    code_tokens = set()
    nl_tokens = set()
    node_total = 0
    node_max = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                code = rec["code"]
                summary = rec["summary"]
                nodes = rec["ast"]["nodes"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise StatsError("%s:%d: bad record (%s)" % (path, lineno, exc))
            n += 1
            ct = _token_count(code)
            nt = _token_count(summary)
            code_len_total += len(ct)
            nl_len_total += len(nt)
            code_tokens.update(ct)
            nl_tokens.update(nt)
            node_total += len(nodes)
            node_max = max(node_max, len(nodes))
    if n == 0:
        return {"samples": 0, "warning": "empty dataset",
                "code_avg_len": 0.0, "code_unique_tokens": 0,
                "nl_avg_len": 0.0, "nl_unique_tokens": 0,
                "ast_max_nodes": 0, "ast_avg_nodes": 0.0}
    return {
        "samples": n,
        "code_avg_len": code_len_total / n,
        "code_unique_tokens": len(code_tokens),
        "nl_avg_len": nl_len_total / n,
        "nl_unique_tokens": len(nl_tokens),
        "ast_max_nodes": node_max,
        "ast_avg_nodes": node_total / n,
    }
