"""Fine-grained matching of AST leaf values to code token spans.

Leaves are visited in pre-order and matched, via a forward-moving
cursor, to the first contiguous run of subword tokens equal to the
leaf's own subword-split value. Matched leaf embeddings are then added
onto the token embeddings they align with.
"""

from __future__ import annotations

import numpy as np

from .asts import Ast, leaf_value
from .corpus import split_identifier

# A MatchMap is a dict {leaf_id: (start, end)} over token positions,
# with spans disjoint and span starts strictly increasing in leaf id.


def build_match_map(ast: Ast, tokens) -> dict:
    """Match each leaf's subword-split value against the token stream.

    The scan cursor starts at 0 and advances past every matched span, so
    repeated identifiers align occurrence to occurrence; an unmatched or
    empty-valued leaf is skipped and leaves the cursor unchanged. Pass
    already-truncated inputs: matching never looks past the end of
    either sequence.
    """
    tokens = list(tokens)
    mapping = {}
    cursor = 0
    for node in ast.nodes:
        if not node.is_leaf:
            continue
        subwords = split_identifier(leaf_value(node))
        if not subwords:
            continue
        k = len(subwords)
        for t in range(cursor, len(tokens) - k + 1):
            if tokens[t : t + k] == subwords:
                mapping[node.id] = (t, t + k)
                cursor = t + k
                break
    return mapping


def check_match_map(mapping: dict, n_tokens: int, n_nodes: int) -> None:
    """Raise if a span or leaf id falls outside the padded matrices."""
    prev_start = -1
    for leaf in sorted(mapping):
        start, end = mapping[leaf]
        if not 0 <= leaf < n_nodes:
            raise IndexError("leaf id %d out of range (n=%d)" % (leaf, n_nodes))
        if not (0 <= start < end <= n_tokens):
            raise IndexError("span %r out of range (L=%d)" % ((start, end), n_tokens))
        if start <= prev_start:
            raise ValueError("span starts not increasing with leaf id")
        prev_start = start


def match_matrix(mapping: dict, l_code: int, l_ast: int) -> np.ndarray:
    """(l_code, l_ast) selection matrix S with S[t, leaf] = 1 inside spans.

    S @ ast_emb scatters each matched leaf row onto its token span.
    """
    check_match_map(mapping, l_code, l_ast)
    sel = np.zeros((l_code, l_ast), dtype=np.float64)
    for leaf, (start, end) in mapping.items():
        sel[start:end, leaf] = 1.0
    return sel


def apply_f2(token_emb, ast_emb, mapping: dict):
    """Add each matched leaf's embedding row onto its token span rows.

    Rows outside every span pass through unchanged. Works on plain
    (L, d) arrays and on autodiff tensors alike.
    """
    l_code = token_emb.shape[0]
    l_ast = ast_emb.shape[0]
    sel = match_matrix(mapping, l_code, l_ast)
    return token_emb + sel @ ast_emb


def map_to_json(mapping: dict) -> dict:
    """JSON form {"<leaf_id>": [start, end]} in leaf-id order."""
    return {str(leaf): [int(s), int(e)] for leaf, (s, e) in sorted(mapping.items())}
