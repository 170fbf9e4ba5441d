"""Fusing the encoded token and AST modalities.

F1 cross-attends the AST encoder output (queries) over the code
encoder output (keys/values) through per-position linear projections.
F2 combines the raw pre-encoder embeddings; its construction depends
on the fusion mode:

  fgfm      matched leaf embeddings added onto their token spans
  ast_only  the AST embedding used directly
  self_attn a single-head attention of AST over token embeddings
  concat    feature-axis concatenation projected back to width d

The fused output is always F = F1 + F2 at the shared padded length.
"""

from __future__ import annotations

import numpy as np

from .align import apply_f2
from .numcore import (
    Parameter,
    Tensor,
    add,
    as_tensor,
    concat,
    glorot,
    matmul,
    mul,
    scaled_dot_attention,
)

FUSION_MODES = ("fgfm", "ast_only", "self_attn", "concat")


class FusionParams:
    """Projections for F1 plus the mode-specific extras.

    All mode parameters are always allocated so checkpoints stay
    loadable when the mode changes; unused ones simply receive no
    gradient.
    """

    def __init__(self, name, d_model, d_k, rng):
        self.d_k = d_k
        self.wq_ae = Parameter(glorot(d_model, d_k, rng), name + ".wq_ae")
        self.wk_te = Parameter(glorot(d_model, d_k, rng), name + ".wk_te")
        self.wv_te = Parameter(glorot(d_model, d_model, rng), name + ".wv_te")
        # self_attn mode: attention over the raw embeddings
        self.wq_sa = Parameter(glorot(d_model, d_k, rng), name + ".wq_sa")
        self.wk_sa = Parameter(glorot(d_model, d_k, rng), name + ".wk_sa")
        self.wv_sa = Parameter(glorot(d_model, d_model, rng), name + ".wv_sa")
        # concat mode: projection from 2d back to d
        self.w_cat = Parameter(glorot(2 * d_model, d_model, rng), name + ".w_cat")

    def parameters(self):
        yield from (
            self.wq_ae, self.wk_te, self.wv_te,
            self.wq_sa, self.wk_sa, self.wv_sa,
            self.w_cat,
        )


def _mask_rows(x, row_mask):
    """Zero out rows where row_mask is False (padding queries)."""
    return mul(x, np.asarray(row_mask, dtype=np.float64)[:, None])


def fuse_f1(x_e_tok, x_e_ast, params: FusionParams, token_mask, ast_mask,
            return_weights=False):
    """Cross-attention of encoded AST over encoded tokens.

    PAD token positions get zero attention mass and padded AST query
    rows are zeroed in the output.
    """
    q = matmul(as_tensor(x_e_ast), params.wq_ae)
    k = matmul(as_tensor(x_e_tok), params.wk_te)
    v = matmul(as_tensor(x_e_tok), params.wv_te)
    out, weights = scaled_dot_attention(q, k, v, params.d_k, mask=token_mask,
                                        return_weights=True)
    out = _mask_rows(out, ast_mask)
    if return_weights:
        return out, weights
    return out


def _self_attn_f2(token_emb, ast_emb, params: FusionParams, token_mask, ast_mask):
    q = matmul(as_tensor(ast_emb), params.wq_sa)
    k = matmul(as_tensor(token_emb), params.wk_sa)
    v = matmul(as_tensor(token_emb), params.wv_sa)
    out = scaled_dot_attention(q, k, v, params.d_k, mask=token_mask)
    return _mask_rows(out, ast_mask)


def fuse(x_e_tok, x_e_ast, token_emb, ast_emb, match_map, mode,
         params: FusionParams, token_mask, ast_mask):
    """F = F1 + (mode-dependent F2); all inputs padded to a shared length."""
    if mode not in FUSION_MODES:
        raise ValueError("unknown fusion mode %r (expected one of %r)" % (mode, FUSION_MODES))
    shapes = {as_tensor(t).data.shape for t in (x_e_tok, x_e_ast, token_emb, ast_emb)}
    if len(shapes) != 1:
        raise ValueError("fusion inputs must share one padded shape, got %r" % (shapes,))
    f1 = fuse_f1(x_e_tok, x_e_ast, params, token_mask, ast_mask)
    if mode == "fgfm":
        f2 = apply_f2(as_tensor(token_emb), as_tensor(ast_emb), match_map)
    elif mode == "ast_only":
        f2 = as_tensor(ast_emb)
    elif mode == "self_attn":
        f2 = _self_attn_f2(token_emb, ast_emb, params, token_mask, ast_mask)
    else:  # concat
        f2 = matmul(concat([as_tensor(token_emb), as_tensor(ast_emb)], axis=1), params.w_cat)
    return add(f1, f2)
