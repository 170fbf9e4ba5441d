"""Code and AST encoders.

The code encoder is a standard transformer encoder over token
embeddings plus sinusoidal positions. The AST side first runs a 2-layer
graph convolution over the normalized tree adjacency, then the same
kind of transformer blocks (without positional encoding; the graph
step already injects structure). Blocks are post-norm: sublayer ->
dropout -> residual add -> layer norm.
"""

from __future__ import annotations

import numpy as np

from .numcore import (
    AttentionConfig,
    AttentionParams,
    FeedForwardParams,
    LayerNormParams,
    Parameter,
    Tensor,
    add,
    as_tensor,
    concat,
    dropout,
    feed_forward,
    gather_rows,
    glorot,
    layer_norm,
    matmul,
    mul,
    multi_head_attention,
    positional_encoding,
    relu,
)


class EncoderLayerParams:
    def __init__(self, name, cfg: AttentionConfig, d_ff, rng):
        self.attn = AttentionParams(name + ".attn", cfg.d_model, cfg.d_model, cfg, rng)
        self.ln1 = LayerNormParams(name + ".ln1", cfg.d_model)
        self.ffn = FeedForwardParams(name + ".ffn", cfg.d_model, d_ff, rng)
        self.ln2 = LayerNormParams(name + ".ln2", cfg.d_model)

    def parameters(self):
        yield from self.attn.parameters()
        yield from self.ln1.parameters()
        yield from self.ffn.parameters()
        yield from self.ln2.parameters()


class EncoderStack:
    """N identical self-attention + feed-forward blocks."""

    def __init__(self, name, n_layers, cfg: AttentionConfig, d_ff, rng):
        self.cfg = cfg
        self.layers = [
            EncoderLayerParams("%s.l%d" % (name, i), cfg, d_ff, rng)
            for i in range(n_layers)
        ]

    def parameters(self):
        for layer in self.layers:
            yield from layer.parameters()


class GcnStack:
    """Per-layer square weights for the graph convolution; ReLU between."""

    def __init__(self, name, dim, n_layers, rng):
        self.weights = [
            Parameter(glorot(dim, dim, rng), "%s.w%d" % (name, i))
            for i in range(n_layers)
        ]

    def parameters(self):
        yield from self.weights


def gcn_forward(node_emb, prop: np.ndarray, stack: GcnStack):
    """Apply relu(prop @ h @ w) per layer; prop is the normalized adjacency."""
    h = as_tensor(node_emb)
    n = h.data.shape[0]
    if prop.shape != (n, n):
        raise ValueError("propagation matrix %r does not match %d nodes" % (prop.shape, n))
    prop_t = Tensor(prop)
    for w in stack.weights:
        h = relu(matmul(matmul(prop_t, h), w))
    return h


def _block(x, layer: EncoderLayerParams, mask, drop_rate, rng, training):
    a = multi_head_attention(x, x, x, layer.attn, mask=mask)
    x = layer_norm(add(x, dropout(a, drop_rate, rng, training)), layer.ln1.gain, layer.ln1.bias)
    a = feed_forward(x, layer.ffn)
    return layer_norm(add(x, dropout(a, drop_rate, rng, training)), layer.ln2.gain, layer.ln2.bias)


def encode_stack(x, stack: EncoderStack, mask, drop_rate=0.0, rng=None, training=False):
    x = as_tensor(x)
    for layer in stack.layers:
        x = _block(x, layer, mask, drop_rate, rng, training)
    return x


def embed_tokens(embed_table, token_ids, d_model):
    """Embedding lookup scaled by sqrt(d_model), transformer-style."""
    return mul(gather_rows(embed_table, token_ids), np.sqrt(float(d_model)))


def encode_code(token_ids, embed_table, stack: EncoderStack, mask,
                drop_rate=0.0, rng=None, training=False):
    """Scaled token embedding + positional encoding, then the encoder blocks.

    PAD positions are excluded as attention keys via `mask` (True at
    real tokens).
    """
    emb = embed_tokens(embed_table, token_ids, stack.cfg.d_model)
    pe = positional_encoding(len(token_ids), stack.cfg.d_model)
    x = dropout(add(emb, pe), drop_rate, rng, training)
    return encode_stack(x, stack, mask, drop_rate, rng, training)


def encode_ast(x_ast, stack: EncoderStack, mask,
               drop_rate=0.0, rng=None, training=False):
    """Encoder blocks over (padded) graph-convolved node features."""
    return encode_stack(x_ast, stack, mask, drop_rate, rng, training)


def pad_rows(x, length):
    """Zero-pad a (n, d) tensor to (length, d) rows."""
    x = as_tensor(x)
    n, d = x.data.shape
    if n > length:
        raise ValueError("cannot pad %d rows down to %d" % (n, length))
    if n == length:
        return x
    return concat([x, Tensor(np.zeros((length - n, d)))], axis=0)
