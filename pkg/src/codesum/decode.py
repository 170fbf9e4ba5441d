"""Summary decoder, training objective, and inference.

Each decoder layer runs three attentions in sequence: causal
self-attention over the summary prefix, cross-attention into the code
encoder output, and cross-attention into the fused feature, with a
feed-forward block at the end. Every block is followed by residual add
and layer norm. Inference is greedy or beam search without length
normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import EOS, PAD, SOS
from .numcore import (
    AttentionConfig,
    AttentionParams,
    FeedForwardParams,
    LayerNormParams,
    Parameter,
    add,
    as_tensor,
    dropout,
    feed_forward,
    gather_rows,
    glorot,
    layer_norm,
    log_softmax,
    matmul,
    mul,
    multi_head_attention,
    positional_encoding,
    take,
    tsum,
)


class DecoderLayerParams:
    def __init__(self, name, cfg: AttentionConfig, d_ff, rng):
        d = cfg.d_model
        self.self_attn = AttentionParams(name + ".self", d, d, cfg, rng)
        self.ln1 = LayerNormParams(name + ".ln1", d)
        self.code_attn = AttentionParams(name + ".code", d, d, cfg, rng)
        self.ln2 = LayerNormParams(name + ".ln2", d)
        self.fused_attn = AttentionParams(name + ".fused", d, d, cfg, rng)
        self.ln3 = LayerNormParams(name + ".ln3", d)
        self.ffn = FeedForwardParams(name + ".ffn", d, d_ff, rng)
        self.ln4 = LayerNormParams(name + ".ln4", d)

    def parameters(self):
        yield from self.self_attn.parameters()
        yield from self.ln1.parameters()
        yield from self.code_attn.parameters()
        yield from self.ln2.parameters()
        yield from self.fused_attn.parameters()
        yield from self.ln3.parameters()
        yield from self.ffn.parameters()
        yield from self.ln4.parameters()


class DecoderParams:
    """Summary embedding, N decoder layers, and the vocab projection.

    The pre-softmax projection shares the embedding matrix
    (transformer weight tying), so logits = y @ embed^T + bias.
    """

    def __init__(self, name, n_layers, cfg: AttentionConfig, d_ff, vocab_size, rng):
        self.cfg = cfg
        self.embed = Parameter(glorot(vocab_size, cfg.d_model, rng), name + ".embed")
        self.layers = [
            DecoderLayerParams("%s.l%d" % (name, i), cfg, d_ff, rng)
            for i in range(n_layers)
        ]
        self.out_b = Parameter(np.zeros(vocab_size), name + ".out_b")

    @property
    def vocab_size(self):
        return self.out_b.data.shape[0]

    def parameters(self):
        yield self.embed
        for layer in self.layers:
            yield from layer.parameters()
        yield self.out_b


def causal_mask(length, key_mask=None):
    """(L, L) boolean mask: position t may attend to real keys at <= t."""
    allowed = np.tril(np.ones((length, length), dtype=bool))
    if key_mask is not None:
        allowed = allowed & np.asarray(key_mask, dtype=bool)[None, :]
        # a query must always see itself, even at padded positions
        np.fill_diagonal(allowed, True)
    return allowed


def decoder_forward(summary_ids, x_e_tok, f, params: DecoderParams,
                    token_mask=None, fused_mask=None, summary_mask=None,
                    drop_rate=0.0, rng=None, training=False):
    """Teacher-forced decoder pass. Returns (len(summary_ids), vocab) logits.

    `summary_ids` must start with SOS; position t's logits depend only
    on ids at positions <= t.
    """
    summary_ids = np.asarray(summary_ids, dtype=np.int64)
    length = summary_ids.shape[0]
    if length == 0:
        raise ValueError("empty decoder input")
    emb = mul(gather_rows(params.embed, summary_ids), np.sqrt(float(params.cfg.d_model)))
    y = add(emb, positional_encoding(length, params.cfg.d_model))
    y = dropout(y, drop_rate, rng, training)
    self_mask = causal_mask(length, summary_mask)
    for layer in params.layers:
        a = multi_head_attention(y, y, y, layer.self_attn, mask=self_mask)
        y = layer_norm(add(y, dropout(a, drop_rate, rng, training)),
                       layer.ln1.gain, layer.ln1.bias)
        a = multi_head_attention(y, x_e_tok, x_e_tok, layer.code_attn, mask=token_mask)
        y = layer_norm(add(y, dropout(a, drop_rate, rng, training)),
                       layer.ln2.gain, layer.ln2.bias)
        a = multi_head_attention(y, f, f, layer.fused_attn, mask=fused_mask)
        y = layer_norm(add(y, dropout(a, drop_rate, rng, training)),
                       layer.ln3.gain, layer.ln3.bias)
        a = feed_forward(y, layer.ffn)
        y = layer_norm(add(y, dropout(a, drop_rate, rng, training)),
                       layer.ln4.gain, layer.ln4.bias)
    return add(matmul(y, params.embed.T), params.out_b)


def cross_entropy(logits, target_ids, pad_mask):
    """Mean over samples of the summed next-token negative log-likelihood.

    Accepts one (L, V) logits tensor with (L,) targets, or parallel
    lists of them for a batch. PAD target positions are excluded; a row
    with no real targets is rejected.
    """
    if not isinstance(logits, (list, tuple)):
        logits, target_ids, pad_mask = [logits], [target_ids], [pad_mask]
    if len(logits) == 0:
        raise ValueError("empty batch")
    total = None
    for lg, targets, mask in zip(logits, target_ids, pad_mask):
        targets = np.asarray(targets, dtype=np.int64)
        mask = np.asarray(mask, dtype=bool)
        positions = np.where(mask)[0]
        if positions.size == 0:
            raise ValueError("sample with all-PAD targets")
        ls = log_softmax(as_tensor(lg), axis=-1)
        picked = take(ls, (positions, targets[positions]))
        nll = -tsum(picked)
        total = nll if total is None else add(total, nll)
    return total * (1.0 / len(logits))


@dataclass(frozen=True)
class Hypothesis:
    """A (possibly finished) decode prefix with its total log-probability."""

    ids: tuple
    log_prob: float
    finished: bool


def _next_log_probs(prefix, x_e_tok, f, params, token_mask, fused_mask):
    logits = decoder_forward(np.asarray(prefix), x_e_tok, f, params,
                             token_mask=token_mask, fused_mask=fused_mask)
    row = logits.data[-1]
    row = row - row.max()
    return row - np.log(np.exp(row).sum())


def greedy_decode(x_e_tok, f, params: DecoderParams, max_len,
                  token_mask=None, fused_mask=None):
    """Repeatedly append the most likely next token; ties pick the lowest id.

    PAD and SOS are never emitted. Returns the id sequence including
    the leading SOS and, when reached, the trailing EOS.
    """
    ids = [SOS]
    for _ in range(max_len):
        lp = _next_log_probs(ids, x_e_tok, f, params, token_mask, fused_mask)
        lp[PAD] = -np.inf
        lp[SOS] = -np.inf
        nxt = int(np.argmax(lp))
        ids.append(nxt)
        if nxt == EOS:
            break
    return ids


def beam_search(x_e_tok, f, params: DecoderParams, beam, max_len,
                token_mask=None, fused_mask=None) -> Hypothesis:
    """Top-`beam` expansion by total log-probability, no length penalty.

    Finished hypotheses are kept aside and compared on raw log-prob;
    ties break deterministically by token id, then by hypothesis order.
    """
    if beam < 1:
        raise ValueError("beam must be >= 1")
    active = [Hypothesis((SOS,), 0.0, False)]
    finished = []
    for _ in range(max_len):
        candidates = []
        for hi, hyp in enumerate(active):
            lp = _next_log_probs(hyp.ids, x_e_tok, f, params, token_mask, fused_mask)
            for tok in range(params.vocab_size):
                if tok in (PAD, SOS):
                    continue
                candidates.append((hyp.log_prob + lp[tok], tok, hi))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        prev = active
        active = []
        for score, tok, hi in candidates[:beam]:
            hyp = Hypothesis(prev[hi].ids + (tok,), score, tok == EOS)
            if hyp.finished:
                finished.append(hyp)
            else:
                active.append(hyp)
        if not active:
            break
    finished.extend(active)
    finished.sort(key=lambda h: (-h.log_prob, h.ids))
    return finished[0]
