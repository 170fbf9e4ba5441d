"""End-to-end network assembly: embeddings, both encoders, fusion, and
the decoder, plus per-sample input preparation.

Samples are processed one at a time (all core ops work on (L, d)
matrices); a batch is a list of prepared samples whose losses are
averaged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import decode
from .align import build_match_map
from .asts import build_propagation, init_node_embeddings, truncate_ast
from .config import TrainConfig
from .corpus import pad_batch
from .encoders import (
    EncoderStack,
    GcnStack,
    embed_tokens,
    encode_ast,
    encode_code,
    gcn_forward,
    pad_rows,
)
from .fusion import FusionParams, fuse
from .numcore import (
    AttentionConfig,
    Parameter,
    dropout,
    glorot,
)


class Model:
    """All trainable parameters of the summarizer, keyed by stable names."""

    def __init__(self, config: TrainConfig, code_vocab_size: int, sum_vocab_size: int):
        config.validate()
        self.config = config
        self.code_vocab_size = code_vocab_size
        self.sum_vocab_size = sum_vocab_size
        rng = np.random.default_rng(config.seed)
        cfg = AttentionConfig(config.d_model, config.n_heads, config.d_k)
        self.attn_cfg = cfg
        self.code_embed = Parameter(glorot(code_vocab_size, config.d_model, rng), "code_embed")
        self.code_encoder = EncoderStack("code_enc", config.n_layers, cfg, config.d_ff, rng)
        self.gcn = GcnStack("gcn", config.d_model, config.gcn_layers, rng)
        self.ast_encoder = EncoderStack("ast_enc", config.n_layers, cfg, config.d_ff, rng)
        self.fusion = FusionParams("fusion", config.d_model, config.d_k, rng)
        self.decoder = decode.DecoderParams(
            "dec", config.n_layers, cfg, config.d_ff, sum_vocab_size, rng
        )
        names = [p.name for p in self.parameters()]
        if len(names) != len(set(names)):
            raise AssertionError("duplicate parameter names")

    def parameters(self):
        yield self.code_embed
        yield from self.code_encoder.parameters()
        yield from self.gcn.parameters()
        yield from self.ast_encoder.parameters()
        yield from self.fusion.parameters()
        yield from self.decoder.parameters()

    def param_dict(self):
        return {p.name: p for p in self.parameters()}


@dataclass
class PreparedSample:
    """Fixed-shape per-sample model inputs (padding and alignment done)."""

    id: str
    code_ids: np.ndarray
    code_mask: np.ndarray
    ast: object
    prop: np.ndarray
    node_emb: np.ndarray
    ast_mask: np.ndarray
    fused_mask: np.ndarray
    match: dict
    summary_in: np.ndarray
    summary_in_mask: np.ndarray
    target: np.ndarray
    target_mask: np.ndarray
    reference: list


def prepare_samples(model: Model, samples) -> list:
    """Truncate, pad, align, and precompute graph inputs for EncodedSamples.

    The result is reusable across epochs: everything here is a pure
    function of the sample and the configuration.
    """
    config = model.config
    length = config.max_len
    prepared = []
    for sample in samples:
        batch = pad_batch([sample], length, length, config.max_summary_len)
        ast = truncate_ast(sample.ast, length)
        tokens = list(sample.code_tokens[:length])
        match = build_match_map(ast, tokens)
        srow = batch.summary_ids[0]
        smask = batch.summary_mask[0]
        prepared.append(
            PreparedSample(
                id=sample.id,
                code_ids=batch.code_ids[0],
                code_mask=batch.code_mask[0],
                ast=ast,
                prop=build_propagation(ast),
                node_emb=init_node_embeddings(ast, config.d_model, config.seed),
                ast_mask=batch.ast_mask[0],
                fused_mask=batch.code_mask[0] | batch.ast_mask[0],
                match=match,
                summary_in=srow[:-1].copy(),
                summary_in_mask=smask[:-1].copy(),
                target=srow[1:].copy(),
                target_mask=smask[1:].copy(),
                reference=_reference_ids(sample.summary_ids),
            )
        )
    return prepared


def _reference_ids(summary_ids):
    """The content ids of the stored reference (reserved ids stripped)."""
    return [i for i in summary_ids if i > 3]


def encode_sample(model: Model, ps: PreparedSample, training=False, rng=None):
    """Run both encoders and the fusion; returns (x_e_tok, f, token_emb)."""
    config = model.config
    rate = config.dropout if training else 0.0
    token_emb = embed_tokens(model.code_embed, ps.code_ids, config.d_model)
    x_e_tok = encode_code(ps.code_ids, model.code_embed, model.code_encoder,
                          ps.code_mask, drop_rate=rate, rng=rng, training=training)
    x_ast_nodes = gcn_forward(ps.node_emb, ps.prop, model.gcn)
    ast_emb = pad_rows(x_ast_nodes, config.max_len)
    x_e_ast = encode_ast(dropout(ast_emb, rate, rng, training), model.ast_encoder,
                         ps.ast_mask, drop_rate=rate, rng=rng, training=training)
    f = fuse(x_e_tok, x_e_ast, token_emb, ast_emb, ps.match, config.fusion_mode,
             model.fusion, ps.code_mask, ps.ast_mask)
    return x_e_tok, f, token_emb


def forward_sample(model: Model, ps: PreparedSample, training=False, rng=None):
    """Teacher-forced logits for one prepared sample."""
    config = model.config
    rate = config.dropout if training else 0.0
    x_e_tok, f, _ = encode_sample(model, ps, training=training, rng=rng)
    return decode.decoder_forward(
        ps.summary_in, x_e_tok, f, model.decoder,
        token_mask=ps.code_mask, fused_mask=ps.fused_mask,
        summary_mask=ps.summary_in_mask,
        drop_rate=rate, rng=rng, training=training,
    )


def batch_loss(model: Model, prepared, training=False, rng=None):
    """Mean over the batch of per-sample summed next-token NLL."""
    logits = [forward_sample(model, ps, training=training, rng=rng) for ps in prepared]
    return decode.cross_entropy(
        logits, [ps.target for ps in prepared], [ps.target_mask for ps in prepared]
    )


def generate(model: Model, ps: PreparedSample, beam=1, max_len=None):
    """Decode one sample; beam 1 is greedy. Returns generated content ids."""
    max_len = model.config.max_summary_len if max_len is None else max_len
    x_e_tok, f, _ = encode_sample(model, ps, training=False)
    if beam <= 1:
        ids = decode.greedy_decode(x_e_tok, f, model.decoder, max_len,
                                   token_mask=ps.code_mask, fused_mask=ps.fused_mask)
    else:
        ids = list(decode.beam_search(x_e_tok, f, model.decoder, beam, max_len,
                                      token_mask=ps.code_mask,
                                      fused_mask=ps.fused_mask).ids)
    return [i for i in ids if i > 3]
