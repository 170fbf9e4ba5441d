"""Finite-difference verification of every layer's backward pass.

Central differences with step 1e-5 in double precision, compared
against the taped gradients entry by entry. Large parameters are
probed at a random subset of entries; the reported number is the worst
relative error max(|a - n|) / max(|a|, |n|, 1e-4) over all probes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model as model_mod
from . import trainer
from .config import TrainConfig
from .corpus import Sample
from .decode import DecoderParams, cross_entropy, decoder_forward
from .encoders import EncoderStack, GcnStack, encode_code, gcn_forward
from .fusion import FUSION_MODES
from .numcore import (
    AttentionConfig,
    AttentionParams,
    FeedForwardParams,
    LayerNormParams,
    Parameter,
    Tensor,
    add,
    backward,
    feed_forward,
    gather_rows,
    layer_norm,
    matmul,
    mul,
    multi_head_attention,
    positional_encoding,
    softmax,
    tsum,
    zero_grads,
)
from .toy import generate_records

GRAD_TOL = 1e-4
FD_STEP = 1e-5


@dataclass
class CheckResult:
    name: str
    max_rel_err: float
    n_checked: int

    @property
    def passed(self):
        return self.max_rel_err < GRAD_TOL


def check_gradients(build_loss, params, rng, h=FD_STEP, max_probes=8):
    """Compare taped grads of `params` against central differences.

    `build_loss` must be a pure function of the current parameter data.
    Returns (max_rel_err, n_checked).
    """
    params = list(params)
    zero_grads(params)
    backward(build_loss())
    analytic = {
        id(p): (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for p in params
    }
    zero_grads(params)
    worst = 0.0
    checked = 0
    for p in params:
        flat = p.data.reshape(-1)
        if flat.size <= max_probes:
            indices = np.arange(flat.size)
        else:
            indices = rng.choice(flat.size, size=max_probes, replace=False)
        a_flat = analytic[id(p)].reshape(-1)
        for idx in indices:
            orig = flat[idx]
            flat[idx] = orig + h
            up = float(build_loss().data)
            flat[idx] = orig - h
            down = float(build_loss().data)
            flat[idx] = orig
            numeric = (up - down) / (2.0 * h)
            a = a_flat[idx]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-4)
            worst = max(worst, rel)
            checked += 1
    return worst, checked


def _rand(rng, *shape):
    return rng.standard_normal(shape)


def _scored_sum(out, probe):
    """Scalar readout sum(out * probe) so every output entry matters."""
    return tsum(mul(out, probe))


def run_suite(seed=0, max_probes=8):
    """Run every layer check plus the full-model graphs; returns CheckResults."""
    rng = np.random.default_rng(seed)
    results = []

    def case(name, build_loss, params):
        err, n = check_gradients(build_loss, params, rng, max_probes=max_probes)
        results.append(CheckResult(name, err, n))

    d, length = 16, 8
    cfg = AttentionConfig(d_model=d, n_heads=2, d_k=8)

    w = Parameter(_rand(rng, d, d), "lin.w")
    b = Parameter(_rand(rng, d), "lin.b")
    x = Parameter(_rand(rng, length, d), "lin.x")
    probe = Tensor(_rand(rng, length, d))
    case("linear_projection", lambda: _scored_sum(add(matmul(x, w), b), probe), [w, b, x])

    sx = Parameter(_rand(rng, length, d), "softmax.x")
    sprobe = Tensor(_rand(rng, length, d))
    case("softmax", lambda: _scored_sum(softmax(sx, axis=-1), sprobe), [sx])

    attn = AttentionParams("mha", d, d, cfg, rng)
    aq = Parameter(_rand(rng, length, d), "mha.q")
    ak = Parameter(_rand(rng, length, d), "mha.k")
    av = Parameter(_rand(rng, length, d), "mha.v")
    aprobe = Tensor(_rand(rng, length, d))
    attn_params = [aq, ak, av] + list(attn.parameters())
    case(
        "multi_head_attention",
        lambda: _scored_sum(multi_head_attention(aq, ak, av, attn), aprobe),
        attn_params,
    )
    key_mask = np.array([True] * 5 + [False] * (length - 5))
    case(
        "multi_head_attention_masked",
        lambda: _scored_sum(multi_head_attention(aq, ak, av, attn, mask=key_mask), aprobe),
        attn_params,
    )

    ffn = FeedForwardParams("ffn", d, 2 * d, rng)
    fx = Parameter(_rand(rng, length, d), "ffn.x")
    fprobe = Tensor(_rand(rng, length, d))
    case(
        "feed_forward",
        lambda: _scored_sum(feed_forward(fx, ffn), fprobe),
        [fx] + list(ffn.parameters()),
    )

    ln = LayerNormParams("ln", d)
    lx = Parameter(_rand(rng, length, d), "ln.x")
    lprobe = Tensor(_rand(rng, length, d))
    case(
        "layer_norm",
        lambda: _scored_sum(layer_norm(lx, ln.gain, ln.bias), lprobe),
        [lx] + list(ln.parameters()),
    )

    table = Parameter(_rand(rng, 12, d), "emb.table")
    ids = rng.integers(0, 12, size=length)
    pe = positional_encoding(length, d)
    eprobe = Tensor(_rand(rng, length, d))
    case(
        "embedding_plus_positions",
        lambda: _scored_sum(add(gather_rows(table, ids), pe), eprobe),
        [table],
    )

    gcn = GcnStack("gcn", d, 2, rng)
    gx = Parameter(_rand(rng, 5, d), "gcn.x")
    prop = np.abs(_rand(rng, 5, 5))
    prop = (prop + prop.T) / 2.0
    gprobe = Tensor(_rand(rng, 5, d))
    case(
        "gcn_layer",
        lambda: _scored_sum(gcn_forward(gx, prop, gcn), gprobe),
        [gx] + list(gcn.parameters()),
    )

    enc = EncoderStack("enc", 2, cfg, 2 * d, rng)
    enc_table = Parameter(_rand(rng, 12, d), "enc.table")
    enc_ids = rng.integers(0, 12, size=length)
    enc_mask = np.array([True] * 6 + [False] * (length - 6))
    eprobe2 = Tensor(_rand(rng, length, d))
    case(
        "encoder_stack",
        lambda: _scored_sum(
            encode_code(enc_ids, enc_table, enc, enc_mask), eprobe2
        ),
        [enc_table] + list(enc.parameters()),
    )

    dec = DecoderParams("dec", 2, cfg, 2 * d, 10, rng)
    dec_ids = np.array([1, 5, 6, 7, 2, 0])
    dec_mask = np.array([True] * 5 + [False])
    mem = Parameter(_rand(rng, length, d), "dec.mem")
    fused = Parameter(_rand(rng, length, d), "dec.fused")
    dprobe = Tensor(_rand(rng, len(dec_ids), 10))

    def dec_logits():
        return decoder_forward(dec_ids, mem, fused, dec, summary_mask=dec_mask)

    case(
        "decoder_stack",
        lambda: _scored_sum(dec_logits(), dprobe),
        [mem, fused] + list(dec.parameters()),
    )

    targets = np.array([5, 6, 7, 2, 0, 0])
    tmask = np.array([True, True, True, True, False, False])
    logit_param = Parameter(_rand(rng, 6, 10), "loss.logits")
    case(
        "cross_entropy_loss",
        lambda: cross_entropy(logit_param, targets, tmask),
        [logit_param],
    )

    for mode in FUSION_MODES:
        results.append(_full_graph_case(mode, seed, max_probes))
    return results


def _full_graph_case(mode, seed, max_probes):
    """Gradient-check the whole encoder -> fusion -> decoder -> loss graph."""
    config = TrainConfig(
        d_model=16, n_heads=2, d_k=8, d_ff=32, n_layers=1, gcn_layers=2,
        max_len=8, max_summary_len=6, dropout=0.0, fusion_mode=mode,
        seed=seed, batch_size=2, max_epochs=1, patience=1,
        code_vocab_cap=200, summary_vocab_cap=200,
    )
    records = generate_records(3, seed=seed + 11)
    samples = [Sample(r["id"], r["code"], r["summary"], r["ast"]) for r in records]
    dataset = trainer.build_dataset(samples, [], config)
    net = model_mod.Model(config, len(dataset.code_vocab), len(dataset.summary_vocab))
    prepared = model_mod.prepare_samples(net, dataset.train)
    params = list(net.parameters())
    rng = np.random.default_rng(seed + 17)
    err, n = check_gradients(
        lambda: model_mod.batch_loss(net, prepared), params, rng, max_probes=max_probes
    )
    return CheckResult("full_graph_%s" % mode, err, n)
