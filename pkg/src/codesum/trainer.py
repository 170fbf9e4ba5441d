"""Training loop (plain SGD), early stopping, and checkpoint I/O.

Runs are deterministic for a fixed seed: batch order, dropout masks,
and parameter initialization all come from one seeded generator, and
all arithmetic is float64. Checkpoints are single binary files with a
magic header, format version, and a trailing SHA-256 checksum.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import model as model_mod
from .asts import ast_from_record, validate_ast
from .config import TrainConfig
from .corpus import (
    EOS,
    SOS,
    EncodedSample,
    Vocab,
    build_vocab,
    tokenize_code,
    tokenize_summary,
)
from .numcore import backward, zero_grads

CHECKPOINT_MAGIC = b"MMF3"
CHECKPOINT_VERSION = 1


class DivergenceError(RuntimeError):
    """Training loss became non-finite."""


class CheckpointError(Exception):
    pass


class CorruptCheckpoint(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    pass


@dataclass
class Dataset:
    """Encoded train/valid splits plus the vocabularies they were built with."""

    train: list
    valid: list
    code_vocab: Vocab
    summary_vocab: Vocab


def encode_sample(sample, code_vocab: Vocab, summary_vocab: Vocab) -> EncodedSample:
    """Tokenize, encode, and validate one Sample into model-ready form."""
    tokens = tokenize_code(sample.code)
    ast = validate_ast(ast_from_record(sample.ast))
    summary_ids = [SOS] + summary_vocab.encode_seq(tokenize_summary(sample.summary)) + [EOS]
    return EncodedSample(
        id=sample.id,
        code_tokens=tokens,
        code_ids=code_vocab.encode_seq(tokens),
        ast=ast,
        summary_ids=summary_ids,
    )


def build_dataset(train_samples, valid_samples, config: TrainConfig) -> Dataset:
    """Build vocabularies on the training split and encode both splits."""
    code_vocab = build_vocab([tokenize_code(s.code) for s in train_samples],
                             config.code_vocab_cap)
    summary_vocab = build_vocab([tokenize_summary(s.summary) for s in train_samples],
                                config.summary_vocab_cap)
    return Dataset(
        train=[encode_sample(s, code_vocab, summary_vocab) for s in train_samples],
        valid=[encode_sample(s, code_vocab, summary_vocab) for s in valid_samples],
        code_vocab=code_vocab,
        summary_vocab=summary_vocab,
    )


@dataclass
class Checkpoint:
    params: dict
    code_vocab: Vocab
    summary_vocab: Vocab
    config: TrainConfig
    epoch: int
    best_val: float


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    valid_loss: float


def sgd_step(params, lr, grad_clip=0.0):
    """param <- param - lr * grad, with optional global-norm clipping."""
    params = [p for p in params if p.trainable and p.grad is not None]
    scale = 1.0
    if grad_clip > 0.0:
        norm = np.sqrt(sum(float((p.grad * p.grad).sum()) for p in params))
        if norm > grad_clip:
            scale = grad_clip / norm
    for p in params:
        p.data -= lr * scale * p.grad
    zero_grads(params)


def _mean_loss(model, prepared, batch_size, training=False, rng=None):
    """Mean over samples of the per-sample summed NLL."""
    total = 0.0
    for start in range(0, len(prepared), batch_size):
        chunk = prepared[start : start + batch_size]
        loss = model_mod.batch_loss(model, chunk, training=training, rng=rng)
        total += float(loss.data) * len(chunk)
    return total / len(prepared)


def evaluate_validation(model, prepared_valid, batch_size=32) -> float:
    """Validation loss with dropout disabled."""
    if not prepared_valid:
        raise ValueError("empty validation split")
    return _mean_loss(model, prepared_valid, batch_size)


def train(dataset: Dataset, config: TrainConfig, log=None):
    """Optimize until early stopping or max_epochs; returns (Checkpoint, history).

    Gradient clipping (config.grad_clip) is a divergence guard; a
    non-finite loss aborts with DivergenceError. The returned
    checkpoint holds the parameters of the best validation epoch.
    """
    config.validate()
    if not dataset.train:
        raise ValueError("empty training split")
    net = model_mod.Model(config, len(dataset.code_vocab), len(dataset.summary_vocab))
    rng = np.random.default_rng(config.seed)
    prepared_train = model_mod.prepare_samples(net, dataset.train)
    prepared_valid = model_mod.prepare_samples(net, dataset.valid) if dataset.valid else []

    params = list(net.parameters())
    best_val = np.inf
    best_epoch = 0
    best_params = {p.name: p.data.copy() for p in params}
    history = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(prepared_train))
        epoch_total = 0.0
        for start in range(0, len(order), config.batch_size):
            chunk = [prepared_train[i] for i in order[start : start + config.batch_size]]
            loss = model_mod.batch_loss(net, chunk, training=True, rng=rng)
            if not np.isfinite(loss.data):
                raise DivergenceError("non-finite training loss at epoch %d" % epoch)
            backward(loss)
            sgd_step(params, config.learning_rate, config.grad_clip)
            epoch_total += float(loss.data) * len(chunk)
        train_loss = epoch_total / len(prepared_train)
        valid_loss = (
            evaluate_validation(net, prepared_valid, config.batch_size)
            if prepared_valid
            else train_loss
        )
        history.append(EpochStats(epoch, train_loss, valid_loss))
        if log is not None:
            log(history[-1])
        if valid_loss < best_val:
            best_val = valid_loss
            best_epoch = epoch
            best_params = {p.name: p.data.copy() for p in params}
        elif epoch - best_epoch >= config.patience:
            break
    for p in params:
        p.data = best_params[p.name].copy()
    ckpt = Checkpoint(
        params={name: arr.copy() for name, arr in best_params.items()},
        code_vocab=dataset.code_vocab,
        summary_vocab=dataset.summary_vocab,
        config=config,
        epoch=best_epoch,
        best_val=float(best_val),
    )
    return ckpt, history


def model_from_checkpoint(ckpt: Checkpoint):
    """Rebuild a Model and load the stored parameter tensors into it."""
    net = model_mod.Model(ckpt.config, len(ckpt.code_vocab), len(ckpt.summary_vocab))
    own = net.param_dict()
    if set(own) != set(ckpt.params):
        missing = set(own) ^ set(ckpt.params)
        raise CheckpointError("parameter names do not match model: %s" % sorted(missing))
    for name, p in own.items():
        stored = ckpt.params[name]
        if stored.shape != p.data.shape:
            raise CheckpointError(
                "shape mismatch for %s: %r vs %r" % (name, stored.shape, p.data.shape)
            )
        p.data = stored.astype(np.float64).copy()
    return net


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    names = sorted(ckpt.params)
    manifest = []
    offset = 0
    blobs = []
    for name in names:
        arr = np.ascontiguousarray(ckpt.params[name], dtype=np.float64)
        raw = arr.tobytes()
        manifest.append(
            {"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)}
        )
        blobs.append(raw)
        offset += len(raw)
    header = json.dumps(
        {
            "config": ckpt.config.to_dict(),
            "code_vocab": ckpt.code_vocab.tokens,
            "summary_vocab": ckpt.summary_vocab.tokens,
            "epoch": ckpt.epoch,
            "best_val": ckpt.best_val,
            "tensors": manifest,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    body = (
        CHECKPOINT_MAGIC
        + struct.pack("<II", CHECKPOINT_VERSION, len(header))
        + header
        + b"".join(blobs)
    )
    digest = hashlib.sha256(body).digest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(digest)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 44 or raw[:4] != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint("%s: not a checkpoint file" % path)
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCheckpoint("%s: checksum mismatch (truncated or corrupted)" % path)
    version, header_len = struct.unpack_from("<II", body, 4)
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch("%s: format version %d, expected %d"
                              % (path, version, CHECKPOINT_VERSION))
    header_start = 12
    try:
        header = json.loads(body[header_start : header_start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptCheckpoint("%s: bad header (%s)" % (path, exc)) from exc
    data = body[header_start + header_len :]
    params = {}
    for entry in header["tensors"]:
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(data):
            raise CorruptCheckpoint("%s: tensor %r out of bounds" % (path, entry["name"]))
        arr = np.frombuffer(data[start : start + nbytes], dtype=np.float64)
        params[entry["name"]] = arr.reshape(entry["shape"]).copy()
    return Checkpoint(
        params=params,
        code_vocab=Vocab(header["code_vocab"]),
        summary_vocab=Vocab(header["summary_vocab"]),
        config=TrainConfig.from_dict(header["config"]),
        epoch=int(header["epoch"]),
        best_val=float(header["best_val"]),
    )
