"""Command-line surface: preprocess, train, summarize, evaluate,
match, and gradcheck.

Exit codes: 0 success, 2 usage error, 3 data error, 4 checkpoint
error, 5 numeric failure. Flags override config-file values, which
override the built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import gradcheck as gradcheck_mod
from . import model as model_mod
from . import trainer
from .align import build_match_map, map_to_json
from .asts import AstError, ast_from_record, validate_ast
from .config import TrainConfig
from .corpus import (
    DataError,
    Vocab,
    load_samples,
    read_jsonl,
    tokenize_code,
    tokenize_summary,
)
from .metrics import evaluate_pairs
from .numcore import FullyMaskedError
from .trainer import CheckpointError, DivergenceError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CHECKPOINT = 4
EXIT_NUMERIC = 5


def _add_config_flags(parser):
    for f in dataclasses.fields(TrainConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, type=type(f.default), default=None,
                            help="config override (default %s)" % (f.default,))


def _resolve_config(args) -> TrainConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data.update(json.load(fh))
    for f in dataclasses.fields(TrainConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    try:
        return TrainConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


class UsageError(Exception):
    pass


def _load_validated_samples(path):
    """Load Samples and validate every AST record, keeping the raw form."""
    samples, skipped = load_samples(read_jsonl(path))
    for sample in samples:
        try:
            validate_ast(ast_from_record(sample.ast))
        except AstError as exc:
            raise DataError("sample %s: %s" % (sample.id, exc)) from exc
    return samples, skipped


def _write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def cmd_preprocess(args):
    config = _resolve_config(args)
    samples, skipped = _load_validated_samples(args.data)
    if not samples:
        raise DataError("no usable samples in %s" % args.data)
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(samples))
    n_train = int(len(samples) * args.train_frac)
    n_valid = int(len(samples) * args.valid_frac)
    splits = {
        "train": [samples[i] for i in order[:n_train]],
        "valid": [samples[i] for i in order[n_train : n_train + n_valid]],
        "test": [samples[i] for i in order[n_train + n_valid :]],
    }
    os.makedirs(args.out, exist_ok=True)
    for name, split in splits.items():
        _write_jsonl(
            (
                {
                    "id": s.id,
                    "code": s.code,
                    "summary": s.summary,
                    "ast": s.ast,
                    "code_tokens": tokenize_code(s.code),
                    "summary_tokens": tokenize_summary(s.summary),
                }
                for s in split
            ),
            os.path.join(args.out, name + ".jsonl"),
        )
    from .corpus import build_vocab

    code_vocab = build_vocab([tokenize_code(s.code) for s in splits["train"]],
                             config.code_vocab_cap)
    summary_vocab = build_vocab([tokenize_summary(s.summary) for s in splits["train"]],
                                config.summary_vocab_cap)
    code_vocab.save(os.path.join(args.out, "code_vocab.json"))
    summary_vocab.save(os.path.join(args.out, "summary_vocab.json"))
    meta = {
        "source": os.path.basename(args.data),
        "skipped": skipped,
        "counts": {k: len(v) for k, v in splits.items()},
        "config": config.to_dict(),
    }
    with open(os.path.join(args.out, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print("preprocessed %d samples (%d skipped) -> %s" % (len(samples), skipped, args.out))
    return EXIT_OK


def _load_split(data_dir, name):
    path = os.path.join(data_dir, name + ".jsonl")
    if not os.path.exists(path):
        return []
    samples, _ = _load_validated_samples(path)
    return samples


def cmd_train(args):
    config = _resolve_config(args)
    train_samples = _load_split(args.data, "train")
    valid_samples = _load_split(args.data, "valid")
    if not train_samples:
        raise DataError("no training samples under %s" % args.data)
    code_vocab_path = os.path.join(args.data, "code_vocab.json")
    sum_vocab_path = os.path.join(args.data, "summary_vocab.json")
    if os.path.exists(code_vocab_path) and os.path.exists(sum_vocab_path):
        code_vocab = Vocab.load(code_vocab_path)
        summary_vocab = Vocab.load(sum_vocab_path)
        dataset = trainer.Dataset(
            train=[trainer.encode_sample(s, code_vocab, summary_vocab) for s in train_samples],
            valid=[trainer.encode_sample(s, code_vocab, summary_vocab) for s in valid_samples],
            code_vocab=code_vocab,
            summary_vocab=summary_vocab,
        )
    else:
        dataset = trainer.build_dataset(train_samples, valid_samples, config)
    log_rows = []

    def log(stats):
        log_rows.append("%d,%.10f,%.10f" % (stats.epoch, stats.train_loss, stats.valid_loss))
        print("epoch %3d  train %.4f  valid %.4f"
              % (stats.epoch, stats.train_loss, stats.valid_loss))

    ckpt, _history = trainer.train(dataset, config, log=log)
    trainer.save_checkpoint(ckpt, args.out)
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,valid_loss\n")
            fh.write("\n".join(log_rows) + "\n")
    print("saved checkpoint (best epoch %d, valid %.4f) -> %s"
          % (ckpt.epoch, ckpt.best_val, args.out))
    return EXIT_OK


def cmd_summarize(args):
    ckpt = trainer.load_checkpoint(args.checkpoint)
    net = trainer.model_from_checkpoint(ckpt)
    samples, _ = _load_validated_samples(args.data)
    encoded = [trainer.encode_sample(s, ckpt.code_vocab, ckpt.summary_vocab)
               for s in samples]
    prepared = model_mod.prepare_samples(net, encoded)
    max_len = args.max_len or ckpt.config.max_summary_len
    rows = []
    for sample, ps in zip(samples, prepared):
        ids = model_mod.generate(net, ps, beam=args.beam, max_len=max_len)
        rows.append({
            "id": sample.id,
            "prediction": " ".join(ckpt.summary_vocab.decode(i) for i in ids),
            "reference": " ".join(tokenize_summary(sample.summary)),
        })
    _write_jsonl(rows, args.out)
    print("wrote %d predictions -> %s" % (len(rows), args.out))
    return EXIT_OK


def cmd_evaluate(args):
    candidates = []
    references = []
    for rec in read_jsonl(args.predictions):
        try:
            candidates.append(rec["prediction"].split())
            references.append(rec["reference"].split())
        except (KeyError, AttributeError) as exc:
            raise DataError("bad prediction record %r" % (rec,)) from exc
    if not candidates:
        raise DataError("no predictions in %s" % args.predictions)
    report = evaluate_pairs(candidates, references)
    print(report.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_match(args):
    with open(args.data, encoding="utf-8") as fh:
        first = fh.read().strip().splitlines()
    if not first:
        raise DataError("%s is empty" % args.data)
    record = json.loads(first[min(args.index, len(first) - 1)])
    ast = validate_ast(ast_from_record(record["ast"]))
    tokens = tokenize_code(record["code"])
    mapping = build_match_map(ast, tokens)
    print(json.dumps(map_to_json(mapping), sort_keys=True))
    return EXIT_OK


def cmd_gradcheck(args):
    results = gradcheck_mod.run_suite(seed=args.seed, max_probes=args.probes)
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print("%-32s max_rel_err %.3e  (%d entries)  %s"
              % (r.name, r.max_rel_err, r.n_checked, status))
        failed = failed or not r.passed
    if failed:
        print("gradient check FAILED (tolerance %.0e)" % gradcheck_mod.GRAD_TOL)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="codesum",
        description="Train and evaluate the multi-modal code summarizer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="validate, split, and vocabularize a dataset")
    p.add_argument("--data", required=True, help="input dataset JSONL")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--valid-frac", type=float, default=0.1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model on a preprocessed directory")
    p.add_argument("--data", required=True, help="preprocess output directory")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--log", help="per-epoch CSV log path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("summarize", help="generate summaries from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="dataset JSONL to summarize")
    p.add_argument("--out", required=True, help="predictions JSONL path")
    p.add_argument("--beam", type=int, default=1, help="beam size (1 = greedy)")
    p.add_argument("--max-len", type=int, default=None)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="score a predictions file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="score report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("match", help="print the leaf/token match map of one sample")
    p.add_argument("--data", required=True, help="JSON record or JSONL file")
    p.add_argument("--index", type=int, default=0, help="line to use in a JSONL file")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("gradcheck", help="run the finite-difference gradient suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probes", type=int, default=8, help="probed entries per parameter")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, AstError, FileNotFoundError, json.JSONDecodeError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return EXIT_DATA
    except CheckpointError as exc:
        print("checkpoint error: %s" % exc, file=sys.stderr)
        return EXIT_CHECKPOINT
    except (DivergenceError, FullyMaskedError, FloatingPointError) as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
