"""Dataset loading, identifier tokenization, vocabularies, and batching.

Code and summary streams are tokenized into lowercase subwords
(camelCase humps and snake_case segments split apart), mapped to ids
through capped frequency vocabularies, and padded into fixed-length
batches with boolean masks.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

# Reserved ids, fixed across every vocabulary.
PAD, SOS, EOS, UNK = 0, 1, 2, 3
RESERVED_TOKENS = ("<PAD>", "<SOS>", "<EOS>", "<UNK>")

_WORD_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class DataError(Exception):
    """Malformed dataset record or schema violation."""


def _split_camel(segment: str) -> list:
    """Split one underscore-free segment at camelCase and digit boundaries.

    A maximal uppercase run stays together except for its last letter when
    a lowercase letter follows ("HTTPServer" -> "HTTP", "Server"); digit
    runs become their own subword.
    """
    parts = []
    start = 0
    n = len(segment)
    for i in range(1, n):
        prev, cur = segment[i - 1], segment[i]
        boundary = prev.isdigit() != cur.isdigit()
        if not boundary and prev.islower() and cur.isupper():
            boundary = True
        if (
            not boundary
            and prev.isupper()
            and cur.isupper()
            and i + 1 < n
            and segment[i + 1].islower()
        ):
            boundary = True
        if boundary:
            parts.append(segment[start:i])
            start = i
    parts.append(segment[start:])
    return parts


def split_identifier(raw: str) -> list:
    """Split a single lexeme into lowercase subwords.

    Identifiers split on underscores, camelCase humps, and letter/digit
    boundaries; punctuation and quoted literals pass through as single
    lowercased tokens. The case-folded concatenation of the output, with
    underscores removed, always equals the case-folded input with
    underscores removed.
    """
    if not raw:
        return []
    if not _WORD_RE.match(raw):
        return [raw.lower()]
    parts = []
    for segment in raw.split("_"):
        if segment:
            parts.extend(_split_camel(segment))
    if not parts:
        # pure-underscore identifiers such as "_" pass through whole
        return [raw.lower()]
    return [p.lower() for p in parts]


def _lex(code: str) -> list:
    """Split raw code into lexemes on whitespace and punctuation.

    Runs of identifier characters form one lexeme, quoted string literals
    (single or double, with backslash escapes) form one lexeme, and every
    other non-space character stands alone.
    """
    out = []
    i, n = 0, len(code)
    while i < n:
        c = code[i]
        if c.isspace():
            i += 1
        elif c in "\"'":
            j = i + 1
            while j < n and code[j] != c:
                j += 2 if code[j] == "\\" else 1
            j = min(j + 1, n)
            out.append(code[i:j])
            i = j
        elif c.isalnum() or c == "_":
            j = i + 1
            while j < n and (code[j].isalnum() or code[j] == "_"):
                j += 1
            out.append(code[i:j])
            i = j
        else:
            out.append(c)
            i += 1
    return out


def tokenize_code(code: str) -> list:
    """Lex code and subword-split every lexeme, preserving source order."""
    tokens = []
    for lexeme in _lex(code):
        tokens.extend(split_identifier(lexeme))
    return tokens


def tokenize_summary(summary: str) -> list:
    """Tokenize a natural-language summary into lowercase subwords."""
    return tokenize_code(summary)


class Vocab:
    """Immutable token<->id mapping with fixed reserved ids.

    Ids 0..3 are always <PAD>, <SOS>, <EOS>, <UNK>; the remaining ids are
    assigned by descending corpus frequency with first-occurrence ties.
    """

    def __init__(self, tokens):
        tokens = list(tokens)
        if tuple(tokens[:4]) != RESERVED_TOKENS:
            raise ValueError("vocab must start with the reserved tokens %r" % (RESERVED_TOKENS,))
        self._tokens = tokens
        self._ids = {t: i for i, t in enumerate(tokens)}
        if len(self._ids) != len(tokens):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self):
        return len(self._tokens)

    def __contains__(self, token):
        return token in self._ids

    def encode(self, token: str) -> int:
        return self._ids.get(token, UNK)

    def decode(self, idx: int) -> str:
        return self._tokens[idx]

    def encode_seq(self, tokens) -> list:
        return [self._ids.get(t, UNK) for t in tokens]

    def decode_seq(self, ids) -> list:
        """Decode ids to tokens, dropping all reserved positions."""
        return [self._tokens[i] for i in ids if i > UNK]

    @property
    def tokens(self):
        return list(self._tokens)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self._tokens, fh, ensure_ascii=False)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))


def build_vocab(corpus, cap: int) -> Vocab:
    """Build a Vocab from token sequences, keeping the `cap` most frequent.

    `cap` bounds the non-reserved entries. Ties are broken by first
    occurrence in the corpus; reserved tokens are always present and
    never counted.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    if cap < 0:
        raise ValueError("cap must be >= 0")
    counts = Counter()
    first_seen = {}
    order = 0
    for seq in corpus:
        for tok in seq:
            counts[tok] += 1
            if tok not in first_seen:
                first_seen[tok] = order
                order += 1
    candidates = [t for t in counts if t not in RESERVED_TOKENS]
    candidates.sort(key=lambda t: (-counts[t], first_seen[t]))
    return Vocab(list(RESERVED_TOKENS) + candidates[:cap])


def encode_summary(tokens, vocab: Vocab, length: int) -> list:
    """Wrap summary tokens in SOS/EOS and pad or truncate to `length`."""
    if length < 2:
        raise ValueError("summary length must be >= 2")
    ids = [SOS] + vocab.encode_seq(tokens) + [EOS]
    ids = ids[:length]
    ids.extend([PAD] * (length - len(ids)))
    return ids


@dataclass
class Sample:
    """One dataset record: raw code, reference summary, and an AST record."""

    id: str
    code: str
    summary: str
    ast: dict


def read_jsonl(path):
    """Yield parsed objects from a JSON Lines file, with line numbers on error."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError("%s:%d: invalid JSON (%s)" % (path, lineno, exc)) from exc


def load_samples(records):
    """Build Samples from raw records, dropping unusable ones.

    Records with empty code or whose summary tokenizes to nothing are
    skipped. Returns (samples, skipped_count).
    """
    samples = []
    skipped = 0
    for rec in records:
        try:
            sample = Sample(
                id=str(rec["id"]),
                code=rec["code"],
                summary=rec["summary"],
                ast=rec["ast"],
            )
        except (KeyError, TypeError) as exc:
            raise DataError("record missing required field: %s" % (exc,)) from exc
        if not sample.code.strip() or not tokenize_summary(sample.summary):
            skipped += 1
            continue
        samples.append(sample)
    return samples, skipped


@dataclass
class EncodedSample:
    """A Sample after tokenization and id encoding (pre-padding)."""

    id: str
    code_tokens: list
    code_ids: list
    ast: "object"  # validated codesum.asts.Ast
    summary_ids: list  # SOS ... EOS, unpadded


@dataclass
class Batch:
    """Fixed-length id matrices plus masks; mask is True at real positions."""

    code_ids: np.ndarray
    code_mask: np.ndarray
    asts: list
    ast_mask: np.ndarray
    summary_ids: np.ndarray
    summary_mask: np.ndarray
    ids: list = field(default_factory=list)


def _pad_row(ids, length):
    row = list(ids[:length])
    n_real = len(row)
    row.extend([PAD] * (length - n_real))
    return row, n_real


def pad_batch(samples, l_code: int, l_ast: int, l_sum: int) -> Batch:
    """Pad or truncate every stream of a list of EncodedSamples."""
    if not samples:
        raise ValueError("empty batch")
    if min(l_code, l_ast, l_sum) <= 0:
        raise ValueError("padding lengths must be positive")
    b = len(samples)
    code = np.zeros((b, l_code), dtype=np.int64)
    code_mask = np.zeros((b, l_code), dtype=bool)
    ast_mask = np.zeros((b, l_ast), dtype=bool)
    summ = np.zeros((b, l_sum), dtype=np.int64)
    summ_mask = np.zeros((b, l_sum), dtype=bool)
    for i, s in enumerate(samples):
        row, n = _pad_row(s.code_ids, l_code)
        code[i] = row
        code_mask[i, :n] = True
        row, n = _pad_row(s.summary_ids, l_sum)
        summ[i] = row
        summ_mask[i, :n] = True
        ast_mask[i, : min(len(s.ast.nodes), l_ast)] = True
    return Batch(
        code_ids=code,
        code_mask=code_mask,
        asts=[s.ast for s in samples],
        ast_mask=ast_mask,
        summary_ids=summ,
        summary_mask=summ_mask,
        ids=[s.id for s in samples],
    )
