"""Summary quality metrics: corpus BLEU-4, METEOR, ROUGE-L, and CIDEr.

All functions take pre-tokenized sequences. BLEU/METEOR/ROUGE-L are
reported as percentages in [0, 100]; CIDEr is a real value scaled by
the conventional factor of 10.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

BLEU_EPS = 1e-9


@dataclass
class ScoreReport:
    bleu4: float
    meteor: float
    rouge_l: float
    cider: float

    def to_dict(self):
        return {
            "bleu4": self.bleu4,
            "meteor": self.meteor,
            "rouge_l": self.rouge_l,
            "cider": self.cider,
        }

    def table(self):
        return (
            "metric    score\n"
            "BLEU-4    %6.2f%%\n"
            "METEOR    %6.2f%%\n"
            "ROUGE-L   %6.2f%%\n"
            "CIDEr     %7.3f" % (self.bleu4, self.meteor, self.rouge_l, self.cider)
        )


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidates, references, max_n=4):
    """Corpus BLEU with uniform 1/4 weights and the brevity penalty.

    Modified n-gram precisions are pooled over the whole corpus; a zero
    precision is floored at a small epsilon so the log stays finite.
    """
    if not candidates or len(candidates) != len(references):
        raise ValueError("need equal-length, non-empty candidate/reference lists")
    match = [0] * (max_n + 1)
    total = [0] * (max_n + 1)
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand, ref = list(cand), list(ref)
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            cg = _ngrams(cand, n)
            rg = _ngrams(ref, n)
            total[n] += sum(cg.values())
            match[n] += sum(min(c, rg[g]) for g, c in cg.items())
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        p_n = match[n] / total[n] if total[n] else 0.0
        log_sum += math.log(max(p_n, BLEU_EPS)) / max_n
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * bp * math.exp(log_sum)


def _align_unigrams(candidate, reference):
    """Exact-match alignment, leftmost with chunk-extension preference.

    Each candidate token (left to right) matches the reference position
    right after the previous match when possible, otherwise the
    leftmost unmatched occurrence. Returns (ci, ri) pairs.
    """
    used = set()
    pairs = []
    prev = None  # (ci, ri) of the previous matched candidate token
    for ci, tok in enumerate(candidate):
        choice = None
        if prev is not None and prev[0] == ci - 1:
            nxt = prev[1] + 1
            if nxt < len(reference) and nxt not in used and reference[nxt] == tok:
                choice = nxt
        if choice is None:
            for ri, rt in enumerate(reference):
                if ri not in used and rt == tok:
                    choice = ri
                    break
        if choice is not None:
            pairs.append((ci, choice))
            used.add(choice)
            prev = (ci, choice)
    return pairs


def _count_chunks(pairs):
    chunks = 0
    prev = None
    for ci, ri in pairs:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor(candidate, reference, alpha=0.9, beta=3.0, gamma=0.5):
    """Unigram F-mean discounted by the fragmentation penalty."""
    candidate, reference = list(candidate), list(reference)
    if not candidate or not reference:
        return 0.0
    pairs = _align_unigrams(candidate, reference)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    fmean = precision * recall / (alpha * precision + (1.0 - alpha) * recall)
    frag = _count_chunks(pairs) / m
    return 100.0 * (1.0 - gamma * frag**beta) * fmean


def _lcs_length(a, b):
    m, n = len(a), len(b)
    prev = [0] * (n + 1)
    for i in range(1, m + 1):
        cur = [0] * (n + 1)
        for j in range(1, n + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[n]


def rouge_l(candidate, reference, beta=1.2):
    """LCS-based F-score with recall weighted by beta."""
    candidate, reference = list(candidate), list(reference)
    if not reference:
        raise ValueError("empty reference")
    if not candidate:
        return 0.0
    lcs = _lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    f = (1.0 + beta * beta) * p * r / (r + beta * beta * p)
    return 100.0 * f


def _tfidf_vector(tokens, n, doc_freq, n_docs):
    vec = {}
    for gram, count in _ngrams(list(tokens), n).items():
        idf = math.log(n_docs / max(1.0, doc_freq.get(gram, 0.0)))
        vec[gram] = count * idf
    return vec


def _cosine(u, v):
    dot = sum(val * v[g] for g, val in u.items() if g in v)
    nu = math.sqrt(sum(val * val for val in u.values()))
    nv = math.sqrt(sum(val * val for val in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def cider(candidates, references, max_n=4, scale=10.0):
    """Mean over n of TF-IDF n-gram cosine similarity, scaled by 10.

    IDF is computed from the reference corpus (document frequency =
    number of references containing the n-gram).
    """
    if not candidates or len(candidates) != len(references):
        raise ValueError("need equal-length, non-empty candidate/reference lists")
    n_docs = len(references)
    doc_freq = [None] * (max_n + 1)
    for n in range(1, max_n + 1):
        df = Counter()
        for ref in references:
            for gram in _ngrams(list(ref), n):
                df[gram] += 1
        doc_freq[n] = df
    total = 0.0
    for cand, ref in zip(candidates, references):
        sim_sum = 0.0
        for n in range(1, max_n + 1):
            u = _tfidf_vector(cand, n, doc_freq[n], n_docs)
            v = _tfidf_vector(ref, n, doc_freq[n], n_docs)
            sim_sum += _cosine(u, v)
        total += sim_sum / max_n
    return scale * total / len(candidates)


def evaluate_pairs(candidates, references) -> ScoreReport:
    """Score a whole prediction corpus with all four metrics."""
    return ScoreReport(
        bleu4=bleu4(candidates, references),
        meteor=sum(meteor(c, r) for c, r in zip(candidates, references)) / len(candidates),
        rouge_l=sum(rouge_l(c, r) for c, r in zip(candidates, references)) / len(candidates),
        cider=cider(candidates, references),
    )
