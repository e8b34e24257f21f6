"""Okapi BM25 retrieval baseline over code tokens.

Documents are training posts indexed by their code content; a query is
a code token sequence and the payload returned is the matching posts'
titles, so retrieved titles can be evaluated exactly like generated
ones.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


class BM25Index:
    """Inverted index with Lucene-style IDF and k1/b saturation.

    score(D, Q) = sum over q in Q of
        IDF(q) * f(q,D) * (k1+1) / (f(q,D) + k1*(1 - b + b*|D|/avgdl))
    with IDF(q) = ln(1 + (N - n_q + 0.5) / (n_q + 0.5)).
    """

    def __init__(
        self,
        doc_ids: list[int],
        titles: list[str],
        doc_lens: list[int],
        postings: dict[str, list[tuple[int, int]]],
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ):
        if not doc_ids:
            raise ValueError("empty corpus")
        if not (len(doc_ids) == len(titles) == len(doc_lens)):
            raise ValueError("doc_ids, titles, doc_lens must align")
        self.doc_ids = doc_ids
        self.titles = titles
        self.doc_lens = doc_lens
        self.postings = postings
        self.k1 = k1
        self.b = b
        self.num_docs = len(doc_ids)
        self.avgdl = sum(doc_lens) / len(doc_lens)

    def doc_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        n_q = self.doc_frequency(term)
        return math.log(1.0 + (self.num_docs - n_q + 0.5) / (n_q + 0.5))

    def save(self, path: str | Path) -> None:
        payload = {
            "format": "titlegen-bm25-index",
            "k1": self.k1,
            "b": self.b,
            "doc_ids": self.doc_ids,
            "titles": self.titles,
            "doc_lens": self.doc_lens,
            "postings": {
                term: [[d, f] for d, f in plist]
                for term, plist in sorted(self.postings.items())
            },
        }
        Path(path).write_text(
            json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "BM25Index":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != "titlegen-bm25-index":
            raise ValueError(f"not an index file: {path}")
        return cls(
            doc_ids=payload["doc_ids"],
            titles=payload["titles"],
            doc_lens=payload["doc_lens"],
            postings={
                term: [(int(d), int(f)) for d, f in plist]
                for term, plist in payload["postings"].items()
            },
            k1=payload["k1"],
            b=payload["b"],
        )


def build_index(
    docs: Sequence[tuple[int, Sequence[str], str]],
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> BM25Index:
    """Index (id, code tokens, title) documents by their code tokens."""
    if not docs:
        raise ValueError("empty corpus")
    doc_ids: list[int] = []
    titles: list[str] = []
    doc_lens: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for pos, (doc_id, tokens, title) in enumerate(docs):
        doc_ids.append(doc_id)
        titles.append(title)
        doc_lens.append(len(tokens))
        tf: dict[str, int] = {}
        for t in tokens:
            tf[t] = tf.get(t, 0) + 1
        for term, f in tf.items():
            postings.setdefault(term, []).append((pos, f))
    return BM25Index(doc_ids, titles, doc_lens, postings, k1=k1, b=b)


def query(index: BM25Index, code: Sequence[str], k: int) -> list[tuple[str, float]]:
    """Top-k (title, score) by BM25, descending score.

    Query terms contribute per occurrence. Ties break by ascending
    document id; only positive-scoring documents are returned, so the
    list may be shorter than k.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores: dict[int, float] = {}
    for term in code:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for pos, f in plist:
            norm = f + index.k1 * (1.0 - index.b + index.b * index.doc_lens[pos] / index.avgdl)
            scores[pos] = scores.get(pos, 0.0) + idf * f * (index.k1 + 1.0) / norm
    hits = [(pos, s) for pos, s in scores.items() if s > 0.0]
    hits.sort(key=lambda h: (-h[1], index.doc_ids[h[0]]))
    return [(index.titles[pos], s) for pos, s in hits[:k]]
