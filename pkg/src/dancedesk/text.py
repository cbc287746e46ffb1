"""Deterministic prompt encoder and the constraint-clause grammar.

The embedding is a hashed bag of unigrams and bigrams. The scheme is a
documented constant so alternate implementations can reproduce it exactly:

* lowercase, strip punctuation, split on whitespace
* for each unigram and each adjacent bigram ("a b"), take the first 8 bytes
  of blake2b(token, digest_size=8) as a big-endian unsigned 64-bit integer h
* bucket = h % 64, sign = +1 if bit 63 of h is 0 else -1
* accumulate signs into the 64 buckets, then L2-normalize
* an empty token list maps to the first basis vector
"""
import hashlib
import re
from dataclasses import dataclass

import numpy as np

from .errors import UnknownBodyPart
from .skeleton import normalize_group_name

EMBED_DIM = 64

_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class PromptEmbedding:
    values: np.ndarray  # (64,), unit L2 norm

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (EMBED_DIM,):
            raise ValueError(f"embedding must have {EMBED_DIM} dimensions")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite embedding")
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError("embedding must be unit length")


def _tokens(text: str) -> list[str]:
    return _PUNCT.sub(" ", text.lower()).split()


def _hash64(token: str) -> int:
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")


def encode(text: str) -> PromptEmbedding:
    """Hash unigrams and bigrams of `text` into a 64-d unit vector."""
    toks = _tokens(text)
    grams = toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]
    if not grams:
        v = np.zeros(EMBED_DIM)
        v[0] = 1.0
        return PromptEmbedding(values=v)
    v = np.zeros(EMBED_DIM)
    for g in grams:
        h = _hash64(g)
        v[h % EMBED_DIM] += 1.0 if h >> 63 == 0 else -1.0
    n = np.linalg.norm(v)
    if n == 0.0:  # all signed counts cancelled; fall back to the canonical vector
        v[0] = 1.0
        n = 1.0
    return PromptEmbedding(values=v / n)


def null_embedding() -> PromptEmbedding:
    """Zero-information embedding used when no prompt is available."""
    return encode("")


_RESTRICT = re.compile(r"^restrict\s+movements?\s+of\s+(.+)$", re.IGNORECASE)


def parse_prompt(text: str) -> tuple[str, list[str]]:
    """Split a prompt into (main_clause, restricted body-part groups).

    Clauses are ";"-separated; a clause "restrict movements of <group>"
    becomes a constraint, everything else joins the main clause.
    """
    main_parts: list[str] = []
    constraints: list[str] = []
    for clause in text.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        m = _RESTRICT.match(clause)
        if m:
            group = m.group(1).strip().rstrip(".")
            try:
                constraints.append(normalize_group_name(group))
            except UnknownBodyPart:
                raise UnknownBodyPart(f"cannot restrict unknown body part: {group!r}")
        else:
            main_parts.append(clause)
    return " ".join(main_parts), constraints
