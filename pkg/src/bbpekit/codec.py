"""Encode text to symbol ids under a vocabulary; decode ids back to text.

Whitespace runs delimit segments. The encoder records segment boundaries
so its output decodes back with single spaces reinserted; id streams from
anywhere else (a model, a file) carry no boundaries and decode by plain
concatenation. Decoding always finishes with UTF-8 repair, since
byte-level ids can spell invalid sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bytecore import RepairResult, repair_utf8
from .errors import DecodeError, OovError
from .vocab import BYTE_MODES, Vocabulary

_ENCODE_CACHE_LIMIT = 1 << 18


@dataclass(frozen=True)
class TokenSeq:
    """Symbol ids bound to a vocabulary fingerprint.

    ``segment_lengths`` (ids per whitespace-delimited segment) is present
    only on encoder output and enables exact space reinsertion.
    """

    ids: tuple[int, ...]
    vocab_fingerprint: str | None = None
    n_specials: int = 0
    segment_lengths: tuple[int, ...] | None = None

    @classmethod
    def from_ids(cls, ids, v: Vocabulary) -> "TokenSeq":
        return cls(
            ids=tuple(ids),
            vocab_fingerprint=v.fingerprint,
            n_specials=v.n_specials,
        )


def _encode_token(token: str, v: Vocabulary) -> tuple[int, ...]:
    cached = v._encode_cache.get(token)
    if cached is not None:
        return cached

    if v.mode in BYTE_MODES:
        symbols = [bytes([b]) for b in token.encode("utf-8")]
    else:
        symbols = []
        for ch in token:
            data = ch.encode("utf-8")
            if v.id_for_bytes(data) is None:
                raise OovError(
                    f"character {ch!r} (U+{ord(ch):04X}) is not in the vocabulary"
                )
            symbols.append(data)

    # Applying rules in rank order equals repeatedly applying the
    # lowest-ranked pair present: a merge can only create pairs whose
    # rules were learned later (duplicate result byte strings are
    # excluded by the vocabulary invariants).
    ranks = v._pair_ranks
    while len(symbols) > 1:
        best_rank = None
        for pair in zip(symbols, symbols[1:]):
            r = ranks.get(pair)
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
        if best_rank is None:
            break
        rule = v.merges[best_rank]
        left, right, merged = rule.left.bytes, rule.right.bytes, rule.result.bytes
        out = []
        i = 0
        n = len(symbols)
        while i < n:
            if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out

    ids = tuple(v.id_for_bytes(s) for s in symbols)
    if len(v._encode_cache) >= _ENCODE_CACHE_LIMIT:
        v._encode_cache.clear()
    v._encode_cache[token] = ids
    return ids


def encode(text: str, v: Vocabulary) -> TokenSeq:
    """Tokenize ``text`` deterministically under ``v``.

    Byte-level modes never fail; character modes raise OovError on a
    character outside the closed set.
    """
    ids: list[int] = []
    seg_lengths: list[int] = []
    for token in text.split():
        token_ids = _encode_token(token, v)
        ids.extend(token_ids)
        seg_lengths.append(len(token_ids))
    return TokenSeq(
        ids=tuple(ids),
        vocab_fingerprint=v.fingerprint,
        n_specials=v.n_specials,
        segment_lengths=tuple(seg_lengths),
    )


def decode(t: TokenSeq, v: Vocabulary) -> tuple[str, RepairResult]:
    """Map ids back to bytes, repair to valid UTF-8, return both.

    Special-token ids are stripped before concatenation. With recorded
    segment boundaries, segments are joined by single spaces; otherwise
    the byte strings are concatenated as-is.
    """
    if (
        t.vocab_fingerprint is not None
        and t.vocab_fingerprint != v.fingerprint
    ):
        raise DecodeError("token sequence is bound to a different vocabulary")

    def symbol_bytes(sym_id):
        sym = v.symbol_for_id(sym_id)
        if sym is None:
            if 0 <= sym_id < v.n_specials:
                return None  # special token: stripped
            raise DecodeError(f"unknown symbol id {sym_id}")
        return sym.bytes

    if t.segment_lengths is not None:
        if sum(t.segment_lengths) != len(t.ids):
            raise DecodeError("segment lengths do not cover the id sequence")
        parts = []
        pos = 0
        for length in t.segment_lengths:
            chunk = [
                b
                for b in (symbol_bytes(i) for i in t.ids[pos : pos + length])
                if b is not None
            ]
            parts.append(b"".join(chunk))
            pos += length
        data = b" ".join(parts)
    else:
        data = b"".join(
            b for b in (symbol_bytes(i) for i in t.ids) if b is not None
        )

    repair = repair_utf8(data)
    return repair.text, repair


def seq_length(t: TokenSeq) -> int:
    """Number of non-special ids; the paper-style hypothesis length."""
    n = t.n_specials
    return sum(1 for i in t.ids if i >= n)
