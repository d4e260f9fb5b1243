"""Vocabulary model: special tokens, base symbols, merge rules.

Symbols store raw bytes, never decoded strings, because byte-level BPE
symbols may be invalid UTF-8 fragments. The file format is line-oriented
text with hex-encoded byte strings so vocabulary files stay valid UTF-8
and diff-friendly.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass

from . import bytecore
from .errors import (
    ConfigError,
    CorruptVocabError,
    IncompatibleVocabError,
    VersionError,
)

MODES = ("character", "bpe", "byte", "bbpe")
BYTE_MODES = ("byte", "bbpe")
CHAR_MODES = ("character", "bpe")
MERGE_MODES = ("bpe", "bbpe")
DEFAULT_SPECIALS = ("BOS", "EOS", "PAD", "UNK", "SEP", "MASK")

_MAGIC = "bbpekit-vocab"
_VERSION = "v1"
_BYTE_SYMBOLS = tuple(bytes([i]) for i in range(256))


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class PenaltyConfig:
    """Bigram count adjustment factors: length penalty strength ``alpha``
    above byte-length cutoff ``cutoff_n``, alphabet penalty strength
    ``beta`` for all-letter bigrams."""

    alpha: float = 0.99
    cutoff_n: int = 3
    beta: float = 0.999

    def __post_init__(self):
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= float(self.beta) <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if int(self.cutoff_n) < 1:
            raise ConfigError(f"cutoff_n must be >= 1, got {self.cutoff_n}")


@dataclass(frozen=True)
class Symbol:
    """One vocabulary unit: an immutable byte string plus its id."""

    bytes: bytes
    id: int

    @property
    def byte_len(self) -> int:
        return len(self.bytes)

    @property
    def is_alphabetic(self) -> bool:
        return bytecore.symbol_is_alphabetic(self.bytes)

    @property
    def char_count(self) -> int | None:
        """Character count, or None when the bytes are not valid UTF-8."""
        if not bytecore.is_valid_utf8(self.bytes):
            return None
        return len(self.bytes.decode("utf-8"))


@dataclass(frozen=True)
class MergeRule:
    left: Symbol
    right: Symbol
    result: Symbol
    rank: int
    raw_count: int
    adjusted_count: float


class Vocabulary:
    """Immutable trained vocabulary.

    Ids are assigned by a fixed law: special tokens first, then base
    symbols in order, then merge results in rank order. Constructing a
    vocabulary validates every invariant; violations raise
    CorruptVocabError naming the failing one.
    """

    def __init__(
        self,
        mode: str,
        special_tokens=DEFAULT_SPECIALS,
        base_symbols=(),
        merges=(),
        penalty_config: PenaltyConfig | None = None,
        provenance: dict | None = None,
    ):
        """``base_symbols`` is a sequence of byte strings; ``merges`` a
        sequence of (left_bytes, right_bytes, raw_count, adjusted_count)
        in rank order."""
        if mode not in MODES:
            raise CorruptVocabError(f"unknown mode {mode!r}")
        specials = tuple(special_tokens)
        for name in specials:
            if not name or any(c.isspace() for c in name) or ":" in name:
                raise CorruptVocabError(f"bad special token name {name!r}")
        if len(set(specials)) != len(specials):
            raise CorruptVocabError("duplicate special token names")

        base = tuple(bytes(b) for b in base_symbols)
        if mode in BYTE_MODES and base != _BYTE_SYMBOLS:
            raise CorruptVocabError(
                "byte-level modes require exactly the 256 single-byte symbols"
            )
        for b in base:
            if not b:
                raise CorruptVocabError("empty base symbol")
            if mode in CHAR_MODES:
                if not bytecore.is_valid_utf8(b) or len(b.decode("utf-8")) != 1:
                    raise CorruptVocabError(
                        f"character-mode base symbol {b.hex()} is not a single character"
                    )

        self.mode = mode
        self.special_tokens = specials
        self.penalty_config = penalty_config
        self.provenance = dict(provenance or {})

        n_special = len(specials)
        self.base_symbols = tuple(
            Symbol(bytes=b, id=n_special + i) for i, b in enumerate(base)
        )
        seen = {}
        for sym in self.base_symbols:
            if sym.bytes in seen:
                raise CorruptVocabError(
                    f"duplicate symbol byte string {sym.bytes.hex()}"
                )
            seen[sym.bytes] = sym

        rules = []
        next_id = n_special + len(base)
        for rank, (left_b, right_b, raw, adjusted) in enumerate(merges):
            left = seen.get(bytes(left_b))
            right = seen.get(bytes(right_b))
            if left is None or right is None:
                raise CorruptVocabError(
                    f"merge {rank} refers to an unknown symbol"
                )
            result_bytes = left.bytes + right.bytes
            if result_bytes in seen:
                raise CorruptVocabError(
                    f"duplicate symbol byte string {result_bytes.hex()}"
                )
            raw = int(raw)
            adjusted = float(adjusted)
            if raw < 0 or adjusted < 0:
                raise CorruptVocabError(f"negative count in merge {rank}")
            if adjusted > raw:
                raise CorruptVocabError(
                    f"merge {rank} adjusted_count exceeds raw_count"
                )
            result = Symbol(bytes=result_bytes, id=next_id)
            seen[result_bytes] = result
            rules.append(
                MergeRule(
                    left=left,
                    right=right,
                    result=result,
                    rank=rank,
                    raw_count=raw,
                    adjusted_count=adjusted,
                )
            )
            next_id += 1
        self.merges = tuple(rules)

        self._by_bytes = seen
        self._by_id = {s.id: s for s in self.symbols()}
        self._pair_ranks = {
            (r.left.bytes, r.right.bytes): r.rank for r in self.merges
        }
        self._fingerprint = None
        self._encode_cache = {}

    # -- queries ---------------------------------------------------------

    def symbols(self):
        """Non-special symbols: base symbols then merge results."""
        return list(self.base_symbols) + [r.result for r in self.merges]

    def symbol_bytes_set(self) -> set[bytes]:
        return set(self._by_bytes)

    @property
    def n_specials(self) -> int:
        return len(self.special_tokens)

    @property
    def size(self) -> int:
        """Total symbol count including special tokens."""
        return len(self.special_tokens) + len(self.base_symbols) + len(self.merges)

    def symbol_for_id(self, sym_id: int) -> Symbol | None:
        return self._by_id.get(sym_id)

    def id_for_bytes(self, data: bytes) -> int | None:
        sym = self._by_bytes.get(data)
        return None if sym is None else sym.id

    @property
    def fingerprint(self) -> str:
        if self._fingerprint is None:
            digest = hashlib.sha256(serialize(self).encode("utf-8"))
            self._fingerprint = digest.hexdigest()[:16]
        return self._fingerprint

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        # provenance is non-semantic metadata and excluded on purpose
        return (
            self.mode == other.mode
            and self.special_tokens == other.special_tokens
            and self.base_symbols == other.base_symbols
            and self.merges == other.merges
            and self.penalty_config == other.penalty_config
        )

    def __repr__(self):
        return (
            f"Vocabulary(mode={self.mode!r}, size={self.size}, "
            f"merges={len(self.merges)})"
        )


# -- serialization --------------------------------------------------------


def serialize(v: Vocabulary) -> str:
    lines = [f"{_MAGIC} {_VERSION} mode={v.mode}"]
    specials = " ".join(f"{name}:{i}" for i, name in enumerate(v.special_tokens))
    lines.append(f"specials {specials}".rstrip())
    pc = v.penalty_config
    if pc is None:
        lines.append("penalty none")
    else:
        lines.append(
            f"penalty alpha={_fmt_float(pc.alpha)} n={pc.cutoff_n} "
            f"beta={_fmt_float(pc.beta)}"
        )
    for sym in v.base_symbols:
        lines.append(f"S {sym.bytes.hex()} {sym.id}")
    for r in v.merges:
        lines.append(
            f"M {r.rank} {r.left.bytes.hex()} {r.right.bytes.hex()} "
            f"{r.raw_count} {_fmt_float(r.adjusted_count)}"
        )
    return "\n".join(lines) + "\n"


def save(v: Vocabulary, destination) -> None:
    """Write the versioned format; byte-identical for equal vocabularies."""
    text = serialize(v)
    if isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        return
    if isinstance(destination, io.TextIOBase):
        destination.write(text)
    else:
        destination.write(text.encode("utf-8"))


def _parse_specials(line: str) -> tuple[str, ...]:
    parts = line.split()
    if not parts or parts[0] != "specials":
        raise CorruptVocabError("missing specials line")
    names = []
    for i, item in enumerate(parts[1:]):
        name, sep, idx = item.partition(":")
        if not sep or not idx.isdigit() or int(idx) != i:
            raise CorruptVocabError(f"bad specials entry {item!r}")
        names.append(name)
    return tuple(names)


def _parse_penalty(line: str) -> PenaltyConfig | None:
    parts = line.split()
    if not parts or parts[0] != "penalty":
        raise CorruptVocabError("missing penalty line")
    if parts[1:] == ["none"]:
        return None
    fields = dict(p.partition("=")[::2] for p in parts[1:])
    try:
        return PenaltyConfig(
            alpha=float(fields["alpha"]),
            cutoff_n=int(fields["n"]),
            beta=float(fields["beta"]),
        )
    except (KeyError, ValueError) as exc:
        raise CorruptVocabError(f"bad penalty line: {exc}") from exc


def load(source) -> Vocabulary:
    """Parse the versioned format, validating every invariant."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8", newline="") as f:
            content = f.read()
    else:
        content = source.read()
        if isinstance(content, bytes):
            content = content.decode("utf-8")
    lines = content.splitlines()
    if not lines:
        raise CorruptVocabError("empty vocabulary file")

    head = lines[0].split()
    if len(head) != 3 or head[0] != _MAGIC or not head[2].startswith("mode="):
        raise CorruptVocabError("malformed header line")
    if head[1] != _VERSION:
        raise VersionError(
            f"unsupported vocabulary format version {head[1]!r} (expected {_VERSION})"
        )
    mode = head[2].removeprefix("mode=")
    if len(lines) < 3:
        raise CorruptVocabError("truncated vocabulary file")
    specials = _parse_specials(lines[1])
    penalty = _parse_penalty(lines[2])

    base, merges = [], []
    next_id = len(specials)
    for ln in lines[3:]:
        if not ln.strip():
            continue
        parts = ln.split()
        if parts[0] == "S":
            if merges:
                raise CorruptVocabError("base symbol after merge lines")
            if len(parts) != 3:
                raise CorruptVocabError(f"malformed base symbol line {ln!r}")
            try:
                data = bytes.fromhex(parts[1])
            except ValueError:
                raise CorruptVocabError(f"bad hex in line {ln!r}") from None
            if int(parts[2]) != next_id:
                raise CorruptVocabError(
                    f"symbol id {parts[2]} breaks the id ordering law"
                )
            base.append(data)
            next_id += 1
        elif parts[0] == "M":
            if len(parts) != 6:
                raise CorruptVocabError(f"malformed merge line {ln!r}")
            try:
                rank = int(parts[1])
                left = bytes.fromhex(parts[2])
                right = bytes.fromhex(parts[3])
                raw = int(parts[4])
                adjusted = float(parts[5])
            except ValueError:
                raise CorruptVocabError(f"bad merge line {ln!r}") from None
            if rank != len(merges):
                raise CorruptVocabError(f"merge rank {rank} is not dense")
            merges.append((left, right, raw, adjusted))
        else:
            raise CorruptVocabError(f"unknown record type in line {ln!r}")

    return Vocabulary(
        mode=mode,
        special_tokens=specials,
        base_symbols=base,
        merges=merges,
        penalty_config=penalty,
    )


# -- analysis -------------------------------------------------------------


@dataclass(frozen=True)
class CompositionStats:
    """Breakdown of non-special symbols by what their bytes spell."""

    single_byte: int
    cjk_single_char: int
    cjk_multi_char: int
    alpha_multibyte: int
    invalid_utf8: int
    other: int

    @property
    def total(self) -> int:
        return (
            self.single_byte
            + self.cjk_single_char
            + self.cjk_multi_char
            + self.alpha_multibyte
            + self.invalid_utf8
            + self.other
        )

    def fractions(self) -> dict[str, float]:
        total = self.total
        counts = self.counts()
        if total == 0:
            return {k: 0.0 for k in counts}
        return {k: c / total for k, c in counts.items()}

    def counts(self) -> dict[str, int]:
        return {
            "single_byte": self.single_byte,
            "cjk_single_char": self.cjk_single_char,
            "cjk_multi_char": self.cjk_multi_char,
            "alpha_multibyte": self.alpha_multibyte,
            "invalid_utf8": self.invalid_utf8,
            "other": self.other,
        }


def classify_symbol_bytes(data: bytes) -> str:
    if len(data) == 1:
        return "single_byte"
    if not bytecore.is_valid_utf8(data):
        return "invalid_utf8"
    text = data.decode("utf-8")
    if all(bytecore.is_han_char(c) for c in text):
        return "cjk_single_char" if len(text) == 1 else "cjk_multi_char"
    if bytecore.symbol_is_alphabetic(data):
        return "alpha_multibyte"
    return "other"


def composition_report(v: Vocabulary) -> CompositionStats:
    counts = dict.fromkeys(
        (
            "single_byte",
            "cjk_single_char",
            "cjk_multi_char",
            "alpha_multibyte",
            "invalid_utf8",
            "other",
        ),
        0,
    )
    for sym in v.symbols():
        counts[classify_symbol_bytes(sym.bytes)] += 1
    return CompositionStats(**counts)


# -- combination ----------------------------------------------------------


def union(a: Vocabulary, b: Vocabulary) -> Vocabulary:
    """Combine two vocabularies sharing the same special-token list.

    Symbol byte strings are set-unioned; merges concatenate a-then-b with
    re-ranked indices, dropping b merges whose result already exists.
    Mixing a byte-level and a character-level vocabulary is rejected: the
    byte modes pin base symbols to exactly the 256 single bytes.
    """
    if a.special_tokens != b.special_tokens:
        raise IncompatibleVocabError("special-token lists differ")
    if a.mode == b.mode:
        mode = a.mode
    elif {a.mode, b.mode} <= set(CHAR_MODES):
        mode = "bpe"
    elif {a.mode, b.mode} <= set(BYTE_MODES):
        mode = "bbpe"
    else:
        raise IncompatibleVocabError(
            f"cannot union {a.mode} with {b.mode} vocabularies"
        )

    base = [s.bytes for s in a.base_symbols]
    base_set = set(base)
    for s in b.base_symbols:
        if s.bytes not in base_set:
            base.append(s.bytes)
            base_set.add(s.bytes)

    merges = []
    present = set(base_set)
    for rule in list(a.merges) + list(b.merges):
        result = rule.left.bytes + rule.right.bytes
        if result in present:
            continue
        present.add(result)
        merges.append(
            (rule.left.bytes, rule.right.bytes, rule.raw_count, rule.adjusted_count)
        )

    config = a.penalty_config if a.penalty_config == b.penalty_config else None
    return Vocabulary(
        mode=mode,
        special_tokens=a.special_tokens,
        base_symbols=base,
        merges=merges,
        penalty_config=config,
        provenance={"union_of": f"{a.fingerprint},{b.fingerprint}"},
    )
