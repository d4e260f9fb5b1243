"""BPE/BBPE vocabulary training.

Corpus ingestion aggregates whitespace-delimited segments into a count
table; the merge loop repeatedly picks the adjacent symbol pair with the
highest penalty-adjusted count and rewrites segments greedily left to
right. Adjusted counts are exact rationals (``fractions.Fraction`` built
from the decimal string of the factors), so comparisons never suffer
float noise; ties fall back to higher raw count, then the
lexicographically smaller (left, right) byte pair.

Pair counting is non-overlapping: a run of k equal symbols contributes
floor(k/2) occurrences of its self-pair, exactly what the greedy merge
applier can consume.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import bytecore
from .errors import ConfigError, IngestError
from .vocab import (
    BYTE_MODES,
    DEFAULT_SPECIALS,
    MERGE_MODES,
    MODES,
    PenaltyConfig,
    Vocabulary,
)

_BYTE_SYMBOLS = tuple(bytes([i]) for i in range(256))
_PARALLEL_MIN_LINES = 2000


@dataclass
class SegmentTable:
    """Aggregated corpus statistics: segment symbol tuples to counts.

    Every entry comes from one ingest call, so the table-level
    ``language_tag`` is the tag of each entry's source.
    """

    mode: str
    entries: dict[tuple[bytes, ...], int] = field(default_factory=dict)
    language_tag: str | None = None

    @property
    def total_tokens(self) -> int:
        return sum(self.entries.values())


@dataclass(frozen=True)
class BigramStat:
    left: bytes
    right: bytes
    raw_count: int
    merged_len: int
    adjusted_count: Fraction

    @property
    def is_alphabetic(self) -> bool:
        return bytecore.symbol_is_alphabetic(self.left + self.right)


# -- ingestion -------------------------------------------------------------


def _count_lines(lines, start_lineno):
    counts = {}
    for offset, line in enumerate(lines):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                return counts, start_lineno + offset, str(exc)
        for token in line.split():
            counts[token] = counts.get(token, 0) + 1
    return counts, None, None


def _token_symbols(token: str, mode: str) -> tuple[bytes, ...]:
    if mode in BYTE_MODES:
        data = token.encode("utf-8")
        return tuple(_BYTE_SYMBOLS[b] for b in data)
    return tuple(c.encode("utf-8") for c in token)


def ingest(source, mode: str, language_tag: str | None = None,
           threads: int | None = None) -> SegmentTable:
    """Aggregate a corpus (iterable of str/bytes lines, or an open file)
    into a SegmentTable.

    Lines are split on whitespace runs; each token becomes its UTF-8 byte
    symbols in byte/bbpe modes or its character symbols otherwise. A line
    that is not valid UTF-8 raises IngestError naming the 1-based line
    number. ``threads`` > 1 shards the counting across processes; the
    ordered reduction keeps results identical to a serial run.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    lines = list(source)

    if threads and threads > 1 and len(lines) >= max(threads, _PARALLEL_MIN_LINES):
        chunk = (len(lines) + threads - 1) // threads
        jobs = [
            (lines[i : i + chunk], i + 1) for i in range(0, len(lines), chunk)
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_count_lines, *zip(*jobs)))
        token_counts: dict[str, int] = {}
        first_error = None
        for counts, err_line, err_msg in results:
            for tok, c in counts.items():
                token_counts[tok] = token_counts.get(tok, 0) + c
            if err_line is not None and (
                first_error is None or err_line < first_error[0]
            ):
                first_error = (err_line, err_msg)
        if first_error is not None:
            raise IngestError(
                f"line {first_error[0]}: invalid UTF-8 ({first_error[1]})",
                line_number=first_error[0],
            )
    else:
        token_counts, err_line, err_msg = _count_lines(lines, 1)
        if err_line is not None:
            raise IngestError(
                f"line {err_line}: invalid UTF-8 ({err_msg})",
                line_number=err_line,
            )

    entries = {}
    for token, count in token_counts.items():
        entries[_token_symbols(token, mode)] = count
    return SegmentTable(mode=mode, entries=entries, language_tag=language_tag)


# -- penalties ---------------------------------------------------------------


def length_penalty(count, merged_len: int, alpha, cutoff_n: int) -> Fraction:
    """Count kept as-is up to ``cutoff_n`` bytes, scaled by (1 - alpha)
    beyond it. Exact rational arithmetic."""
    if merged_len <= cutoff_n:
        return Fraction(count)
    return (1 - Fraction(str(alpha))) * count


def alphabet_penalty(length_penalized, is_alphabetic: bool, beta) -> Fraction:
    """Scale an all-letter bigram's count by (1 - beta)."""
    if not is_alphabetic:
        return Fraction(length_penalized)
    return (1 - Fraction(str(beta))) * length_penalized


def _pair_multiplier(merged: bytes, config: PenaltyConfig | None) -> Fraction:
    if config is None:
        return Fraction(1)
    m = Fraction(1)
    if len(merged) > config.cutoff_n:
        m *= 1 - Fraction(str(config.alpha))
    if bytecore.symbol_is_alphabetic(merged):
        m *= 1 - Fraction(str(config.beta))
    return m


# -- bigram statistics -------------------------------------------------------


def _iter_pairs(seg):
    """Adjacent pairs as the greedy left-to-right merge applier would
    consume them: a run of equal symbols yields floor(run/2) self-pairs."""
    run_start = 0
    for i in range(len(seg) - 1):
        if i > 0 and seg[i] != seg[i - 1]:
            run_start = i
        a, b = seg[i], seg[i + 1]
        if a != b or (i - run_start) % 2 == 0:
            yield a, b


def _apply_merge(seg, left, right, merged):
    out = []
    i = 0
    n = len(seg)
    while i < n:
        if i < n - 1 and seg[i] == left and seg[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(seg[i])
            i += 1
    return out


def count_bigrams(
    table: SegmentTable,
    penalties: PenaltyConfig | None = None,
    scope: set[str] | None = None,
) -> list[BigramStat]:
    """Raw and penalty-adjusted counts for every adjacent pair.

    ``scope`` limits penalty application to tables whose language tag is
    in the set; None means penalties apply to everything.
    """
    in_scope = scope is None or table.language_tag in scope
    config = penalties if in_scope else None
    raw: Counter = Counter()
    for seg, count in table.entries.items():
        for pair in _iter_pairs(seg):
            raw[pair] += count
    stats = []
    for (left, right), count in sorted(raw.items()):
        merged = left + right
        stats.append(
            BigramStat(
                left=left,
                right=right,
                raw_count=count,
                merged_len=len(merged),
                adjusted_count=count * _pair_multiplier(merged, config),
            )
        )
    return stats


# -- training ----------------------------------------------------------------


def _base_symbols_for(mode: str, tables) -> list[bytes]:
    if mode in BYTE_MODES:
        return list(_BYTE_SYMBOLS)
    chars = set()
    for table in tables:
        for seg in table.entries:
            chars.update(seg)
    return sorted(chars)


def _select_best(pair_counts, pair_meta, symbol_set, group_configs):
    """Maximal (adjusted, raw, lexicographically smaller pair).

    Adjusted counts are exact rationals kept as integer num/den pairs so
    the hot loop never builds Fraction objects; cross-multiplication
    compares them without rounding.
    """
    best = None  # (num, den, raw, pair)
    for pair, counts in pair_counts.items():
        raw = sum(counts)
        if raw <= 0:
            continue
        meta = pair_meta.get(pair)
        if meta is None:
            merged = pair[0] + pair[1]
            factors = tuple(
                (f.numerator, f.denominator)
                for f in (
                    _pair_multiplier(merged, cfg) for cfg in group_configs
                )
            )
            if all(num == den for num, den in factors):
                factors = None
            meta = (merged, factors)
            pair_meta[pair] = meta
        merged, factors = meta
        if merged in symbol_set:
            # merging would duplicate an existing symbol's byte string
            continue
        if factors is None:
            num, den = raw, 1
        else:
            num, den = 0, 1
            for c, (fn, fd) in zip(counts, factors):
                if c:
                    num = num * fd + c * fn * den
                    den *= fd
        if best is None:
            best = (num, den, raw, pair)
            continue
        lhs = num * best[1]
        rhs = best[0] * den
        if lhs > rhs or (
            lhs == rhs
            and (raw > best[2] or (raw == best[2] and pair < best[3]))
        ):
            best = (num, den, raw, pair)
    if best is None:
        return None
    return (Fraction(best[0], best[1]), best[2], best[3])


def _train_core(groups, target_size, specials, log=None, provenance=None):
    """Run the merge loop over (SegmentTable, PenaltyConfig|None) groups."""
    if not groups:
        raise ConfigError("no segment tables to train on")
    mode = groups[0][0].mode
    if any(t.mode != mode for t, _ in groups):
        raise ConfigError("all segment tables must share one mode")
    tables = [t for t, _ in groups]
    group_configs = [cfg for _, cfg in groups]
    base = _base_symbols_for(mode, tables)
    floor = len(specials) + len(base)
    if target_size < floor:
        raise ConfigError(
            f"target_size {target_size} is below specials+base = {floor}"
        )
    max_merges = target_size - floor if mode in MERGE_MODES else 0

    n_groups = len(groups)
    entries = []  # [symbols list, count, group index]
    pair_counts: dict[tuple[bytes, bytes], list[int]] = {}
    pair_entries: dict[tuple[bytes, bytes], set[int]] = {}
    if max_merges > 0:
        for g, table in enumerate(tables):
            for seg, count in table.entries.items():
                entries.append([list(seg), count, g])
        for e, (syms, count, g) in enumerate(entries):
            for pair in _iter_pairs(syms):
                counts = pair_counts.get(pair)
                if counts is None:
                    counts = [0] * n_groups
                    pair_counts[pair] = counts
                    pair_entries[pair] = set()
                counts[g] += count
                pair_entries[pair].add(e)

    symbol_set = set(base)
    pair_meta: dict = {}
    merges = []
    while len(merges) < max_merges and pair_counts:
        best = _select_best(pair_counts, pair_meta, symbol_set, group_configs)
        if best is None or best[0] < 1:
            break
        adjusted, raw, pair = best
        left, right = pair
        merged = left + right
        symbol_set.add(merged)
        merges.append((left, right, raw, float(adjusted)))
        if log is not None:
            log.write(
                f"{len(merges) - 1}\t{left.hex()}\t{right.hex()}\t{raw}\t"
                f"{format(float(adjusted), '.17g')}\n"
            )

        dirty = set()
        for e in pair_entries.get(pair, ()):
            syms, count, g = entries[e]
            old = Counter(_iter_pairs(syms))
            new_syms = _apply_merge(syms, left, right, merged)
            new = Counter(_iter_pairs(new_syms))
            entries[e][0] = new_syms
            for pr in old.keys() | new.keys():
                delta = new.get(pr, 0) - old.get(pr, 0)
                if delta:
                    counts = pair_counts.get(pr)
                    if counts is None:
                        counts = [0] * n_groups
                        pair_counts[pr] = counts
                        pair_entries[pr] = set()
                    counts[g] += delta * count
                if pr == pair:
                    continue
                if new.get(pr, 0) == 0:
                    members = pair_entries.get(pr)
                    if members is not None:
                        members.discard(e)
                elif old.get(pr, 0) == 0:
                    pair_entries[pr].add(e)
                dirty.add(pr)
        pair_counts.pop(pair, None)
        pair_entries.pop(pair, None)
        pair_meta.pop(pair, None)
        for pr in dirty:
            counts = pair_counts.get(pr)
            if counts is not None and not any(counts):
                del pair_counts[pr]
                pair_entries.pop(pr, None)
                pair_meta.pop(pr, None)

    distinct = [cfg for cfg in group_configs if cfg is not None]
    penalty_config = distinct[0] if len(set(distinct)) == 1 else None
    info = {
        "segments": str(sum(len(t.entries) for t in tables)),
        "tokens": str(sum(t.total_tokens for t in tables)),
        "target_size": str(target_size),
    }
    if provenance:
        info.update(provenance)
    return Vocabulary(
        mode=mode,
        special_tokens=specials,
        base_symbols=base,
        merges=merges,
        penalty_config=penalty_config,
        provenance=info,
    )


def train(
    table: SegmentTable,
    target_size: int,
    penalties: PenaltyConfig | None = None,
    scope: set[str] | None = None,
    specials=DEFAULT_SPECIALS,
    log=None,
) -> Vocabulary:
    """Train a vocabulary of up to ``target_size`` symbols.

    ``scope`` restricts the penalties to tables whose language tag is a
    member; the default applies them to everything. The character and
    byte modes take no merges and just materialize their base symbols.
    """
    in_scope = scope is None or table.language_tag in scope
    return _train_core(
        [(table, penalties if in_scope else None)],
        target_size,
        specials,
        log=log,
    )


def train_joint(
    tables,
    target_size: int,
    specials=DEFAULT_SPECIALS,
    log=None,
) -> Vocabulary:
    """Pool several (SegmentTable, PenaltyConfig|None) pairs into one run.

    Each table's penalties apply only to the bigram counts its own
    segments contribute; selection uses the summed adjusted counts.
    """
    return _train_core(list(tables), target_size, specials, log=log)
