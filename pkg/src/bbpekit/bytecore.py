"""UTF-8 byte primitives: conversion, classification, validation, repair.

Byte-level vocabularies contain symbols that may be fragments of multibyte
characters, so everything here operates on raw ``bytes`` and never assumes
an input decodes. Validity follows the Unicode well-formedness table:
overlong encodings, surrogates and values beyond U+10FFFF are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

ByteSeq = bytes

_COMPLETE = 0
# Partial decoder states: (continuation bytes still needed, and the
# allowed range for the next one). After the first continuation byte of a
# sequence the range is always 0x80-0xBF; the restricted first-byte ranges
# below are what exclude overlongs, surrogates and > U+10FFFF.
_PARTIAL_STATES = {
    1: (1, 0x80, 0xBF),
    2: (2, 0x80, 0xBF),
    3: (3, 0x80, 0xBF),
    4: (2, 0xA0, 0xBF),  # after 0xE0
    5: (2, 0x80, 0x9F),  # after 0xED
    6: (3, 0x90, 0xBF),  # after 0xF0
    7: (3, 0x80, 0x8F),  # after 0xF4
}
_N_STATES = 8


def _build_take_table():
    take = [[-1] * 256 for _ in range(_N_STATES)]
    lead = take[_COMPLETE]
    for b in range(0x00, 0x80):
        lead[b] = _COMPLETE
    for b in range(0xC2, 0xE0):
        lead[b] = 1
    lead[0xE0] = 4
    for b in range(0xE1, 0xED):
        lead[b] = 2
    lead[0xED] = 5
    for b in (0xEE, 0xEF):
        lead[b] = 2
    lead[0xF0] = 6
    for b in (0xF1, 0xF2, 0xF3):
        lead[b] = 3
    lead[0xF4] = 7
    for state, (remaining, lo, hi) in _PARTIAL_STATES.items():
        nxt = _COMPLETE if remaining == 1 else remaining - 1
        for b in range(lo, hi + 1):
            take[state][b] = nxt
    return take


_TAKE = _build_take_table()

# Han-script ranges (ideograph blocks) used for CJK symbol classification
# and script-based language labelling.
_HAN_RANGES = (
    (0x3005, 0x3005),
    (0x3007, 0x3007),
    (0x3021, 0x3029),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x2F800, 0x2FA1F),
    (0x30000, 0x3134F),
)


@dataclass(frozen=True)
class RepairResult:
    """Valid UTF-8 text recovered from an arbitrary byte sequence.

    ``text`` re-encoded equals the input with exactly the ``dropped``
    indices removed; ``kept_bytes + len(dropped)`` equals the input length.
    """

    text: str
    dropped: tuple[int, ...]
    kept_bytes: int


def text_to_bytes(text: str) -> bytes:
    """UTF-8 encode ``text``; output length is 1x-4x the character count."""
    return text.encode("utf-8")


def is_valid_utf8(b: ByteSeq) -> bool:
    """True iff ``b`` is well-formed UTF-8 end to end."""
    state = _COMPLETE
    take = _TAKE
    for byte in b:
        state = take[state][byte]
        if state < 0:
            return False
    return state == _COMPLETE


def is_alphabetic_byte(b: int) -> bool:
    """ASCII letter check; lead and continuation bytes are never alphabetic."""
    return 0x41 <= b <= 0x5A or 0x61 <= b <= 0x7A


def symbol_is_alphabetic(data: bytes, include_accented: bool = False) -> bool:
    """True iff every byte of ``data`` spells ASCII letters.

    ``include_accented`` widens the test to any alphabetic Unicode string
    (the symbol must then be valid UTF-8). Off by default: the penalty is
    aimed at plain English subwords.
    """
    if not data:
        return False
    if all(is_alphabetic_byte(b) for b in data):
        return True
    if not include_accented:
        return False
    if not is_valid_utf8(data):
        return False
    return data.decode("utf-8").isalpha()


def is_han_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _HAN_RANGES)


def repair_utf8(b: ByteSeq) -> RepairResult:
    """Recover the longest valid UTF-8 subsequence of ``b``.

    Dynamic program over decoder states: at each position the byte is
    either dropped or extends the current (possibly partial) codeword.
    Maximizes kept bytes; among maximal solutions the dropped index list
    is lexicographically smallest, which the forward walk realizes by
    dropping as early as the suffix table allows. O(len(b)) time with an
    8-state constant factor.
    """
    n = len(b)
    take = _TAKE
    # best[i][s]: most bytes keepable from b[i:] when the bytes kept so
    # far left the decoder in state s; -1 where no valid completion exists.
    best = [[-1] * _N_STATES for _ in range(n + 1)]
    best[n][_COMPLETE] = 0
    for i in range(n - 1, -1, -1):
        row = best[i]
        nxt = best[i + 1]
        byte = b[i]
        for s in range(_N_STATES):
            v = nxt[s]
            t = take[s][byte]
            if t >= 0 and nxt[t] >= 0 and nxt[t] + 1 > v:
                v = nxt[t] + 1
            row[s] = v
    kept = bytearray()
    dropped = []
    state = _COMPLETE
    for i in range(n):
        if best[i + 1][state] == best[i][state]:
            dropped.append(i)
        else:
            kept.append(b[i])
            state = take[state][b[i]]
    return RepairResult(
        text=bytes(kept).decode("utf-8"),
        dropped=tuple(dropped),
        kept_bytes=len(kept),
    )
