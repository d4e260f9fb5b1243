"""Analysis suite: edit-distance alignment, error rates, symbol sharing,
hypothesis lengths, and script-based language labelling.

The aligner resolves cost ties deterministically (substitution over a
deletion+insertion pair, deletions before insertions, scanning left to
right) so error breakdowns are reproducible run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bytecore import is_han_char
from .codec import TokenSeq, seq_length
from .errors import IncompatibleVocabError, InputError
from .vocab import Vocabulary

ENGLISH = "English"
MANDARIN = "Mandarin"
UNKNOWN = "Unknown"

_MATCH, _SUB, _DEL, _INS = 0, 1, 2, 3


@dataclass(frozen=True)
class AlignmentStats:
    deletions: int
    substitutions: int
    insertions: int
    ref_len: int
    hyp_len: int

    @property
    def total_errors(self) -> int:
        return self.deletions + self.substitutions + self.insertions

    @property
    def error_rate(self) -> float:
        if self.ref_len == 0:
            return math.inf if self.total_errors else 0.0
        return self.total_errors / self.ref_len


@dataclass(frozen=True)
class SharingReport:
    total_symbols: int
    shared_symbols: int

    @property
    def rate(self) -> float:
        return self.shared_symbols / self.total_symbols if self.total_symbols else 0.0


def align(reference, hypothesis) -> AlignmentStats:
    """Minimum-edit-distance alignment with unit costs and the documented
    tie-breaking; tokens are whatever comparable units the caller passes."""
    ref = list(reference)
    hyp = list(hypothesis)
    R, H = len(ref), len(hyp)

    ops = [bytearray(H + 1) for _ in range(R + 1)]
    ops[0][1:] = bytes([_INS]) * H
    prev = list(range(H + 1))
    for i in range(1, R + 1):
        oprow = ops[i]
        oprow[0] = _DEL
        cur = [i] + [0] * H
        rtok = ref[i - 1]
        for j in range(1, H + 1):
            if rtok == hyp[j - 1]:
                best, op = prev[j - 1], _MATCH
            else:
                best, op = prev[j - 1] + 1, _SUB
            cand = prev[j] + 1
            if cand < best:
                best, op = cand, _DEL
            cand = cur[j - 1] + 1
            if cand < best:
                best, op = cand, _INS
            cur[j] = best
            oprow[j] = op
        prev = cur

    dels = subs = ins = 0
    i, j = R, H
    while i > 0 or j > 0:
        op = ops[i][j]
        if op == _DEL:
            dels += 1
            i -= 1
        elif op == _INS:
            ins += 1
            j -= 1
        else:
            if op == _SUB:
                subs += 1
            i -= 1
            j -= 1
    return AlignmentStats(
        deletions=dels,
        substitutions=subs,
        insertions=ins,
        ref_len=R,
        hyp_len=H,
    )


def _units(text: str, unit: str):
    if unit == "word":
        return text.split()
    if unit == "char":
        return list("".join(text.split()))
    raise InputError(f"unit must be 'word' or 'char', got {unit!r}")


def error_rate(refs, hyps, unit: str = "word") -> float:
    """Corpus-level WER/CER: summed errors over summed reference length."""
    refs = list(refs)
    hyps = list(hyps)
    if len(refs) != len(hyps):
        raise InputError(
            f"reference/hypothesis counts differ: {len(refs)} vs {len(hyps)}"
        )
    errors = 0
    ref_total = 0
    for ref, hyp in zip(refs, hyps):
        stats = align(_units(ref, unit), _units(hyp, unit))
        errors += stats.total_errors
        ref_total += stats.ref_len
    if ref_total == 0:
        return math.inf if errors else 0.0
    return errors / ref_total


def sharing_rate(a: Vocabulary, b: Vocabulary) -> SharingReport:
    """Symbol overlap between two vocabularies' non-special byte strings."""
    if a.special_tokens != b.special_tokens:
        raise IncompatibleVocabError("special-token lists differ")
    set_a = {s.bytes for s in a.symbols()}
    set_b = {s.bytes for s in b.symbols()}
    return SharingReport(
        total_symbols=len(set_a | set_b),
        shared_symbols=len(set_a & set_b),
    )


def avg_hyp_length(hyps) -> float:
    """Mean non-special symbol count across hypotheses."""
    hyps = list(hyps)
    if not hyps:
        raise InputError("no hypotheses given")
    fingerprints = {
        h.vocab_fingerprint for h in hyps if h.vocab_fingerprint is not None
    }
    if len(fingerprints) > 1:
        raise InputError("hypotheses are bound to different vocabularies")
    return sum(seq_length(h) for h in hyps) / len(hyps)


def classify_language(text: str) -> str:
    """Script-based label: Mandarin when Han characters outnumber ASCII
    letters, English in the opposite case, tie broken by whichever class
    appears first, Unknown when neither occurs."""
    han = latin = 0
    first = None
    for ch in text:
        if is_han_char(ch):
            han += 1
            if first is None:
                first = MANDARIN
        elif ch.isascii() and ch.isalpha():
            latin += 1
            if first is None:
                first = ENGLISH
    if han > latin:
        return MANDARIN
    if latin > han:
        return ENGLISH
    return first if first is not None else UNKNOWN


def confusion_report(hyps, true_labels) -> dict[str, float]:
    """Per-language fraction of hypotheses labelled as the other language
    (Unknown does not count as wrong)."""
    hyps = list(hyps)
    labels = list(true_labels)
    if len(hyps) != len(labels):
        raise InputError(
            f"hypothesis/label counts differ: {len(hyps)} vs {len(labels)}"
        )
    totals = {ENGLISH: 0, MANDARIN: 0}
    wrong = {ENGLISH: 0, MANDARIN: 0}
    for hyp, label in zip(hyps, labels):
        if label not in totals:
            raise InputError(f"true label must be English or Mandarin, got {label!r}")
        totals[label] += 1
        predicted = classify_language(hyp)
        if predicted != UNKNOWN and predicted != label:
            wrong[label] += 1
    return {
        lang: (wrong[lang] / totals[lang] if totals[lang] else 0.0)
        for lang in (ENGLISH, MANDARIN)
    }
