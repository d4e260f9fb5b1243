"""bbpekit: byte-level BPE tokenization toolkit.

Trains character/BPE/byte/BBPE vocabularies with length and alphabet
penalty adjustments to the bigram statistics, encodes and decodes text
with dynamic-programming UTF-8 repair, and measures error alignment,
symbol sharing, hypothesis length, vocabulary composition and language
confusion.
"""

from .bytecore import (
    RepairResult,
    is_alphabetic_byte,
    is_han_char,
    is_valid_utf8,
    repair_utf8,
    text_to_bytes,
)
from .codec import TokenSeq, decode, encode, seq_length
from .metrics import (
    AlignmentStats,
    SharingReport,
    align,
    avg_hyp_length,
    classify_language,
    confusion_report,
    error_rate,
    sharing_rate,
)
from .trainer import (
    BigramStat,
    SegmentTable,
    alphabet_penalty,
    count_bigrams,
    ingest,
    length_penalty,
    train,
    train_joint,
)
from .vocab import (
    DEFAULT_SPECIALS,
    CompositionStats,
    MergeRule,
    PenaltyConfig,
    Symbol,
    Vocabulary,
    composition_report,
    load,
    save,
    union,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentStats",
    "BigramStat",
    "CompositionStats",
    "DEFAULT_SPECIALS",
    "MergeRule",
    "PenaltyConfig",
    "RepairResult",
    "SegmentTable",
    "SharingReport",
    "Symbol",
    "TokenSeq",
    "Vocabulary",
    "align",
    "alphabet_penalty",
    "avg_hyp_length",
    "classify_language",
    "composition_report",
    "confusion_report",
    "count_bigrams",
    "decode",
    "encode",
    "error_rate",
    "ingest",
    "is_alphabetic_byte",
    "is_han_char",
    "is_valid_utf8",
    "length_penalty",
    "load",
    "repair_utf8",
    "save",
    "seq_length",
    "sharing_rate",
    "text_to_bytes",
    "train",
    "train_joint",
    "union",
]
