import io
import random

import pytest

from bbpekit.errors import (
    ConfigError,
    CorruptVocabError,
    IncompatibleVocabError,
    VersionError,
)
from bbpekit.vocab import (
    DEFAULT_SPECIALS,
    PenaltyConfig,
    Symbol,
    Vocabulary,
    composition_report,
    load,
    save,
    serialize,
    union,
)

BYTE_BASE = [bytes([i]) for i in range(256)]


def byte_vocab(merges=(), penalty=None, mode="bbpe"):
    return Vocabulary(
        mode=mode,
        base_symbols=BYTE_BASE,
        merges=merges,
        penalty_config=penalty,
    )


def char_vocab(chars, merges=(), specials=DEFAULT_SPECIALS, mode="character"):
    return Vocabulary(
        mode=mode,
        special_tokens=specials,
        base_symbols=[c.encode("utf-8") for c in chars],
        merges=merges,
    )


def random_vocab(rng):
    """Invariant-respecting random vocabulary for roundtrip testing."""
    mode = rng.choice(("character", "bpe", "byte", "bbpe"))
    if mode in ("byte", "bbpe"):
        base = list(BYTE_BASE)
    else:
        chars = rng.sample("abcdefghijklmnop你好世界不了我在这是中文字符集", rng.randint(2, 20))
        base = sorted(c.encode("utf-8") for c in chars)
    merges = []
    symbols = list(base)
    existing = set(base)
    if mode in ("bpe", "bbpe"):
        for _ in range(rng.randint(0, 40)):
            left, right = rng.choice(symbols), rng.choice(symbols)
            merged = left + right
            if merged in existing:
                continue
            raw = rng.randint(1, 10**6)
            adjusted = raw * rng.choice((1.0, 0.01, 0.001, 1e-5))
            merges.append((left, right, raw, adjusted))
            existing.add(merged)
            symbols.append(merged)
    penalty = rng.choice(
        (None, PenaltyConfig(), PenaltyConfig(alpha=0.6, cutoff_n=2, beta=0.0))
    )
    if mode in ("character", "byte"):
        penalty = None
        merges = []
    return Vocabulary(
        mode=mode,
        base_symbols=base,
        merges=merges,
        penalty_config=penalty,
        provenance={"note": "randomized"},
    )


class TestSymbol:
    def test_derived_attributes(self):
        s = Symbol(bytes=b"the", id=9)
        assert s.byte_len == 3
        assert s.is_alphabetic
        assert s.char_count == 3

    def test_han_symbol(self):
        s = Symbol(bytes="你".encode(), id=1)
        assert s.byte_len == 3
        assert not s.is_alphabetic
        assert s.char_count == 1

    def test_invalid_fragment_has_undefined_char_count(self):
        s = Symbol(bytes=bytes([0xE4, 0xBD]), id=2)
        assert s.char_count is None


class TestPenaltyConfig:
    def test_defaults_follow_best_known_settings(self):
        config = PenaltyConfig()
        assert (config.alpha, config.cutoff_n, config.beta) == (0.99, 3, 0.999)

    @pytest.mark.parametrize(
        "kwargs", [{"alpha": -0.1}, {"alpha": 1.5}, {"beta": 2.0}, {"cutoff_n": 0}]
    )
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ConfigError):
            PenaltyConfig(**kwargs)


class TestVocabularyInvariants:
    def test_byte_mode_requires_full_byte_alphabet(self):
        with pytest.raises(CorruptVocabError):
            Vocabulary(mode="byte", base_symbols=BYTE_BASE[:255])

    def test_byte_mode_size_is_262_with_default_specials(self):
        v = byte_vocab(mode="byte")
        assert v.size == 262

    def test_id_law(self):
        v = byte_vocab(merges=[(b"a", b"b", 5, 5.0)])
        assert [s.id for s in v.base_symbols][:3] == [6, 7, 8]
        assert v.merges[0].result.id == 6 + 256
        assert v.merges[0].result.bytes == b"ab"

    def test_duplicate_merge_result_rejected(self):
        with pytest.raises(CorruptVocabError):
            byte_vocab(merges=[(b"a", b"b", 5, 5.0), (b"a", b"b", 4, 4.0)])

    def test_merge_parent_must_exist(self):
        with pytest.raises(CorruptVocabError):
            byte_vocab(merges=[(b"ab", b"c", 5, 5.0)])

    def test_adjusted_cannot_exceed_raw(self):
        with pytest.raises(CorruptVocabError):
            byte_vocab(merges=[(b"a", b"b", 5, 6.0)])

    def test_character_mode_rejects_multichar_base(self):
        with pytest.raises(CorruptVocabError):
            char_vocab(["ab"])

    def test_merge_results_concatenate_parents(self):
        v = byte_vocab(merges=[(b"a", b"b", 9, 9.0), (b"ab", b"c", 3, 3.0)])
        for rule in v.merges:
            assert rule.result.bytes == rule.left.bytes + rule.right.bytes


class TestSerialization:
    def test_byte_mode_file_declares_262_symbols(self):
        v = byte_vocab(mode="byte")
        text = serialize(v)
        lines = text.splitlines()
        symbol_lines = [ln for ln in lines if ln.startswith("S ")]
        assert len(symbol_lines) + v.n_specials == 262
        assert lines[0] == "bbpekit-vocab v1 mode=byte"

    def test_two_base_symbols_plus_specials(self):
        v = char_vocab(["a", "b"], mode="bpe")
        assert v.size == 2 + len(DEFAULT_SPECIALS)

    def test_roundtrip_identity(self):
        v = byte_vocab(
            merges=[(b"a", b"b", 100, 100.0), (b"ab", b"a", 7, 0.07)],
            penalty=PenaltyConfig(),
        )
        buf = io.StringIO()
        save(v, buf)
        assert load(io.StringIO(buf.getvalue())) == v

    def test_save_is_deterministic_and_lf_terminated(self):
        v = byte_vocab(merges=[(b"t", b"h", 11, 0.011)], penalty=PenaltyConfig())
        a, b = serialize(v), serialize(v)
        assert a == b
        assert "\r" not in a
        assert a.endswith("\n")

    def test_floats_keep_17_significant_digits(self):
        v = byte_vocab(penalty=PenaltyConfig(alpha=0.99, cutoff_n=3, beta=0.999))
        penalty_line = serialize(v).splitlines()[2]
        alpha_text = penalty_line.split()[1].removeprefix("alpha=")
        assert float(alpha_text) == 0.99
        assert len(alpha_text.replace(".", "").lstrip("0")) >= 15

    def test_roundtrip_on_randomized_vocabularies(self):
        rng = random.Random(1234)
        for _ in range(100):
            v = random_vocab(rng)
            buf = io.StringIO()
            save(v, buf)
            loaded = load(io.StringIO(buf.getvalue()))
            assert loaded == v
            assert serialize(loaded) == serialize(v)

    def test_version_mismatch(self):
        text = serialize(byte_vocab()).replace("v1", "v9", 1)
        with pytest.raises(VersionError):
            load(io.StringIO(text))

    def test_corrupt_merge_reference(self):
        v = byte_vocab(merges=[(b"a", b"b", 5, 5.0)])
        text = serialize(v).replace("M 0 61 62", "M 0 61 QQ")
        with pytest.raises(CorruptVocabError):
            load(io.StringIO(text))

    def test_corrupt_id_ordering(self):
        text = serialize(byte_vocab()).replace("S 00 6", "S 00 7", 1)
        with pytest.raises(CorruptVocabError):
            load(io.StringIO(text))

    def test_wrong_magic(self):
        text = serialize(byte_vocab()).replace("bbpekit-vocab", "other-vocab", 1)
        with pytest.raises(CorruptVocabError):
            load(io.StringIO(text))

    def test_path_based_save_load(self, tmp_path):
        v = byte_vocab(merges=[(b"a", b"b", 2, 2.0)])
        path = tmp_path / "v.vocab"
        save(v, path)
        assert load(path) == v


class TestComposition:
    def test_byte_mode_all_single_byte(self):
        stats = composition_report(byte_vocab(mode="byte"))
        assert stats.single_byte == 256
        assert stats.fractions()["single_byte"] == 1.0

    def test_han_symbol_counts_as_single_cjk(self):
        v = byte_vocab(
            merges=[
                (b"\xe4", b"\xbd", 50, 50.0),
                (b"\xe4\xbd", b"\xa0", 40, 40.0),
            ]
        )
        stats = composition_report(v)
        assert stats.cjk_single_char == 1
        assert stats.invalid_utf8 == 1  # the intermediate E4 BD fragment

    def test_the_counts_as_alphabetic_multibyte(self):
        v = byte_vocab(merges=[(b"t", b"h", 9, 9.0), (b"th", b"e", 8, 8.0)])
        stats = composition_report(v)
        assert stats.alpha_multibyte == 2  # "th" and "the"

    def test_multichar_cjk(self):
        v = char_vocab(["你", "好"], mode="bpe",
                       merges=[("你".encode(), "好".encode(), 3, 3.0)])
        assert composition_report(v).cjk_multi_char == 1

    def test_fractions_sum_to_one(self):
        rng = random.Random(77)
        for _ in range(30):
            stats = composition_report(random_vocab(rng))
            assert abs(sum(stats.fractions().values()) - 1.0) < 1e-9


class TestUnion:
    def test_idempotent(self):
        v = byte_vocab(merges=[(b"a", b"b", 5, 5.0)])
        assert union(v, v) == v

    def test_small_overlap(self):
        a = char_vocab(["a", "b", "c"])
        b = char_vocab(["b", "c", "d"])
        combined = union(a, b)
        assert len(combined.base_symbols) == 4

    def test_bilingual_dimension_arithmetic(self):
        # sizes 765 and 7632 overlapping in 282 symbols combine to 8115
        chars = [chr(0x4E00 + i) for i in range(8115)]
        a = char_vocab(chars[:765])
        b = char_vocab(chars[765 - 282 : 765 - 282 + 7632])
        combined = union(a, b)
        assert len(combined.base_symbols) == 8115

    def test_symbol_sets_commute(self):
        rng = random.Random(5)
        for _ in range(10):
            a, b = random_vocab(rng), random_vocab(rng)
            if {a.mode, b.mode} <= {"character", "bpe"} or {a.mode, b.mode} <= {
                "byte",
                "bbpe",
            }:
                ab = {s.bytes for s in union(a, b).symbols()}
                ba = {s.bytes for s in union(b, a).symbols()}
                assert ab == ba

    def test_special_mismatch_rejected(self):
        a = char_vocab(["a"], specials=("BOS", "EOS"))
        b = char_vocab(["a"])
        with pytest.raises(IncompatibleVocabError):
            union(a, b)

    def test_cross_family_rejected(self):
        with pytest.raises(IncompatibleVocabError):
            union(byte_vocab(), char_vocab(["a"]))

    def test_merges_deduplicated(self):
        a = byte_vocab(merges=[(b"a", b"b", 5, 5.0)])
        b = byte_vocab(merges=[(b"a", b"b", 3, 3.0), (b"b", b"c", 2, 2.0)])
        combined = union(a, b)
        results = [r.result.bytes for r in combined.merges]
        assert results == [b"ab", b"bc"]
        assert combined.merges[0].raw_count == 5  # first occurrence wins
