import itertools
import random

import pytest
from hypothesis import given, strategies as st

from mtpipe.corpus import (
    ORIGIN_FLIPPED,
    ORIGIN_ORIGINAL,
    CorpusStats,
    Direction,
    ParallelCorpus,
    SentencePair,
    balance_directions,
    flip,
    load_corpus,
    load_corpus_dir,
    save_corpus,
    save_corpus_dir,
)
from mtpipe.errors import DataError
from mtpipe.registry import languages

from .conftest import corpus_of

CODES = [lang.code for lang in languages()]


class TestDirection:
    def test_str_and_parse_roundtrip(self):
        d = Direction("fr", "en")
        assert str(d) == "fr-en"
        assert Direction.parse("fr-en") == d

    def test_reverse(self):
        assert Direction("fr", "en").reverse() == Direction("en", "fr")

    def test_rejects_unknown_code(self):
        with pytest.raises(DataError):
            Direction("fr", "xx")

    def test_rejects_same_language(self):
        with pytest.raises(DataError):
            Direction("en", "en")

    @pytest.mark.parametrize("raw", ["fren", "fr-en-de", "", "fr_"])
    def test_parse_rejects_malformed(self, raw):
        with pytest.raises(DataError):
            Direction.parse(raw)


class TestSentencePair:
    def test_swapped(self):
        assert SentencePair("a", "b").swapped() == SentencePair("b", "a")

    @pytest.mark.parametrize("src,tgt", [("", "x"), ("x", ""), ("  ", "x"), ("x", "\t")])
    def test_rejects_blank_sides(self, src, tgt):
        with pytest.raises(DataError):
            SentencePair(src, tgt)


class TestFlip:
    def test_swaps_sides_and_marks_origin(self):
        corpus = corpus_of("fr-en", [("bonjour", "hello"), ("chat", "cat")])
        flipped = flip(corpus)
        assert str(flipped.direction) == "en-fr"
        assert flipped.origin == ORIGIN_FLIPPED
        assert [p.source for p in flipped.pairs] == ["hello", "cat"]
        assert [p.target for p in flipped.pairs] == ["bonjour", "chat"]

    def test_double_flip_restores_pairs(self):
        corpus = corpus_of("fr-en", [("a1", "b1"), ("a2", "b2")])
        assert flip(flip(corpus)).pairs == corpus.pairs


class TestBalance:
    def test_creates_missing_reverse_by_full_flip(self):
        corpora = {Direction("fr", "en"): corpus_of("fr-en", [("a", "b"), ("c", "d")])}
        balanced = balance_directions(corpora, flip_threshold=1000, seed=0)
        assert set(map(str, balanced)) == {"fr-en", "en-fr"}
        reverse = balanced[Direction("en", "fr")]
        assert len(reverse) == 2
        assert reverse.origin == ORIGIN_FLIPPED

    def test_existing_reverse_left_alone(self):
        fr_en = corpus_of("fr-en", [("a", "b")])
        en_fr = corpus_of("en-fr", [("x", "y"), ("z", "w")])
        balanced = balance_directions(
            {Direction("fr", "en"): fr_en, Direction("en", "fr"): en_fr}, 1000, 0
        )
        assert balanced[Direction("en-fr".split("-")[0], "fr")] is en_fr
        assert len(balanced) == 2

    def test_half_flip_at_threshold_boundary(self):
        # exactly threshold pairs -> the capped branch, floor(n/2) flipped
        pairs = [(f"src {i}", f"tgt {i}") for i in range(7)]
        corpora = {Direction("fr", "en"): corpus_of("fr-en", pairs)}
        balanced = balance_directions(corpora, flip_threshold=7, seed=3)
        reverse = balanced[Direction("en", "fr")]
        assert len(reverse) == 3
        originals = {(p.target, p.source) for p in reverse.pairs}
        assert originals <= set(pairs)

    def test_half_flip_preserves_corpus_order(self):
        pairs = [(f"s{i}", f"t{i}") for i in range(10)]
        corpora = {Direction("fr", "en"): corpus_of("fr-en", pairs)}
        balanced = balance_directions(corpora, flip_threshold=10, seed=1)
        reverse = balanced[Direction("en", "fr")]
        indices = [int(p.source[1:]) for p in reverse.pairs]
        assert indices == sorted(indices)

    def test_below_threshold_flips_everything(self):
        pairs = [(f"s{i}", f"t{i}") for i in range(9)]
        corpora = {Direction("fr", "en"): corpus_of("fr-en", pairs)}
        balanced = balance_directions(corpora, flip_threshold=10, seed=1)
        assert len(balanced[Direction("en", "fr")]) == 9

    def test_single_pair_with_threshold_one_still_flips(self):
        corpora = {Direction("fr", "en"): corpus_of("fr-en", [("a", "b")])}
        balanced = balance_directions(corpora, flip_threshold=1, seed=0)
        assert len(balanced[Direction("en", "fr")]) == 1

    def test_deterministic_under_seed_and_dict_order(self):
        pairs = [(f"s{i}", f"t{i}") for i in range(20)]
        c1 = {
            Direction("fr", "en"): corpus_of("fr-en", pairs),
            Direction("de", "en"): corpus_of("de-en", pairs[:5]),
        }
        c2 = dict(reversed(list(c1.items())))
        b1 = balance_directions(c1, flip_threshold=10, seed=9)
        b2 = balance_directions(c2, flip_threshold=10, seed=9)
        assert {str(d): c.pairs for d, c in b1.items()} == {
            str(d): c.pairs for d, c in b2.items()
        }
        b3 = balance_directions(c1, flip_threshold=10, seed=10)
        assert b1[Direction("en", "fr")].pairs != b3[Direction("en", "fr")].pairs

    def test_inputs_not_mutated(self):
        corpora = {Direction("fr", "en"): corpus_of("fr-en", [("a", "b")])}
        before = dict(corpora)
        balance_directions(corpora, 1000, 0)
        assert corpora == before

    def test_142_directions_balance_to_242(self):
        # 21 mutual pairs (42 directions) plus 100 one-way directions
        corpora = {}
        for i in range(21):
            a, b = CODES[2 * i], CODES[2 * i + 1]
            corpora[Direction(a, b)] = corpus_of(f"{a}-{b}", [("x", "y")])
            corpora[Direction(b, a)] = corpus_of(f"{b}-{a}", [("y", "x")])
        tail = CODES[42:]
        one_way = list(itertools.combinations(tail, 2))[:100]
        for a, b in one_way:
            corpora[Direction(a, b)] = corpus_of(f"{a}-{b}", [("p", "q"), ("r", "s")])
        assert len(corpora) == 142
        balanced = balance_directions(corpora, flip_threshold=1_000_000, seed=0)
        assert len(balanced) == 242
        directions = set(map(str, balanced))
        assert all(f"{d.tgt}-{d.src}" in directions for d in balanced)

    @given(st.data())
    def test_balanced_direction_set_is_closed_under_reversal(self, data):
        rng = random.Random(data.draw(st.integers(0, 2**20)))
        corpora = {}
        for _ in range(data.draw(st.integers(1, 8))):
            a, b = rng.sample(CODES, 2)
            d = Direction(a, b)
            if d in corpora:
                continue
            n = rng.randint(1, 12)
            corpora[d] = corpus_of(str(d), [(f"s{i}", f"t{i}") for i in range(n)])
        threshold = data.draw(st.integers(1, 20))
        balanced = balance_directions(corpora, threshold, seed=5)
        names = set(map(str, balanced))
        for d in balanced:
            assert str(d.reverse()) in names
        for d, corpus in corpora.items():
            assert balanced[d] is corpus


class TestIO:
    def test_save_load_roundtrip(self, tmp_path):
        corpus = corpus_of("zh-en", [("你好，世界", "hello, world"), ("再见", "goodbye")])
        path = tmp_path / "zh-en.tsv"
        save_corpus(corpus, path)
        loaded, skipped = load_corpus(path, Direction("zh", "en"))
        assert skipped == 0
        assert loaded.pairs == corpus.pairs

    def test_load_skips_malformed_lines(self, tmp_path):
        path = tmp_path / "fr-en.tsv"
        path.write_text("good\tpair\nno tab here\na\tb\tc\n\t\n", "utf-8")
        corpus, skipped = load_corpus(path, Direction("fr", "en"))
        assert len(corpus) == 1
        assert skipped == 3

    def test_load_all_bad_lines_is_an_error(self, tmp_path):
        path = tmp_path / "fr-en.tsv"
        path.write_text("no tabs at all\n", "utf-8")
        with pytest.raises(DataError):
            load_corpus(path, Direction("fr", "en"))

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_corpus(tmp_path / "nope.tsv", Direction("fr", "en"))

    def test_save_rejects_empty_corpus(self, tmp_path):
        empty = ParallelCorpus(Direction("fr", "en"), ())
        with pytest.raises(DataError):
            save_corpus(empty, tmp_path / "x.tsv")

    def test_save_rejects_embedded_tabs(self, tmp_path):
        corpus = corpus_of("fr-en", [("a\tb", "c")])
        with pytest.raises(DataError):
            save_corpus(corpus, tmp_path / "x.tsv")

    def test_dir_roundtrip(self, tmp_path, tiny_corpus_dir):
        corpora, skipped = load_corpus_dir(tiny_corpus_dir)
        assert set(map(str, corpora)) == {"fr-en", "de-en", "zh-en"}
        assert all(n == 0 for n in skipped.values())
        out = tmp_path / "copy"
        save_corpus_dir(corpora, out)
        again, _ = load_corpus_dir(out)
        assert {str(d): c.pairs for d, c in again.items()} == {
            str(d): c.pairs for d, c in corpora.items()
        }

    def test_empty_dir_is_an_error(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(DataError):
            load_corpus_dir(tmp_path / "empty")


class TestStats:
    def test_collect_and_json(self):
        corpora = {
            Direction("fr", "en"): corpus_of("fr-en", [("a", "b")]),
            Direction("en", "fr"): corpus_of("en-fr", [("b", "a")], ORIGIN_FLIPPED),
        }
        stats = CorpusStats.collect(corpora, {Direction("fr", "en"): 2})
        assert stats.total_pairs == 2
        assert stats.origins["en-fr"] == ORIGIN_FLIPPED
        assert stats.origins["fr-en"] == ORIGIN_ORIGINAL
        text = stats.to_json()
        assert '"fr-en"' in text
        assert '"skipped_lines": 2' in text
