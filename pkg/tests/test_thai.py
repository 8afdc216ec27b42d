import pytest
from hypothesis import given
from hypothesis import strategies as st

from sieve.thai import (
    DictionaryTokenizer,
    ThaiCharClass,
    WhitespaceTokenizer,
    classify_char,
    fraction_tokens_with_thai,
    split_lines,
    thai_char_ratio,
    thai_consonant_char_ratio,
    tokenize,
)

scalars = st.characters(min_codepoint=0, max_codepoint=0x10FFFF, exclude_categories=("Cs",))


def test_classify_char_endpoints():
    assert classify_char("ก") is ThaiCharClass.CONSONANT  # U+0E01
    assert classify_char("ฮ") is ThaiCharClass.CONSONANT
    assert classify_char("่") is ThaiCharClass.TONE_MARK
    assert classify_char("๋") is ThaiCharClass.TONE_MARK
    assert classify_char("ะ") is ThaiCharClass.VOWEL
    assert classify_char("็") is ThaiCharClass.VOWEL
    assert classify_char("๐") is ThaiCharClass.THAI_DIGIT
    assert classify_char("฀") is ThaiCharClass.OTHER_THAI
    assert classify_char("ฯ") is ThaiCharClass.OTHER_THAI
    assert classify_char("A") is ThaiCharClass.NON_THAI


@given(scalars)
def test_classify_char_total_and_block_consistent(ch):
    cls = classify_char(ch)
    in_block = 0x0E00 <= ord(ch) <= 0x0E7F
    assert (cls is not ThaiCharClass.NON_THAI) == in_block


def test_thai_char_ratio_examples():
    assert thai_char_ratio("กขคง") == 1.0
    assert thai_char_ratio("abcd") == 0.0
    assert thai_char_ratio("กข12") == 0.5
    assert thai_char_ratio("") == 0.0


def test_consonant_ratio_examples():
    assert thai_consonant_char_ratio("กกกก") == 1.0
    assert thai_consonant_char_ratio("กาก!") == 0.5  # 'า' vowel, '!' non-Thai
    assert thai_consonant_char_ratio("") == 0.0


@given(st.text(max_size=30), st.text(max_size=30))
def test_ratio_counting_identity(a, b):
    # count(a ++ b) == count(a) + count(b), hence the concatenated ratio is the
    # length-weighted combination of the two.
    total = thai_char_ratio(a + b) * len(a + b)
    assert total == pytest.approx(thai_char_ratio(a) * len(a) + thai_char_ratio(b) * len(b))


def test_fraction_tokens_with_thai():
    assert fraction_tokens_with_thai(["กา", "ไป"]) == 1.0
    assert fraction_tokens_with_thai(["abc", "กา"]) == 0.5
    assert fraction_tokens_with_thai([]) == 0.0


def test_split_lines():
    assert split_lines("a\nb") == ["a", "b"]
    assert split_lines("a\n\n\nb") == ["a", "b"]
    assert split_lines("\n") == []
    assert split_lines("") == []


@given(st.text(max_size=80))
def test_split_lines_no_newlines_no_empties(text):
    for line in split_lines(text):
        assert line and "\n" not in line


def test_whitespace_tokenizer():
    tok = WhitespaceTokenizer()
    assert tok.tokenize("hello world") == ["hello", "world"]
    assert tok.tokenize("กิน ข้าว") == ["กิน", "ข้าว"]
    assert tok.tokenize("") == []


def test_dictionary_maximal_matching():
    tok = DictionaryTokenizer(["กิน", "ข้าว"])
    assert tok.tokenize("กินข้าว") == ["กิน", "ข้าว"]
    assert tok.tokenize("hello world") == ["hello", "world"]


def test_longest_match_wins():
    tok = DictionaryTokenizer(["ไม่", "ไม่ใช่"])
    assert tok.tokenize("ไม่ใช่") == ["ไม่ใช่"]


def test_single_char_fallback():
    tok = DictionaryTokenizer(["กิน"])
    # "ๆๆ" not in the dictionary: falls back to single characters.
    assert tok.tokenize("กินๆๆ") == ["กิน", "ๆ", "ๆ"]


def test_script_boundary_split():
    tok = DictionaryTokenizer(["กิน"])
    assert tok.tokenize("abcกินx12") == ["abc", "กิน", "x12"]


def test_tokenize_wrapper(dict_tokenizer):
    assert tokenize("hello world", dict_tokenizer) == ["hello", "world"]


mixed_text = st.text(
    alphabet=st.sampled_from(list("กขคง ามี่ abz19 .\n\t…")),
    max_size=60,
)


@pytest.mark.parametrize("make_tok", [WhitespaceTokenizer, lambda: DictionaryTokenizer(["กิน", "ข้าว", "กข"])])
@given(text=mixed_text)
def test_reconstruction_invariant(make_tok, text):
    tok = make_tok()
    spans = tok.spans(text)
    # Tokens plus the removed separators reconstruct the input.
    rebuilt = []
    prev = 0
    for s, e in spans:
        assert s >= prev and e > s, "spans ordered and non-empty"
        rebuilt.append(text[prev:s])
        rebuilt.append(text[s:e])
        prev = e
    rebuilt.append(text[prev:])
    assert "".join(rebuilt) == text
    for s, e in spans:
        assert text[s:e].strip() == text[s:e], "tokens contain no whitespace"
    assert tok.tokenize("") == []


@given(text=mixed_text)
def test_tokens_never_empty(text):
    tok = DictionaryTokenizer(["กิน", "ข้าว"])
    assert all(t for t in tok.tokenize(text))
