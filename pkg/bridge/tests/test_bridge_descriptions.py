import pytest

from emobridge import (
    VARIANTS,
    assemble,
    available_variants,
    build_prompt,
    split_sentences,
)


def test_prompt_wording():
    assert build_prompt("joy") == "Write two sentences expressing joy's emotions."
    assert build_prompt("fear", 1) == "Write one sentences expressing fear's emotions."
    assert (
        build_prompt("awe", 3) == "Write three sentences expressing awe's emotions."
    )


def test_prompt_validation():
    with pytest.raises(ValueError):
        build_prompt("  ")
    with pytest.raises(ValueError):
        build_prompt("joy", 4)


def test_split_plain_prose():
    text = "She smiled. The day felt lighter! Would it last?"
    assert split_sentences(text) == [
        "She smiled.",
        "The day felt lighter!",
        "Would it last?",
    ]


def test_split_numbered_lines():
    text = "1. She smiled all day.\n2) Nothing could bring her down.\n"
    assert split_sentences(text) == [
        "She smiled all day.",
        "Nothing could bring her down.",
    ]


def test_split_bulleted_lines():
    text = "- First thought here.\n* Second thought here.\n"
    assert split_sentences(text) == ["First thought here.", "Second thought here."]


def test_split_ignores_blank_lines():
    assert split_sentences("\n\nOnly one here.\n\n") == ["Only one here."]


def test_split_empty_response():
    assert split_sentences("") == []
    assert split_sentences("   \n  ") == []


_RECORD = {
    "word": "joy",
    "dict": "a feeling of great pleasure",
    "llm": ["She beamed.", "The room felt warm.", "Laughter came easily."],
}


def test_assemble_variants():
    assert assemble(_RECORD, "word_only") == "[CLS] joy [SEP]"
    assert (
        assemble(_RECORD, "dict_only")
        == "[CLS] joy a feeling of great pleasure [SEP]"
    )
    assert (
        assemble(_RECORD, "led2")
        == "[CLS] joy a feeling of great pleasure She beamed. The room felt warm. [SEP]"
    )
    assert assemble(_RECORD, "led3").endswith("Laughter came easily. [SEP]")


def test_assemble_missing_material():
    with pytest.raises(ValueError, match="gloss"):
        assemble({"word": "joy", "llm": ["a."]}, "dict_only")
    with pytest.raises(ValueError, match="generated sentences"):
        assemble({"word": "joy", "dict": "x", "llm": ["a."]}, "led2")
    with pytest.raises(ValueError, match="unknown variant"):
        assemble(_RECORD, "led4")


def test_available_variants_reflect_material():
    full = [_RECORD, dict(_RECORD, word="fear")]
    assert available_variants(full) == ("led1", "led2", "led3", "dict_only", "word_only")
    one_short = [_RECORD, {"word": "fear", "dict": "x", "llm": ["Only one."]}]
    assert available_variants(one_short) == ("led1", "dict_only", "word_only")
    no_gloss = [_RECORD, {"word": "fear", "llm": ["a.", "b."]}]
    assert available_variants(no_gloss) == ("word_only",)
    skipped = [_RECORD, {"word": "fear", "dict": "x", "llm": [], "skip": True}]
    assert available_variants(skipped) == ("dict_only", "word_only")


def test_variant_order_is_stable():
    assert VARIANTS == ("led1", "led2", "led3", "dict_only", "word_only")
