import json
import struct

import numpy as np
import pytest

from emobridge import (
    InputError,
    read_corpus_texts,
    read_description_records,
    write_description_records,
    write_embedding_manifest,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_corpus_keys_and_order(tmp_path):
    path = _write(
        tmp_path / "c.tsv",
        "c1\ts1\thappy\thello there\n"
        "c1\ts2\tsad\tnot great\n"
        "c2\ts1\t-\tno label here\n",
    )
    pairs = read_corpus_texts(path)
    assert [k for k, _ in pairs] == ["c1:0", "c1:1", "c2:0"]
    assert pairs[2][1] == "no label here"


def test_corpus_text_may_contain_tabs(tmp_path):
    path = _write(tmp_path / "c.tsv", "c1\ts1\thappy\ta\tb\tc\n")
    pairs = read_corpus_texts(path)
    assert pairs == [("c1:0", "a\tb\tc")]


def test_corpus_short_line_has_line_number(tmp_path):
    path = _write(tmp_path / "c.tsv", "c1\ts1\thappy\tok\nc1\ts1\tbroken\n")
    with pytest.raises(InputError) as err:
        read_corpus_texts(path)
    assert err.value.line_no == 2


def test_corpus_blank_line_rejected(tmp_path):
    path = _write(tmp_path / "c.tsv", "c1\ts1\thappy\tok\n\nc1\ts1\tsad\tmeh\n")
    with pytest.raises(InputError) as err:
        read_corpus_texts(path)
    assert err.value.line_no == 2


def test_corpus_non_contiguous_conversation_rejected(tmp_path):
    path = _write(
        tmp_path / "c.tsv",
        "c1\ts1\thappy\ta\nc2\ts1\tsad\tb\nc1\ts1\tsad\tc\n",
    )
    with pytest.raises(InputError, match="not contiguous"):
        read_corpus_texts(path)


def test_corpus_empty_file_rejected(tmp_path):
    path = _write(tmp_path / "c.tsv", "")
    with pytest.raises(InputError, match="no records"):
        read_corpus_texts(path)


def test_description_records_round_trip(tmp_path):
    records = [
        {"word": "joy", "dict": "a feeling", "llm": ["One.", "Two."]},
        {"word": "fear", "dict": "", "llm": [], "skip": True, "raw": "???"},
    ]
    path = str(tmp_path / "d.jsonl")
    write_description_records(records, path)
    back = read_description_records(path)
    assert back == records


def test_description_extra_keys_survive(tmp_path):
    path = _write(
        tmp_path / "d.jsonl",
        json.dumps({"word": "joy", "note": "hand written"}) + "\n",
    )
    (record,) = read_description_records(path)
    assert record["note"] == "hand written"
    assert record["dict"] == "" and record["llm"] == []


def test_description_duplicate_words_rejected(tmp_path):
    path = _write(
        tmp_path / "d.jsonl",
        '{"word": "joy"}\n{"word": "Joy"}\n',
    )
    with pytest.raises(InputError, match="duplicate"):
        read_description_records(path)


def test_description_bad_json_names_line(tmp_path):
    path = _write(tmp_path / "d.jsonl", '{"word": "joy"}\nnot json\n')
    with pytest.raises(InputError) as err:
        read_description_records(path)
    assert err.value.line_no == 2


def test_description_llm_must_be_string_list(tmp_path):
    path = _write(tmp_path / "d.jsonl", '{"word": "joy", "llm": "sentence"}\n')
    with pytest.raises(InputError, match="list of strings"):
        read_description_records(path)


def test_manifest_layout_and_bytes(tmp_path):
    data = np.array([[1.5, -2.0], [0.25, 8.0]], dtype=np.float32)
    out = tmp_path / "m"
    manifest_path = write_embedding_manifest([("utterances", data, ["a", "b"])], out)
    doc = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert doc["version"] == 1
    (entry,) = doc["tensors"]
    assert entry == {
        "name": "utterances",
        "file": "utterances.bin",
        "dtype": "f32",
        "shape": [2, 2],
        "row_keys": ["a", "b"],
    }
    payload = (out / "utterances.bin").read_bytes()
    assert payload == struct.pack("<4f", 1.5, -2.0, 0.25, 8.0)
    assert manifest_path == str(out / "manifest.json")


def test_manifest_rejects_bad_tensors(tmp_path):
    ok = np.zeros((1, 2), dtype=np.float32)
    with pytest.raises(ValueError, match="float32"):
        write_embedding_manifest([("t", ok.astype(np.float64), ["a"])], tmp_path / "x")
    with pytest.raises(ValueError, match="row keys"):
        write_embedding_manifest([("t", ok, ["a", "b"])], tmp_path / "x")
    with pytest.raises(ValueError, match="duplicate row keys"):
        write_embedding_manifest(
            [("t", np.zeros((2, 2), dtype=np.float32), ["a", "a"])], tmp_path / "x"
        )
    with pytest.raises(ValueError, match="share a width"):
        write_embedding_manifest(
            [("t", ok, ["a"]), ("u", np.zeros((1, 3), dtype=np.float32), ["a"])],
            tmp_path / "x",
        )
    with pytest.raises(ValueError, match="duplicate tensor names"):
        write_embedding_manifest([("t", ok, ["a"]), ("t", ok, ["b"])], tmp_path / "x")
    with pytest.raises(ValueError, match="filesystem safe"):
        write_embedding_manifest([("../t", ok, ["a"])], tmp_path / "x")


def test_atomic_writer_leaves_no_temp_files(tmp_path):
    data = np.zeros((1, 2), dtype=np.float32)
    out = tmp_path / "m"
    write_embedding_manifest([("t", data, ["a"])], out)
    leftovers = [p.name for p in out.iterdir() if p.name.startswith(".tmp-")]
    assert leftovers == []
