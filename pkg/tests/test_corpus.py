import json

import pytest

from entrain.corpus import (
    Speaker,
    load_multiwoz,
    load_transcript,
    load_transcript_dir,
    speaker_for_index,
)
from entrain.errors import ParseError, ValidationError

from conftest import TABLE1_PATH


def test_speaker_helpers():
    assert speaker_for_index(1) is Speaker.USER
    assert speaker_for_index(2) is Speaker.AGENT
    assert Speaker.USER.other is Speaker.AGENT
    assert Speaker.AGENT.other is Speaker.USER


class TestTranscript:
    def test_table1_loads(self):
        dialogue = load_transcript(TABLE1_PATH, dialogue_id="table1")
        assert dialogue.dialogue_id == "table1"
        assert len(dialogue) == 20
        assert dialogue.utterances[0].speaker is Speaker.USER
        assert dialogue.utterances[0].raw_text.startswith("Im looking")
        assert dialogue.utterances[19].speaker is Speaker.AGENT
        assert [u.index for u in dialogue] == list(range(1, 21))

    def test_default_id_is_filename(self):
        assert load_transcript(TABLE1_PATH).dialogue_id == "table1"

    def test_utterances_by(self):
        dialogue = load_transcript(TABLE1_PATH)
        assert len(dialogue.utterances_by(Speaker.USER)) == 10
        assert len(dialogue.utterances_by(Speaker.AGENT)) == 10

    def test_bad_prefix(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("USER: hi\nSYSTEM: hello\n")
        with pytest.raises(ParseError, match=r"bad\.txt:2"):
            load_transcript(str(path))

    def test_wrong_first_speaker(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("AGENT: hello\n")
        with pytest.raises(ParseError, match="turn 1"):
            load_transcript(str(path))

    def test_broken_alternation(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("USER: hi\nUSER: hi again\n")
        with pytest.raises(ParseError, match="turn 2"):
            load_transcript(str(path))

    def test_empty_transcript(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# only a comment\n")
        with pytest.raises(ValidationError, match="no utterances"):
            load_transcript(str(path))

    def test_directory_loader_sorted(self, tmp_path):
        (tmp_path / "b.txt").write_text("USER: hello there\nAGENT: hello you\n")
        (tmp_path / "a.txt").write_text("USER: good day\nAGENT: good day indeed\n")
        corpus = load_transcript_dir(str(tmp_path))
        assert [d.dialogue_id for d in corpus] == ["a", "b"]

    def test_directory_loader_empty(self, tmp_path):
        with pytest.raises(ValidationError, match="no .txt transcripts"):
            load_transcript_dir(str(tmp_path))

    def test_missing_file(self):
        with pytest.raises(ParseError, match="cannot read transcript"):
            load_transcript("/no/such/file.txt")

    def test_missing_directory(self):
        with pytest.raises(ParseError, match="cannot list transcripts"):
            load_transcript_dir("/no/such/dir")


def _write_multiwoz(tmp_path, with_splits=True):
    data = {
        "B0001.json": {
            "goal": {"hotel": {"info": {"area": "north"}}, "topic": {}, "message": ["x"]},
            "log": [
                {"text": "I need a hotel.", "dialog_act": {"Hotel-Inform": [["Area", "north"]]}},
                {"text": "The Arms hotel is north.", "dialog_act": {"Hotel-Recommend": [["Name", "The Arms"]]}},
            ],
        },
        "A0001.json": {
            "goal": {"restaurant": {"info": {"food": "italian"}}, "taxi": {}},
            "log": [
                {"text": "Im after an italian restaurant."},
                {"text": "Sure, there are 9 italian restaurants."},
            ],
        },
    }
    (tmp_path / "data.json").write_text(json.dumps(data))
    if with_splits:
        (tmp_path / "valListFile.txt").write_text("A0001.json\n")
        (tmp_path / "testListFile.txt").write_text("B0001.json\n")


class TestMultiwoz:
    def test_load_all_sorted(self, tmp_path):
        _write_multiwoz(tmp_path)
        corpus = load_multiwoz(str(tmp_path))
        assert [d.dialogue_id for d in corpus] == ["A0001.json", "B0001.json"]
        hotel = corpus.dialogues[1]
        assert hotel.domains == ["hotel"]
        assert hotel.utterances[0].speaker is Speaker.USER
        assert hotel.utterances[0].acts == [("Hotel-Inform", "Area", "north")]
        # restaurant goal present but taxi empty
        assert corpus.dialogues[0].domains == ["restaurant"]

    def test_splits(self, tmp_path):
        _write_multiwoz(tmp_path)
        assert [d.dialogue_id for d in load_multiwoz(str(tmp_path), split="val")] == ["A0001.json"]
        assert [d.dialogue_id for d in load_multiwoz(str(tmp_path), split="test")] == ["B0001.json"]
        assert len(load_multiwoz(str(tmp_path), split="train")) == 0

    def test_split_needs_lists(self, tmp_path):
        _write_multiwoz(tmp_path, with_splits=False)
        with pytest.raises(ParseError, match="valListFile"):
            load_multiwoz(str(tmp_path), split="val")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="no such corpus file"):
            load_multiwoz(str(tmp_path / "nope.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "data.json"
        path.write_text("{broken")
        with pytest.raises(ParseError, match="not valid JSON"):
            load_multiwoz(str(path))

    def test_empty_log(self, tmp_path):
        (tmp_path / "data.json").write_text(json.dumps({"X.json": {"log": []}}))
        with pytest.raises(ValidationError, match="empty log"):
            load_multiwoz(str(tmp_path))

    def test_log_entry_without_text(self, tmp_path):
        (tmp_path / "data.json").write_text(
            json.dumps({"X.json": {"log": [{"metadata": {}}]}})
        )
        with pytest.raises(ParseError, match="has no text"):
            load_multiwoz(str(tmp_path))
