import os

import pytest

from entrain.corpus import Dialogue, Utterance, load_transcript, speaker_for_index
from entrain.filtering import load_dictionaries
from entrain.normalize import NormalizationConfig, normalize_dialogue
from entrain.pipeline import annotate_dialogue

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

TABLE1_PATH = os.path.join(DATA_DIR, "table1.txt")
GOLDEN_PATH = os.path.join(DATA_DIR, "table1_golden.json")


@pytest.fixture(scope="session")
def cfg():
    return NormalizationConfig.load()


@pytest.fixture(scope="session")
def dicts(cfg):
    return load_dictionaries(None, cfg)


def make_dialogue(texts, dialogue_id="test", domains=()):
    """Build a dialogue from utterance texts, speakers alternating from User."""
    utterances = [
        Utterance(
            dialogue_id=dialogue_id,
            index=i,
            speaker=speaker_for_index(i),
            raw_text=text,
        )
        for i, text in enumerate(texts, start=1)
    ]
    return Dialogue(
        dialogue_id=dialogue_id, utterances=utterances, domains=list(domains)
    )


def normalized_dialogue(texts, cfg, dialogue_id="test"):
    return normalize_dialogue(make_dialogue(texts, dialogue_id=dialogue_id), cfg)


@pytest.fixture()
def table1_dialogue():
    return load_transcript(TABLE1_PATH, dialogue_id="table1")


@pytest.fixture(scope="session")
def table1_record(cfg, dicts):
    """Fully annotated golden dialogue; session-scoped, do not mutate."""
    dialogue = load_transcript(TABLE1_PATH, dialogue_id="table1")
    return annotate_dialogue(dialogue, cfg, dicts)
