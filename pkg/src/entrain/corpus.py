"""Dialogue corpus model and loaders.

A dialogue is a strictly alternating sequence of utterances between two
speakers, User and Agent, with the User speaking first and utterance
indices counted from 1.  Two input formats are supported:

* MultiWOZ-style ``data.json`` (a map from dialogue id to a ``goal`` and a
  ``log`` of turns, even log positions uttered by the User), with optional
  ``valListFile``/``testListFile`` split lists next to it.
* Plain-text transcripts with one ``USER:`` or ``AGENT:`` line per turn.

Loaders only read and validate; token streams are attached later by
normalization.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from typing import Iterator, TYPE_CHECKING

from .errors import ParseError, ValidationError

if TYPE_CHECKING:
    from .normalize import NormalizedToken

# Goal keys that describe the task rather than a service domain.
_NON_DOMAIN_GOAL_KEYS = {"topic", "message"}

_TRANSCRIPT_PREFIXES = {"USER:": None, "AGENT:": None}


class Speaker(enum.Enum):
    USER = "user"
    AGENT = "agent"

    @property
    def other(self) -> "Speaker":
        return Speaker.AGENT if self is Speaker.USER else Speaker.USER


def speaker_for_index(index: int) -> Speaker:
    """Speaker of the 1-based utterance index; odd indices belong to the User."""
    return Speaker.USER if index % 2 == 1 else Speaker.AGENT


@dataclass
class Utterance:
    dialogue_id: str
    index: int              # 1-based position within the dialogue
    speaker: Speaker
    raw_text: str
    # Flattened dialogue-act annotation: (act, slot, value) triples.
    acts: list[tuple[str, str, str]] = field(default_factory=list)
    # Filled in by normalize.normalize_dialogue.
    tokens: list["NormalizedToken"] | None = None


@dataclass
class Dialogue:
    dialogue_id: str
    utterances: list[Utterance]
    domains: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def utterances_by(self, speaker: Speaker) -> list[Utterance]:
        return [u for u in self.utterances if u.speaker == speaker]


@dataclass
class Corpus:
    name: str
    dialogues: list[Dialogue]

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)


def _validate_alternation(dialogue_id: str, utterances: list[Utterance]) -> None:
    if not utterances:
        raise ValidationError(f"dialogue {dialogue_id!r} has no utterances")
    for utt in utterances:
        expected = speaker_for_index(utt.index)
        if utt.speaker != expected:
            raise ValidationError(
                f"dialogue {dialogue_id!r}: utterance {utt.index} spoken by "
                f"{utt.speaker.value}, expected {expected.value}"
            )


def _flatten_acts(raw_acts) -> list[tuple[str, str, str]]:
    """Flatten a MultiWOZ ``dialog_act`` dict to (act, slot, value) triples."""
    triples: list[tuple[str, str, str]] = []
    if not isinstance(raw_acts, dict):
        return triples
    for act_name, pairs in raw_acts.items():
        if not isinstance(pairs, list):
            continue
        for pair in pairs:
            if isinstance(pair, (list, tuple)) and len(pair) == 2:
                triples.append((str(act_name), str(pair[0]), str(pair[1])))
    return triples


def _goal_domains(goal) -> list[str]:
    domains = []
    if isinstance(goal, dict):
        for key, value in goal.items():
            if key in _NON_DOMAIN_GOAL_KEYS:
                continue
            if value:
                domains.append(key)
    return sorted(domains)


def _read_split_ids(data_dir: str, stem: str) -> set[str]:
    for name in (stem + ".txt", stem + ".json"):
        path = os.path.join(data_dir, name)
        if os.path.exists(path):
            with open(path, encoding="utf-8") as handle:
                return {line.strip() for line in handle if line.strip()}
    raise ParseError(f"split list {stem!r} not found under {data_dir!r}")


def load_multiwoz(path: str, split: str = "all") -> Corpus:
    """Load a MultiWOZ-style corpus.

    ``path`` may be a ``data.json`` file or a directory containing one.
    ``split`` selects ``train``, ``val``, ``test`` (using the list files
    shipped with the corpus) or ``all``.
    """
    if os.path.isdir(path):
        data_path = os.path.join(path, "data.json")
    else:
        data_path = path
    if not os.path.exists(data_path):
        raise ParseError(f"no such corpus file: {data_path!r}")
    data_dir = os.path.dirname(os.path.abspath(data_path))

    try:
        with open(data_path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{data_path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{data_path}: expected an object mapping dialogue ids")

    wanted: set[str] | None = None
    if split != "all":
        val_ids = _read_split_ids(data_dir, "valListFile")
        test_ids = _read_split_ids(data_dir, "testListFile")
        if split == "val":
            wanted = val_ids
        elif split == "test":
            wanted = test_ids
        elif split == "train":
            wanted = set(raw) - val_ids - test_ids
        else:
            raise ValidationError(f"unknown split {split!r}")

    dialogues = []
    for dialogue_id in sorted(raw):
        if wanted is not None and dialogue_id not in wanted:
            continue
        entry = raw[dialogue_id]
        if not isinstance(entry, dict) or "log" not in entry:
            raise ParseError(f"dialogue {dialogue_id!r} has no log")
        log = entry["log"]
        if not isinstance(log, list) or not log:
            raise ValidationError(f"dialogue {dialogue_id!r} has an empty log")
        utterances = []
        for pos, turn in enumerate(log):
            if not isinstance(turn, dict) or not isinstance(turn.get("text"), str):
                raise ParseError(
                    f"dialogue {dialogue_id!r}: log entry {pos} has no text"
                )
            index = pos + 1
            utterances.append(
                Utterance(
                    dialogue_id=dialogue_id,
                    index=index,
                    speaker=speaker_for_index(index),
                    raw_text=turn["text"],
                    acts=_flatten_acts(turn.get("dialog_act")),
                )
            )
        _validate_alternation(dialogue_id, utterances)
        dialogues.append(
            Dialogue(
                dialogue_id=dialogue_id,
                utterances=utterances,
                domains=_goal_domains(entry.get("goal")),
            )
        )
    return Corpus(name=split, dialogues=dialogues)


def load_transcript(path: str, dialogue_id: str | None = None) -> Dialogue:
    """Load a plain-text transcript.

    Each non-blank, non-comment line must start with ``USER:`` or ``AGENT:``.
    Turns must alternate starting with the User.
    """
    if dialogue_id is None:
        dialogue_id = os.path.splitext(os.path.basename(path))[0]
    utterances: list[Utterance] = []
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read transcript {path!r}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            for prefix in _TRANSCRIPT_PREFIXES:
                if stripped.startswith(prefix):
                    speaker = Speaker.USER if prefix == "USER:" else Speaker.AGENT
                    text = stripped[len(prefix):].strip()
                    break
            else:
                raise ParseError(
                    f"{path}:{lineno}: expected a USER: or AGENT: line, "
                    f"got {stripped[:40]!r}"
                )
            index = len(utterances) + 1
            if speaker != speaker_for_index(index):
                raise ParseError(
                    f"{path}:{lineno}: turn {index} should be spoken by "
                    f"{speaker_for_index(index).value}"
                )
            utterances.append(
                Utterance(
                    dialogue_id=dialogue_id,
                    index=index,
                    speaker=speaker,
                    raw_text=text,
                )
            )
    if not utterances:
        raise ValidationError(f"{path}: transcript has no utterances")
    return Dialogue(dialogue_id=dialogue_id, utterances=utterances)


def load_transcript_dir(path: str) -> Corpus:
    """Load every ``*.txt`` transcript in a directory, sorted by filename."""
    try:
        names = sorted(n for n in os.listdir(path) if n.endswith(".txt"))
    except OSError as exc:
        raise ParseError(f"cannot list transcripts in {path!r}: {exc}") from exc
    if not names:
        raise ValidationError(f"{path}: no .txt transcripts found")
    dialogues = [load_transcript(os.path.join(path, name)) for name in names]
    return Corpus(name=os.path.basename(os.path.normpath(path)), dialogues=dialogues)
