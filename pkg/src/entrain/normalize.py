"""Utterance normalization: tokenize, canonicalize, mask punctuation.

The canonical form of a word token is produced by lowercasing, mapping
British to American spelling, mapping spelled-out number words to digits,
and stemming.  The chain is iterated to a fixed point so that feeding a
canonical form back through the normalizer is a no-op (the raw stemmer on
its own does not guarantee that).

Punctuation tokens are replaced by masks that are unique per instance, so
no n-gram spanning punctuation can ever match another utterance.  Masks are
drawn from a per-dialogue generator seeded from (rng_seed, dialogue_id),
which keeps output deterministic regardless of processing order.  Every
mask starts with ``#``; word canonicals never do, because leading
punctuation is split into its own token.
"""

from __future__ import annotations

import hashlib
import random
import string
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .corpus import Dialogue
from .errors import DictionaryError
from .stem import get_stemmer

_ASCII_PUNCT = set(string.punctuation)

# Iterating lowercase -> spelling -> numbers -> stem must converge fast;
# anything longer indicates a cyclic override map.
_MAX_CANON_ROUNDS = 8


def is_punct_char(ch: str) -> bool:
    if ch in _ASCII_PUNCT:
        return True
    return unicodedata.category(ch).startswith(("P", "S"))


def is_punct_token(surface: str) -> bool:
    return bool(surface) and all(is_punct_char(ch) for ch in surface)


@dataclass(frozen=True)
class NormalizedToken:
    surface: str              # original text of the token
    canonical: str            # normalized form, or the mask for punctuation
    char_span: tuple[int, int]  # [start, end) offsets into the raw utterance
    is_mask: bool = False


@dataclass
class NormalizationConfig:
    spelling_map: dict[str, str] = field(default_factory=dict)
    number_words: dict[str, str] = field(default_factory=dict)
    mask_bits: int = 64
    rng_seed: int = 0
    stemmer: str = "porter"

    @classmethod
    def load(
        cls,
        spelling_path: str | None = None,
        number_path: str | None = None,
        mask_bits: int = 64,
        rng_seed: int = 0,
        stemmer: str = "porter",
    ) -> "NormalizationConfig":
        """Build a config from word-map files, falling back to bundled data."""
        return cls(
            spelling_map=load_word_map(spelling_path, "spelling_gb_us.txt"),
            number_words=load_word_map(number_path, "number_words.txt"),
            mask_bits=mask_bits,
            rng_seed=rng_seed,
            stemmer=stemmer,
        )

    @property
    def stem_fn(self) -> Callable[[str], str]:
        return get_stemmer(self.stemmer)


def load_word_map(path: str | None, bundled_name: str) -> dict[str, str]:
    """Read a two-column word map (``source target`` per line, # comments).

    ``path`` overrides the bundled file of the given name.  Maps must be
    acyclic under repeated application: no target may itself be a source.
    """
    if path is not None:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
        origin = path
    else:
        text = (resources.files("entrain") / "data" / bundled_name).read_text(
            encoding="utf-8"
        )
        origin = bundled_name
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DictionaryError(
                f"{origin}:{lineno}: expected 'source target', got {line!r}"
            )
        source, target = parts[0].lower(), parts[1].lower()
        if source == target:
            continue
        mapping[source] = target
    for target in mapping.values():
        if target in mapping:
            raise DictionaryError(
                f"{origin}: target {target!r} is also a source; "
                "the map must be acyclic"
            )
    return mapping


def tokenize(raw_text: str) -> list[tuple[str, tuple[int, int]]]:
    """Split text into (surface, char_span) tokens.

    Splits on whitespace, then peels leading and trailing punctuation runs
    off each chunk into separate tokens.  Punctuation inside a word (as in
    ``pre-trained``, ``14:00`` or ``we're``) stays attached.
    """
    tokens: list[tuple[str, tuple[int, int]]] = []
    pos = 0
    length = len(raw_text)
    while pos < length:
        if raw_text[pos].isspace():
            pos += 1
            continue
        end = pos
        while end < length and not raw_text[end].isspace():
            end += 1
        chunk = raw_text[pos:end]
        lead = 0
        while lead < len(chunk) and is_punct_char(chunk[lead]):
            lead += 1
        if lead == len(chunk):
            tokens.append((chunk, (pos, end)))
            pos = end
            continue
        trail = len(chunk)
        while trail > lead and is_punct_char(chunk[trail - 1]):
            trail -= 1
        if lead:
            tokens.append((chunk[:lead], (pos, pos + lead)))
        tokens.append((chunk[lead:trail], (pos + lead, pos + trail)))
        if trail < len(chunk):
            tokens.append((chunk[trail:], (pos + trail, end)))
        pos = end
    return tokens


def normalize_token(surface: str, cfg: NormalizationConfig) -> str:
    """Canonical form of a non-punctuation token (idempotent)."""
    stem = cfg.stem_fn
    current = surface.lower()
    for _ in range(_MAX_CANON_ROUNDS):
        step = cfg.spelling_map.get(current, current)
        step = cfg.number_words.get(step, step)
        if step.isalpha():
            step = stem(step)
        if step == current:
            return current
        current = step
    raise DictionaryError(
        f"canonicalization of {surface!r} did not converge; "
        "check the spelling/number maps for cycles"
    )


class MaskGenerator:
    """Produces unique punctuation masks for one dialogue.

    Masks combine an instance counter with ``mask_bits`` pseudo-random bits
    from a generator seeded by (rng_seed, dialogue_id), so annotation output
    is reproducible and no two masks in a run collide.
    """

    def __init__(self, dialogue_id: str, cfg: NormalizationConfig):
        digest = hashlib.sha256(
            f"{cfg.rng_seed}:{dialogue_id}".encode("utf-8")
        ).digest()
        self._rng = random.Random(int.from_bytes(digest, "big"))
        self._bits = cfg.mask_bits
        self._count = 0

    def next_mask(self) -> str:
        value = self._rng.getrandbits(self._bits)
        mask = f"#{self._count}:{value:x}"
        self._count += 1
        return mask


def normalize_utterance_tokens(
    raw_text: str, cfg: NormalizationConfig, masks: MaskGenerator
) -> list[NormalizedToken]:
    out = []
    for surface, span in tokenize(raw_text):
        if is_punct_token(surface):
            out.append(
                NormalizedToken(
                    surface=surface,
                    canonical=masks.next_mask(),
                    char_span=span,
                    is_mask=True,
                )
            )
        else:
            out.append(
                NormalizedToken(
                    surface=surface,
                    canonical=normalize_token(surface, cfg),
                    char_span=span,
                )
            )
    return out


def normalize_dialogue(dialogue: Dialogue, cfg: NormalizationConfig) -> Dialogue:
    """Attach normalized token streams to every utterance, in place."""
    masks = MaskGenerator(dialogue.dialogue_id, cfg)
    for utterance in dialogue.utterances:
        utterance.tokens = normalize_utterance_tokens(
            utterance.raw_text, cfg, masks
        )
    return dialogue
