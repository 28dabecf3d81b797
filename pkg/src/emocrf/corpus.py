"""Conversation corpus records and the tab-separated line format.

One record per line, UTF-8:

    conversation_id <TAB> speaker_id <TAB> label_word_or_- <TAB> text

A bare ``-`` in the label field means the gold label is absent. All records
of one conversation must be contiguous; utterance order inside a conversation
is file order. Emotion words are matched against the active label set
case-insensitively after trimming. Speaker ids are carried through for
provenance and never consumed by the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import CorpusParseError, VocabularyError

NO_LABEL = "-"


def normalize_word(word):
    """Canonical matching key for an emotion word: trimmed, lower case."""
    return word.strip().lower()


@dataclass(frozen=True)
class LabelSet:
    """An ordered emotion vocabulary, either the seen or the unseen side.

    Words keep their surface form; matching happens on the normalized key.
    A seen set needs at least two labels (a transition matrix over a single
    state has nothing to learn), an unseen set needs at least one.
    """

    words: tuple
    role: str = "seen"

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(w.strip() for w in self.words))
        if self.role not in ("seen", "unseen"):
            raise ValueError("label set role must be 'seen' or 'unseen'")
        if any(not w for w in self.words):
            raise ValueError("label words must be non-empty")
        keys = [normalize_word(w) for w in self.words]
        if len(set(keys)) != len(keys):
            dupes = sorted({k for k in keys if keys.count(k) > 1})
            raise ValueError("duplicate label words: {}".format(dupes))
        minimum = 2 if self.role == "seen" else 1
        if len(self.words) < minimum:
            raise ValueError(
                "a {} label set needs at least {} words, got {}".format(
                    self.role, minimum, len(self.words)
                )
            )
        object.__setattr__(
            self, "_lookup", {k: i for i, k in enumerate(keys)}
        )

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def index_of(self, word):
        key = normalize_word(word)
        idx = self._lookup.get(key)
        if idx is None:
            raise VocabularyError(
                "emotion word {!r} is not in the {} label set {}".format(
                    word, self.role, list(self.words)
                )
            )
        return idx

    def __contains__(self, word):
        return normalize_word(word) in self._lookup


@dataclass(frozen=True)
class Utterance:
    text: str
    speaker_id: str = ""
    gold_label: Optional[int] = None

    def __post_init__(self):
        if not self.text:
            raise ValueError("utterance text must be non-empty")
        # Tabs in text survive a round trip (the parser splits only the first
        # three fields); line breaks cannot be represented.
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("utterance text may not contain line breaks")
        if "\t" in self.speaker_id or "\n" in self.speaker_id:
            raise ValueError("speaker id may not contain tabs or line breaks")
        if self.gold_label is not None and self.gold_label < 0:
            raise ValueError("gold label id must be non-negative")


@dataclass(frozen=True)
class Conversation:
    id: str
    utterances: tuple

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if not self.id:
            raise ValueError("conversation id must be non-empty")
        if "\t" in self.id or "\n" in self.id:
            raise ValueError("conversation id may not contain tabs or line breaks")
        if len(self.utterances) == 0:
            raise ValueError("a conversation needs at least one utterance")

    def __len__(self):
        return len(self.utterances)


def utterance_key(conversation_id, index):
    """Row key for one utterance inside an embedding manifest."""
    return "{}:{}".format(conversation_id, index)


def utterance_keys(conversation):
    return [utterance_key(conversation.id, i) for i in range(len(conversation))]


def load_corpus(path, label_set):
    """Parse a corpus file into a list of conversations.

    Gold label words resolve to indices into ``label_set``; unknown words
    raise VocabularyError with the word and line number. Malformed lines,
    empty mandatory fields, and a conversation id that reappears after a
    different one raise CorpusParseError with the line number. An empty file
    is an empty corpus.
    """
    conversations = []
    current_id = None
    current_utts = []
    finished_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            parts = line.split("\t", 3)
            if len(parts) != 4:
                raise CorpusParseError(
                    "expected 4 tab-separated fields, got {}".format(len(parts)),
                    line_no,
                )
            conv_id, speaker, label_word, text = parts
            if not conv_id:
                raise CorpusParseError("empty conversation id", line_no)
            if not text:
                raise CorpusParseError("empty utterance text", line_no)
            if label_word == NO_LABEL:
                gold = None
            else:
                try:
                    gold = label_set.index_of(label_word)
                except VocabularyError as exc:
                    raise VocabularyError(
                        "line {}: {}".format(line_no, exc)
                    ) from None
            if conv_id != current_id:
                if conv_id in finished_ids:
                    raise CorpusParseError(
                        "conversation {!r} is not contiguous".format(conv_id),
                        line_no,
                    )
                if current_id is not None:
                    conversations.append(Conversation(current_id, current_utts))
                    finished_ids.add(current_id)
                current_id = conv_id
                current_utts = []
            current_utts.append(Utterance(text, speaker, gold))
    if current_id is not None:
        conversations.append(Conversation(current_id, current_utts))
    return conversations


def save_corpus(conversations, label_set, path):
    """Serialize conversations back to the line format.

    Label ids are written as the label set's surface words, absent labels as
    ``-``. Loading the result with the same label set reproduces the input.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for conv in conversations:
            for utt in conv.utterances:
                if utt.gold_label is None:
                    word = NO_LABEL
                else:
                    word = label_set.words[utt.gold_label]
                fh.write(
                    "\t".join((conv.id, utt.speaker_id, word, utt.text)) + "\n"
                )


def validate_split(seen, unseen):
    """Words shared between two label sets, normalized; empty means disjoint.

    Overlap is reported rather than raised: which side drops the shared
    words is an experiment-design decision, not a parsing fault.
    """
    seen_keys = {normalize_word(w) for w in seen.words}
    shared = [
        normalize_word(w)
        for w in unseen.words
        if normalize_word(w) in seen_keys
    ]
    return tuple(sorted(set(shared)))
