"""Synthetic zero-shot world used by trainer, CLI and acceptance tests.

Three seen emotions and two unseen ones live in a 16-dim space. Seen
prototypes are orthonormal directions; unseen prototypes lean on their own
fresh directions plus a fixed mixture of the seen ones, so the transfer
mixture actually carries signal. Utterance embeddings are the gold label's
prototype plus Gaussian noise, and gold sequences come from a sticky Markov
chain, giving the transitions something to learn.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from emocrf import (
    Conversation,
    EmbeddingMatrix,
    LabelSet,
    Utterance,
    utterance_key,
    write_manifest,
)

SEEN_WORDS = ("happy", "sad", "angry")
UNSEEN_WORDS = ("excited", "scared")
DIM = 16
# How each unseen emotion leans on the seen prototypes.
UNSEEN_MIX = np.array(
    [
        [0.5, -0.2, 0.1],   # excited: mostly happy-ish
        [-0.1, 0.4, 0.4],   # scared: sad/angry-ish
    ]
)


@dataclass
class ToyWorld:
    seen: LabelSet
    unseen: LabelSet
    train_conversations: list
    test_conversations: list
    train_utterances: EmbeddingMatrix
    test_utterances: EmbeddingMatrix
    seen_prototypes: EmbeddingMatrix
    unseen_prototypes: EmbeddingMatrix


def _directions(rng, count, dim):
    q, _ = np.linalg.qr(rng.normal(size=(dim, count)))
    return q.T  # orthonormal rows


def _markov_labels(rng, length, n, stay=0.55):
    labels = [int(rng.integers(n))]
    for _ in range(length - 1):
        if rng.random() < stay:
            labels.append(labels[-1])
        else:
            others = [j for j in range(n) if j != labels[-1]]
            labels.append(int(others[rng.integers(len(others))]))
    return labels


def _conversations(rng, prefix, count, protos, n_labels, noise, min_len=1, max_len=8):
    convs = []
    rows = []
    keys = []
    for c in range(count):
        length = int(rng.integers(min_len, max_len + 1))
        labels = _markov_labels(rng, length, n_labels)
        utts = []
        for i, lab in enumerate(labels):
            vec = protos[lab] + noise * rng.normal(size=protos.shape[1])
            rows.append(vec)
            utts.append(
                Utterance("utterance {} of {}{}".format(i, prefix, c), "spk", lab)
            )
            keys.append(utterance_key("{}{}".format(prefix, c), i))
        convs.append(Conversation("{}{}".format(prefix, c), utts))
    matrix = np.asarray(rows, dtype=np.float32)
    return convs, matrix, keys


def make_toy_world(seed=0, n_train=40, n_test=12, noise=0.35):
    rng = np.random.default_rng(seed)
    basis = _directions(rng, 5, DIM)
    seen_protos = basis[:3]
    unseen_raw = basis[3:] + UNSEEN_MIX @ seen_protos
    unseen_protos = unseen_raw / np.linalg.norm(unseen_raw, axis=1, keepdims=True)

    seen = LabelSet(SEEN_WORDS, "seen")
    unseen = LabelSet(UNSEEN_WORDS, "unseen")
    train_convs, train_rows, train_keys = _conversations(
        rng, "train", n_train, seen_protos, len(seen), noise
    )
    test_convs, test_rows, test_keys = _conversations(
        rng, "test", n_test, unseen_protos, len(unseen), noise
    )
    return ToyWorld(
        seen=seen,
        unseen=unseen,
        train_conversations=train_convs,
        test_conversations=test_convs,
        train_utterances=EmbeddingMatrix("utterances", train_rows, train_keys),
        test_utterances=EmbeddingMatrix("utterances", test_rows, test_keys),
        seen_prototypes=EmbeddingMatrix(
            "led2", seen_protos.astype(np.float32), SEEN_WORDS
        ),
        unseen_prototypes=EmbeddingMatrix(
            "led2", unseen_protos.astype(np.float32), UNSEEN_WORDS
        ),
    )


def toy_train_config(**overrides):
    from emocrf import TrainConfig

    base = dict(
        learning_rate=1.0e-3,
        batch_size=4,
        epochs=30,
        warmup_steps=20,
        seed=0,
        sigma=0.5,
        tau=0.02,
    )
    base.update(overrides)
    return TrainConfig(**base)


def write_corpus_file(conversations, label_set, path):
    with open(path, "w", encoding="utf-8") as fh:
        for conv in conversations:
            for utt in conv.utterances:
                word = "-" if utt.gold_label is None else label_set.words[utt.gold_label]
                fh.write("\t".join((conv.id, utt.speaker_id, word, utt.text)) + "\n")


def write_descriptions_file(words, path):
    with open(path, "w", encoding="utf-8") as fh:
        for word in words:
            record = {
                "word": word,
                "dict": "a made-up {} feeling used by the tests.".format(word),
                "llm": [
                    "Someone who is {} shows it at once.".format(word),
                    "The {} tone carried through the whole reply.".format(word),
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_toy_cli_layout(world, root):
    """File layout the CLI commands consume; returns a dict of paths."""
    paths = {}
    os.makedirs(root, exist_ok=True)
    paths["train_corpus"] = os.path.join(root, "train.tsv")
    write_corpus_file(world.train_conversations, world.seen, paths["train_corpus"])
    paths["test_corpus"] = os.path.join(root, "test.tsv")
    write_corpus_file(world.test_conversations, world.unseen, paths["test_corpus"])
    paths["seen_descriptions"] = os.path.join(root, "seen.jsonl")
    write_descriptions_file(world.seen.words, paths["seen_descriptions"])
    paths["unseen_descriptions"] = os.path.join(root, "unseen.jsonl")
    write_descriptions_file(world.unseen.words, paths["unseen_descriptions"])
    paths["train_embeddings"] = os.path.join(root, "train_embeddings")
    write_manifest(
        [world.train_utterances, world.seen_prototypes],
        paths["train_embeddings"],
    )
    paths["test_embeddings"] = os.path.join(root, "test_embeddings")
    write_manifest(
        [world.test_utterances, world.unseen_prototypes],
        paths["test_embeddings"],
    )
    paths["checkpoint"] = os.path.join(root, "ckpt")
    paths["predictions"] = os.path.join(root, "predictions.jsonl")
    return paths
