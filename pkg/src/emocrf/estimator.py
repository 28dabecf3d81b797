"""Scikit-learn style facade over the trainer and decoder.

The estimator holds the training hyperparameters as constructor arguments
(get_params/set_params/clone all behave), and fit stores everything needed
for zero-shot prediction as fitted attributes. Inputs are the package's own
types rather than rectangular arrays: conversations plus embedding matrices,
because one sample here is a variable-length labeled chain.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .metrics import weighted_prf
from .trainer import TrainConfig, decode_corpus, save_checkpoint, train


class EmotionTransferCRF(BaseEstimator):
    """Chain-structured zero-shot emotion labeler.

    Parameters mirror TrainConfig; see that class for meanings. The fitted
    attributes are ``checkpoint_`` (transitions, adapter, stored seen
    prototypes) and ``history_`` (per-epoch loss and validation score).
    """

    def __init__(
        self,
        learning_rate=2.0e-5,
        batch_size=4,
        epochs=10,
        warmup_steps=100,
        weight_decay=0.01,
        seed=0,
        sigma=0.5,
        tau=0.02,
        gsa_mode="gaussian",
        crf_enabled=True,
        adapter_enabled=True,
    ):
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.warmup_steps = warmup_steps
        self.weight_decay = weight_decay
        self.seed = seed
        self.sigma = sigma
        self.tau = tau
        self.gsa_mode = gsa_mode
        self.crf_enabled = crf_enabled
        self.adapter_enabled = adapter_enabled

    def _config(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            warmup_steps=self.warmup_steps,
            weight_decay=self.weight_decay,
            seed=self.seed,
            sigma=self.sigma,
            tau=self.tau,
            gsa_mode=self.gsa_mode,
            crf_enabled=self.crf_enabled,
            adapter_enabled=self.adapter_enabled,
        )

    def fit(self, conversations, labels, utterances, prototypes, validation=None):
        """Train on seen-label conversations.

        conversations: gold-labeled Conversation list
        labels:        seen LabelSet
        utterances:    EmbeddingMatrix keyed by "<conversation_id>:<index>"
        prototypes:    EmbeddingMatrix keyed by label words
        validation:    optional trainer.ValidationData
        """
        result = train(
            conversations, labels, utterances, prototypes, self._config(), validation
        )
        self.checkpoint_ = result.checkpoint
        self.history_ = result.history
        return self

    def _require_fitted(self):
        if not hasattr(self, "checkpoint_"):
            raise ValueError("this estimator is not fitted yet; call fit first")

    def decode(
        self, conversations, utterances, unseen_labels, unseen_prototypes,
        clamp_negative=False,
    ):
        """Per-conversation predictions with full decode detail."""
        self._require_fitted()
        return decode_corpus(
            conversations,
            utterances,
            self.checkpoint_,
            unseen_labels,
            unseen_prototypes,
            clamp_negative,
        )

    def predict(self, conversations, utterances, unseen_labels, unseen_prototypes):
        """List of per-conversation arrays of unseen label ids."""
        return [
            r.unseen_pred
            for r in self.decode(
                conversations, utterances, unseen_labels, unseen_prototypes
            )
        ]

    def score(self, conversations, utterances, unseen_labels, unseen_prototypes):
        """Weighted F1 over utterances whose gold label is unseen."""
        preds = self.predict(
            conversations, utterances, unseen_labels, unseen_prototypes
        )
        golds = []
        flat = []
        for conv, pred in zip(conversations, preds):
            for i, utt in enumerate(conv.utterances):
                if utt.gold_label is not None:
                    golds.append(utt.gold_label)
                    flat.append(int(pred[i]))
        return weighted_prf(
            np.asarray(golds), np.asarray(flat), len(unseen_labels)
        ).weighted_f1

    def save(self, directory):
        self._require_fitted()
        return save_checkpoint(self.checkpoint_, directory)
