"""Training loop, checkpoints, decoding helpers, and gradient checking.

The encoders that produced the embeddings are frozen and external; what
trains here is the chain transition matrix plus a shared affine adapter

    adapt(x) = W x + b          W initialized near identity, b at zero

applied to utterance rows before the self-attention step and to every
prototype row before similarities are taken. The adapter is the stand-in
for encoder fine-tuning: one linear map, shared across all inputs.

Loss per conversation is the chain negative log-likelihood of the gold seen
labels (or, with the chain disabled, per-utterance cross-entropy over the
similarity rows). Batch loss is the plain sum over the batch, gradients are
accumulated in batch order, and parameters move under AdamW (decoupled decay
0.01, beta1 0.9, beta2 0.999, eps 1e-8) with a linear learning-rate warmup.

All randomness (transition init, adapter init, epoch shuffles) flows from
one np.random.default_rng(seed) in a fixed draw order, so equal seeds give
bit-identical checkpoints. Saved checkpoints quantize parameters to float32
(the storage dtype); train() returns the quantized values too, which makes
save -> load -> predict reproduce the returned model bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .avd import DecodeResult, attention_viterbi_decode, nearest_neighbor_predict
from .corpus import normalize_word, utterance_keys
from .crf import TransitionModel, crf_gradients, nll_loss
from .errors import DivergenceError, FormatError, ManifestError, NumericInputError
from .gsa import GsaConfig, gsa_backward, gsa_update
from .metrics import weighted_prf
from .numeric import logsumexp, softmax
from .proto_sim import (
    SimConfig,
    contrastive_similarity,
    contrastive_similarity_backward,
    cosine_backward,
    cosine_matrix,
)
from .tensor_store import EmbeddingMatrix, find_tensor, read_manifest, write_manifest
from .validation import check_finite, check_label_sequence

CONFIG_FILE = "config.json"
CHECKPOINT_FORMAT = "emocrf-checkpoint"


def f32_round(a):
    """Quantize to the float32 grid, kept as float64 for the math."""
    return np.asarray(a, dtype=np.float64).astype(np.float32).astype(np.float64)


@dataclass(eq=False)
class AdapterParams:
    """Shared affine map over embedding rows."""

    w: np.ndarray
    b: np.ndarray
    enabled: bool = True

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.w.ndim != 2 or self.w.shape[0] != self.w.shape[1]:
            raise ValueError("adapter W must be square, got {}".format(self.w.shape))
        if self.b.shape != (self.w.shape[0],):
            raise ValueError(
                "adapter b must have shape ({},), got {}".format(
                    self.w.shape[0], self.b.shape
                )
            )

    @property
    def dim(self):
        return self.w.shape[0]


def initialize_adapter(dim, rng, enabled=True):
    # The draw happens even when disabled so toggling the ablation flag does
    # not shift the rng stream consumed by the epoch shuffles afterwards.
    noise = rng.uniform(-0.01, 0.01, size=(dim, dim))
    w = np.eye(dim) + noise if enabled else np.eye(dim)
    return AdapterParams(w, np.zeros(dim), enabled)


def apply_adapter(rows, adapter):
    """Rows through the affine map; identity when the adapter is disabled."""
    rows = np.asarray(rows, dtype=np.float64)
    if not adapter.enabled:
        return rows.copy()
    if rows.shape[1] != adapter.dim:
        raise ValueError(
            "adapter width {} does not match rows of width {}".format(
                adapter.dim, rows.shape[1]
            )
        )
    return rows @ adapter.w.T + adapter.b


@dataclass
class TrainConfig:
    learning_rate: float = 2.0e-5
    batch_size: int = 4
    epochs: int = 10
    warmup_steps: int = 100
    weight_decay: float = 0.01
    seed: int = 0
    sigma: float = 0.5
    tau: float = 0.02
    led_mode: str = "full"       # full | dict_only | word_only
    desc_count: int = 2          # generated sentences used in full mode
    gsa_mode: str = "gaussian"   # gaussian | plain | off
    crf_enabled: bool = True
    adapter_enabled: bool = True

    def __post_init__(self):
        if not (self.learning_rate > 0):
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be at least 1")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be non-negative")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if not (self.sigma > 0) or not (self.tau > 0):
            raise ValueError("sigma and tau must be positive")
        if self.led_mode not in ("full", "dict_only", "word_only"):
            raise ValueError("unknown led_mode {!r}".format(self.led_mode))
        if self.desc_count not in (1, 2, 3):
            raise ValueError("desc_count must be 1, 2 or 3")
        if self.gsa_mode not in ("gaussian", "plain", "off"):
            raise ValueError("unknown gsa_mode {!r}".format(self.gsa_mode))

    def prototype_tensor_name(self):
        """Tensor naming convention shared with the embedding tooling."""
        if self.led_mode == "full":
            return "led{}".format(self.desc_count)
        return self.led_mode

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc):
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - fields
        if unknown:
            raise FormatError(
                "unknown training config keys: {}".format(sorted(unknown))
            )
        return cls(**doc)


def warmup_lr(step, cfg):
    """Effective learning rate at 1-based optimizer step ``step``."""
    if cfg.warmup_steps <= 0 or step >= cfg.warmup_steps:
        return cfg.learning_rate
    return cfg.learning_rate * step / cfg.warmup_steps


class AdamW:
    """Decoupled weight-decay Adam over named numpy parameters.

    The learning rate arrives per step (the schedule lives outside). When a
    mask is given, masked entries are left untouched entirely: no decay, no
    adaptive update.
    """

    def __init__(self, beta1=0.9, beta2=0.999, eps=1.0e-8, weight_decay=0.01):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self._m = {}
        self._v = {}
        self._t = {}

    def step(self, name, param, grad, lr, mask=None):
        m = self._m.setdefault(name, np.zeros_like(param))
        v = self._v.setdefault(name, np.zeros_like(param))
        t = self._t.get(name, 0) + 1
        self._t[name] = t
        m *= self.beta1
        m += (1.0 - self.beta1) * grad
        v *= self.beta2
        v += (1.0 - self.beta2) * grad * grad
        m_hat = m / (1.0 - self.beta1**t)
        v_hat = v / (1.0 - self.beta2**t)
        update = lr * (m_hat / (np.sqrt(v_hat) + self.eps) + self.weight_decay * param)
        if mask is None:
            param -= update
        else:
            keep = ~mask
            param[keep] -= update[keep]


def rows_for_labels(matrix, label_set):
    """Prototype rows from an EmbeddingMatrix, ordered like the label set.

    Row keys and label words are matched case-insensitively after trimming.
    """
    lookup = {}
    for i, key in enumerate(matrix.row_keys):
        lookup.setdefault(normalize_word(key), i)
    idx = []
    for word in label_set.words:
        j = lookup.get(normalize_word(word))
        if j is None:
            raise ManifestError(
                "no prototype row for label {!r} in tensor {!r}".format(
                    word, matrix.name
                )
            )
        idx.append(j)
    return matrix.data[idx]


def conversation_matrix(utterances, conversation):
    """Float64 embedding rows for one conversation, in utterance order."""
    return utterances.take(utterance_keys(conversation)).astype(np.float64)


def encode_utterances(h_raw, adapter, gsa_cfg):
    """Adapter then self-attention: the inference-side utterance encoder."""
    return gsa_update(apply_adapter(h_raw, adapter), gsa_cfg)


def _cross_entropy(logits, gold):
    lse = logsumexp(logits, axis=1)
    picked = logits[np.arange(logits.shape[0]), gold]
    return float(np.sum(lse - picked))


def conversation_loss(h_raw, p_raw, gold, tm, adapter, gsa_cfg, sim_cfg, crf_enabled=True):
    """Scalar training loss of one conversation (forward only)."""
    gold = check_label_sequence(gold, tm.n, np.asarray(h_raw).shape[0])
    h_utte = encode_utterances(h_raw, adapter, gsa_cfg)
    p_a = apply_adapter(p_raw, adapter)
    if crf_enabled:
        s = contrastive_similarity(h_utte, p_a, sim_cfg)
        return nll_loss(s, tm, gold)
    cos = cosine_matrix(h_utte, p_a, "utterance", "prototype")
    return _cross_entropy(cos / sim_cfg.tau, gold)


def conversation_loss_and_grads(
    h_raw, p_raw, gold, tm, adapter, gsa_cfg, sim_cfg, crf_enabled=True
):
    """Loss plus analytic gradients for (transitions, adapter W, adapter b).

    The transition gradient is returned on the full square matrix with zeros
    at masked entries; adapter gradients are zero matrices when the adapter
    is disabled.
    """
    h_raw = np.asarray(h_raw, dtype=np.float64)
    p_raw = np.asarray(p_raw, dtype=np.float64)
    gold = check_label_sequence(gold, tm.n, h_raw.shape[0])
    h_a = apply_adapter(h_raw, adapter)
    p_a = apply_adapter(p_raw, adapter)
    h_utte = gsa_update(h_a, gsa_cfg)
    if crf_enabled:
        s = contrastive_similarity(h_utte, p_a, sim_cfg)
        loss = nll_loss(s, tm, gold)
        grad_s, grad_t = crf_gradients(s, tm, gold)
        grad_hu, grad_pa = contrastive_similarity_backward(h_utte, p_a, grad_s, sim_cfg)
    else:
        cos = cosine_matrix(h_utte, p_a, "utterance", "prototype")
        logits = cos / sim_cfg.tau
        loss = _cross_entropy(logits, gold)
        grad_logits = softmax(logits, axis=-1)
        grad_logits[np.arange(logits.shape[0]), gold] -= 1.0
        grad_t = np.zeros_like(tm.matrix)
        grad_hu, grad_pa = cosine_backward(h_utte, p_a, grad_logits / sim_cfg.tau)
    grad_ha = gsa_backward(h_a, grad_hu, gsa_cfg)
    if adapter.enabled:
        grad_w = grad_ha.T @ h_raw + grad_pa.T @ p_raw
        grad_b = grad_ha.sum(axis=0) + grad_pa.sum(axis=0)
    else:
        grad_w = np.zeros((h_raw.shape[1], h_raw.shape[1]))
        grad_b = np.zeros(h_raw.shape[1])
    return loss, grad_t, grad_w, grad_b


@dataclass(eq=False)
class Checkpoint:
    """Everything needed to decode new conversations."""

    transitions: TransitionModel
    adapter: AdapterParams
    config: TrainConfig
    seen_labels: tuple
    seen_prototypes: np.ndarray  # float32 rows, label order
    epoch: int = 0
    validation_wf1: Optional[float] = None


@dataclass
class EpochStats:
    epoch: int
    mean_nll: float
    validation_wf1: Optional[float] = None


@dataclass(eq=False)
class TrainResult:
    checkpoint: Checkpoint
    history: list


@dataclass(eq=False)
class ValidationData:
    """A zero-shot development set scored after every epoch."""

    conversations: list
    labels: object            # unseen LabelSet
    utterances: EmbeddingMatrix
    prototypes: EmbeddingMatrix


def _gold_sequence(conversation, where):
    gold = []
    for i, utt in enumerate(conversation.utterances):
        if utt.gold_label is None:
            raise ValueError(
                "{} conversation {!r} utterance {} has no gold label".format(
                    where, conversation.id, i
                )
            )
        gold.append(utt.gold_label)
    return np.asarray(gold, dtype=np.int64)


def decode_conversation(
    h_raw, ckpt_like, seen_protos_raw, unseen_protos_raw, clamp_negative=False
):
    """Decode one conversation given raw float64 embedding rows.

    ``ckpt_like`` needs .transitions, .adapter and .config. Returns the avd
    DecodeResult when the chain is enabled, otherwise a result whose chain
    fields are None and whose predictions come from plain cosine matching.
    """
    cfg = ckpt_like.config
    gsa_cfg = GsaConfig(cfg.sigma, cfg.gsa_mode)
    sim_cfg = SimConfig(cfg.tau)
    adapter = ckpt_like.adapter
    h_utte = encode_utterances(h_raw, adapter, gsa_cfg)
    p_uns = apply_adapter(np.asarray(unseen_protos_raw, dtype=np.float64), adapter)
    if not cfg.crf_enabled:
        pred, cos = nearest_neighbor_predict(h_utte, p_uns)
        return DecodeResult(None, None, None, h_utte, pred, cos)
    p_seen = apply_adapter(np.asarray(seen_protos_raw, dtype=np.float64), adapter)
    s = contrastive_similarity(h_utte, p_seen, sim_cfg)
    return attention_viterbi_decode(
        h_utte, s, ckpt_like.transitions, p_seen, p_uns, clamp_negative
    )


def _validation_score(validation, tm, adapter, cfg, p_seen_raw):
    unseen_raw = rows_for_labels(validation.prototypes, validation.labels)
    holder = _CkptView(tm, adapter, cfg)
    golds = []
    preds = []
    for conv in validation.conversations:
        h_raw = conversation_matrix(validation.utterances, conv)
        result = decode_conversation(h_raw, holder, p_seen_raw, unseen_raw)
        for i, utt in enumerate(conv.utterances):
            if utt.gold_label is not None:
                golds.append(utt.gold_label)
                preds.append(int(result.unseen_pred[i]))
    if not golds:
        return 0.0
    return weighted_prf(golds, preds, len(validation.labels)).weighted_f1


class _CkptView:
    """Duck-typed stand-in for Checkpoint during training-time validation."""

    def __init__(self, transitions, adapter, config):
        self.transitions = transitions
        self.adapter = adapter
        self.config = config


def train(conversations, labels, utterances, prototypes, cfg, validation=None, log=None):
    """Fit transitions and adapter; return the retained checkpoint + history.

    When ``validation`` is given, the checkpoint with the best validation
    weighted F1 is retained (earliest epoch wins ties); otherwise the final
    epoch is kept. The returned parameters are already float32-quantized,
    identical to what save_checkpoint writes.
    """
    if labels.role != "seen":
        raise ValueError("training needs the seen label set")
    conversations = list(conversations)
    if not conversations:
        raise ValueError("training corpus is empty")
    n = len(labels)
    proto32 = rows_for_labels(prototypes, labels)
    p_raw = proto32.astype(np.float64)
    dim = p_raw.shape[1]
    if utterances.dim != dim:
        raise ValueError(
            "utterance width {} does not match prototype width {}".format(
                utterances.dim, dim
            )
        )
    conv_mats = [conversation_matrix(utterances, c) for c in conversations]
    golds = [_gold_sequence(c, "training") for c in conversations]
    # Inputs are checked once here; a NumericInputError later in the loop can
    # therefore only mean parameters blew up, which is divergence.
    check_finite(p_raw, "prototype matrix")
    for conv, mat in zip(conversations, conv_mats):
        check_finite(mat, "utterances of conversation {!r}".format(conv.id))

    rng = np.random.default_rng(cfg.seed)
    tm = TransitionModel.initialize(n, rng)
    adapter = initialize_adapter(dim, rng, cfg.adapter_enabled)
    gsa_cfg = GsaConfig(cfg.sigma, cfg.gsa_mode)
    sim_cfg = SimConfig(cfg.tau)
    opt = AdamW(weight_decay=cfg.weight_decay)

    history = []
    best = None  # (wf1 or None, epoch, T copy, W copy, b copy)
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(conversations))
        epoch_loss = 0.0
        for batch_no, lo in enumerate(range(0, len(order), cfg.batch_size)):
            batch = order[lo : lo + cfg.batch_size]
            batch_loss = 0.0
            grad_t = np.zeros_like(tm.matrix)
            grad_w = np.zeros((dim, dim))
            grad_b = np.zeros(dim)
            for ci in batch:
                try:
                    loss, g_t, g_w, g_b = conversation_loss_and_grads(
                        conv_mats[ci],
                        p_raw,
                        golds[ci],
                        tm,
                        adapter,
                        gsa_cfg,
                        sim_cfg,
                        cfg.crf_enabled,
                    )
                except NumericInputError as exc:
                    raise DivergenceError(batch_no, epoch) from exc
                batch_loss += loss
                grad_t += g_t
                grad_w += g_w
                grad_b += g_b
            if not np.isfinite(batch_loss):
                raise DivergenceError(batch_no, epoch)
            epoch_loss += batch_loss
            step += 1
            lr = warmup_lr(step, cfg)
            if cfg.crf_enabled:
                opt.step("transitions", tm.matrix, grad_t, lr, mask=tm.mask)
            if adapter.enabled:
                opt.step("adapter_w", adapter.w, grad_w, lr)
                opt.step("adapter_b", adapter.b, grad_b, lr)
        mean_nll = epoch_loss / len(conversations)
        val_wf1 = None
        if validation is not None:
            val_wf1 = _validation_score(validation, tm, adapter, cfg, p_raw)
        history.append(EpochStats(epoch, mean_nll, val_wf1))
        if log is not None:
            line = "epoch {:d} mean_nll {:.6f}".format(epoch, mean_nll)
            if val_wf1 is not None:
                line += " val_wf1 {:.6f}".format(val_wf1)
            log(line)
        if validation is not None:
            if best is None or val_wf1 > best[0]:
                best = (val_wf1, epoch, tm.matrix.copy(), adapter.w.copy(), adapter.b.copy())
    if best is None:
        best = (None, cfg.epochs - 1, tm.matrix.copy(), adapter.w.copy(), adapter.b.copy())

    wf1, kept_epoch, t_mat, w_mat, b_vec = best
    checkpoint = Checkpoint(
        transitions=TransitionModel(n, f32_round(t_mat)),
        adapter=AdapterParams(f32_round(w_mat), f32_round(b_vec), adapter.enabled),
        config=cfg,
        seen_labels=tuple(labels.words),
        seen_prototypes=proto32.copy(),
        epoch=kept_epoch,
        validation_wf1=wf1,
    )
    return TrainResult(checkpoint, history)


def save_checkpoint(ckpt, directory):
    """Write a checkpoint directory: two tensor manifests plus config.json.

    Transitions get their own manifest (their width is label count + 2, not
    the embedding width); adapter weights and the stored seen prototypes
    share the embedding-width manifest.
    """
    os.makedirs(directory, exist_ok=True)
    n = ckpt.transitions.n
    state_keys = ["<start>"] + list(ckpt.seen_labels) + ["<end>"]
    write_manifest(
        [
            EmbeddingMatrix(
                "transitions",
                ckpt.transitions.matrix.astype(np.float32),
                state_keys,
            )
        ],
        os.path.join(directory, "transitions"),
    )
    dim = ckpt.adapter.dim
    write_manifest(
        [
            EmbeddingMatrix(
                "adapter_w",
                ckpt.adapter.w.astype(np.float32),
                [str(i) for i in range(dim)],
            ),
            EmbeddingMatrix(
                "adapter_b", ckpt.adapter.b.astype(np.float32).reshape(1, dim), ["bias"]
            ),
            EmbeddingMatrix(
                "seen_prototypes",
                np.asarray(ckpt.seen_prototypes, dtype=np.float32),
                list(ckpt.seen_labels),
            ),
        ],
        os.path.join(directory, "params"),
    )
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": 1,
        "config": ckpt.config.to_dict(),
        "seen_labels": list(ckpt.seen_labels),
        "epoch": ckpt.epoch,
        "validation_wf1": ckpt.validation_wf1,
    }
    path = os.path.join(directory, CONFIG_FILE)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return path


def load_checkpoint(directory):
    path = os.path.join(directory, CONFIG_FILE)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != 1:
        raise FormatError("not a recognized checkpoint config: {}".format(path))
    cfg = TrainConfig.from_dict(doc["config"])
    seen_labels = tuple(doc["seen_labels"])
    trans = find_tensor(
        read_manifest(os.path.join(directory, "transitions")), "transitions"
    )
    params = read_manifest(os.path.join(directory, "params"))
    w = find_tensor(params, "adapter_w")
    b = find_tensor(params, "adapter_b")
    protos = find_tensor(params, "seen_prototypes")
    n = len(seen_labels)
    if trans.data.shape != (n + 2, n + 2):
        raise FormatError(
            "transition tensor shape {} does not fit {} labels".format(
                trans.data.shape, n
            )
        )
    tm = TransitionModel(n, trans.data.astype(np.float64))
    adapter = AdapterParams(
        w.data.astype(np.float64),
        b.data.astype(np.float64).reshape(-1),
        enabled=cfg.adapter_enabled,
    )
    return Checkpoint(
        transitions=tm,
        adapter=adapter,
        config=cfg,
        seen_labels=seen_labels,
        seen_prototypes=protos.data.copy(),
        epoch=int(doc["epoch"]),
        validation_wf1=doc["validation_wf1"],
    )


@dataclass(eq=False)
class ConversationPrediction:
    conversation_id: str
    unseen_pred: np.ndarray
    unseen_cosines: np.ndarray
    h_prime: np.ndarray = None
    transfer: Optional[np.ndarray] = None
    seen_path: Optional[np.ndarray] = None


def decode_corpus(
    conversations, utterances, ckpt, unseen_labels, unseen_prototypes, clamp_negative=False
):
    """Decode a corpus against an unseen vocabulary using a checkpoint."""
    unseen_raw = rows_for_labels(unseen_prototypes, unseen_labels)
    seen_raw = np.asarray(ckpt.seen_prototypes, dtype=np.float64)
    out = []
    for conv in conversations:
        h_raw = conversation_matrix(utterances, conv)
        result = decode_conversation(
            h_raw, ckpt, seen_raw, unseen_raw, clamp_negative
        )
        out.append(
            ConversationPrediction(
                conv.id,
                np.asarray(result.unseen_pred, dtype=np.int64),
                result.unseen_cosines,
                result.h_prime,
                result.transfer,
                result.seen_path,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Finite-difference gradient checking
# ---------------------------------------------------------------------------

REL_FLOOR = 1.0e-4  # gradients below this magnitude are compared absolutely


@dataclass(eq=False)
class GradCheckInstance:
    h: np.ndarray
    p: np.ndarray
    gold: np.ndarray
    tm: TransitionModel
    adapter: AdapterParams
    gsa_cfg: GsaConfig
    sim_cfg: SimConfig
    crf_enabled: bool = True


def make_instance(
    seed,
    n_utts=None,
    n_labels=None,
    dim=None,
    adapter_enabled=True,
    crf_enabled=True,
    gsa_mode="gaussian",
    sigma=None,
    tau=None,
):
    """Small random instance for gradient checking (N <= 6, n <= 4, d <= 8)."""
    rng = np.random.default_rng(seed)
    n_utts = n_utts if n_utts is not None else int(rng.integers(1, 7))
    n_labels = n_labels if n_labels is not None else int(rng.integers(2, 5))
    dim = dim if dim is not None else int(rng.integers(3, 9))
    h = rng.normal(size=(n_utts, dim))
    p = rng.normal(size=(n_labels, dim))
    gold = rng.integers(0, n_labels, size=n_utts)
    tm = TransitionModel.initialize(n_labels, rng)
    adapter = initialize_adapter(dim, rng, adapter_enabled)
    sigma = float(rng.uniform(0.4, 2.0)) if sigma is None else sigma
    tau = float(rng.uniform(0.2, 1.0)) if tau is None else tau
    return GradCheckInstance(
        h, p, gold, tm, adapter, GsaConfig(sigma, gsa_mode), SimConfig(tau), crf_enabled
    )


@dataclass
class BlockCheck:
    name: str
    max_rel_err: float
    max_abs_err: float
    max_abs_analytic: float


@dataclass(eq=False)
class GradCheckReport:
    blocks: dict
    tolerance: float

    @property
    def passed(self):
        return all(b.max_rel_err <= self.tolerance for b in self.blocks.values())

    def lines(self):
        out = []
        for b in self.blocks.values():
            out.append(
                "  {:<12s} max_rel_err {:.3e}  max_abs_err {:.3e}  max_|grad| {:.3e}".format(
                    b.name, b.max_rel_err, b.max_abs_err, b.max_abs_analytic
                )
            )
        out.append("tolerance {:.1e}: {}".format(self.tolerance, "PASS" if self.passed else "FAIL"))
        return out


def gradient_check(instance, tolerance=1.0e-4, step=1.0e-5):
    """Compare analytic gradients against central finite differences.

    Relative error uses max(|analytic|, |numeric|, REL_FLOOR) as denominator,
    so entries smaller than the floor are effectively held to an absolute
    tolerance of tolerance * REL_FLOOR. Blocks for disabled components are
    absent from the report.
    """
    inst = instance

    def loss_now():
        return conversation_loss(
            inst.h,
            inst.p,
            inst.gold,
            inst.tm,
            inst.adapter,
            inst.gsa_cfg,
            inst.sim_cfg,
            inst.crf_enabled,
        )

    _, grad_t, grad_w, grad_b = conversation_loss_and_grads(
        inst.h,
        inst.p,
        inst.gold,
        inst.tm,
        inst.adapter,
        inst.gsa_cfg,
        inst.sim_cfg,
        inst.crf_enabled,
    )

    def central(param, idx):
        orig = param[idx]
        param[idx] = orig + step
        up = loss_now()
        param[idx] = orig - step
        down = loss_now()
        param[idx] = orig
        return (up - down) / (2.0 * step)

    def check_block(name, param, analytic, indices):
        max_rel = 0.0
        max_abs = 0.0
        for idx in indices:
            numeric = central(param, idx)
            a = analytic[idx]
            diff = abs(a - numeric)
            rel = diff / max(abs(a), abs(numeric), REL_FLOOR)
            max_rel = max(max_rel, rel)
            max_abs = max(max_abs, diff)
        return BlockCheck(name, max_rel, max_abs, float(np.max(np.abs(analytic))))

    blocks = {}
    if inst.crf_enabled:
        legal = np.argwhere(~inst.tm.mask)
        blocks["transitions"] = check_block(
            "transitions", inst.tm.matrix, grad_t, [tuple(i) for i in legal]
        )
    if inst.adapter.enabled:
        dim = inst.adapter.dim
        blocks["adapter_w"] = check_block(
            "adapter_w",
            inst.adapter.w,
            grad_w,
            [(i, j) for i in range(dim) for j in range(dim)],
        )
        blocks["adapter_b"] = check_block(
            "adapter_b", inst.adapter.b, grad_b, [(i,) for i in range(dim)]
        )
    return GradCheckReport(blocks, tolerance)
