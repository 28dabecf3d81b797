"""Zero-shot emotion labeling for conversations.

A linear-chain CRF scores conversations against a seen emotion vocabulary
through contrastive prototype similarities; decoding transfers the chain's
evidence onto prototypes of emotions never trained on. Embeddings arrive
precomputed through flat tensor manifests, so the package itself is pure
numpy.
"""

from .avd import (
    DecodeResult,
    attention_viterbi_decode,
    best_path,
    enhance_and_predict,
    nearest_neighbor_predict,
    transfer_probabilities,
    viterbi_scores,
)
from .corpus import (
    NO_LABEL,
    Conversation,
    LabelSet,
    Utterance,
    load_corpus,
    normalize_word,
    save_corpus,
    utterance_key,
    utterance_keys,
    validate_split,
)
from .crf import (
    MASKED,
    TransitionModel,
    crf_gradients,
    log_partition,
    nll_loss,
    position_marginals,
    sequence_score,
)
from .errors import (
    CorpusParseError,
    CorruptionError,
    DegenerateRowError,
    DegenerateVectorError,
    DivergenceError,
    EmocrfError,
    FormatError,
    ManifestError,
    NumericInputError,
    VocabularyError,
)
from .estimator import EmotionTransferCRF
from .gsa import (
    DEFAULT_SIGMA,
    GaussianSelfAttention,
    GsaConfig,
    gaussian_kernel,
    gsa_backward,
    gsa_update,
)
from .led import (
    EmotionPrototype,
    assemble_description,
    build_prompt,
    load_descriptions,
    save_descriptions,
)
from .metrics import EvalReport, LabelScore, prototype_similarity, similarity_csv, weighted_prf
from .oracle import (
    OracleReport,
    all_labelings,
    brute_best_labeling,
    brute_log_partition,
    brute_marginals,
    brute_score,
    run_oracle_suite,
)
from .proto_sim import (
    DEFAULT_TAU,
    SimConfig,
    contrastive_similarity,
    contrastive_similarity_backward,
    cosine_backward,
    cosine_matrix,
)
from .tensor_store import EmbeddingMatrix, find_tensor, read_manifest, write_manifest
from .trainer import (
    AdamW,
    AdapterParams,
    Checkpoint,
    ConversationPrediction,
    EpochStats,
    GradCheckInstance,
    GradCheckReport,
    TrainConfig,
    TrainResult,
    ValidationData,
    apply_adapter,
    conversation_loss,
    conversation_loss_and_grads,
    decode_conversation,
    decode_corpus,
    encode_utterances,
    f32_round,
    gradient_check,
    initialize_adapter,
    load_checkpoint,
    make_instance,
    rows_for_labels,
    save_checkpoint,
    train,
    warmup_lr,
)

__version__ = "0.1.0"
