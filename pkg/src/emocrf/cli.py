"""Command-line interface.

Commands:
  train      fit transitions + adapter from a seen-label corpus
  predict    decode a corpus against an unseen vocabulary
  eval       score a prediction file against gold labels
  gradcheck  finite-difference check of the analytic gradients
  inspect    prototype similarity CSV and enhanced-vector export
  oracle     brute-force agreement check of the chain computations

Exit codes: 0 success, 2 usage errors (bad flags, missing input paths),
1 anything that fails after inputs were accepted. The default seed comes
from EMOCRF_SEED when set.

Embedding manifests follow a naming convention: the utterance tensor is
called "utterances" and prototype tensors are named after the description
mode that produced them ("led2" is the default full mode with two generated
sentences; "led1", "led3", "dict_only" and "word_only" are the ablations).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .corpus import LabelSet, load_corpus, utterance_key
from .errors import EmocrfError, FormatError
from .led import load_descriptions
from .metrics import prototype_similarity, similarity_csv, weighted_prf
from .oracle import run_oracle_suite
from .tensor_store import EmbeddingMatrix, find_tensor, read_manifest, write_manifest
from .trainer import (
    TrainConfig,
    ValidationData,
    decode_corpus,
    gradient_check,
    load_checkpoint,
    make_instance,
    rows_for_labels,
    save_checkpoint,
    train,
)

ENV_SEED = "EMOCRF_SEED"
UTTERANCE_TENSOR = "utterances"


class UsageError(Exception):
    """Bad flag combinations or unusable option values; exits with 2."""


def _default_seed():
    value = os.environ.get(ENV_SEED)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise UsageError(
            "{} must be an integer, got {!r}".format(ENV_SEED, value)
        ) from None


def _load_label_side(descriptions_path, role):
    protos = load_descriptions(descriptions_path)
    if not protos:
        raise FormatError(
            "description file {} has no records".format(descriptions_path)
        )
    return LabelSet(tuple(p.word for p in protos), role)


def _config_from_args(args, seed):
    led_mode = "dict_only" if args.no_led else "full"
    gsa_mode = "off" if args.no_gsa else ("plain" if args.plain_sa else "gaussian")
    return TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        warmup_steps=args.warmup_steps,
        weight_decay=args.weight_decay,
        seed=seed,
        sigma=1.0,  # placeholder, replaced per sweep value below
        tau=args.tau,
        led_mode=led_mode,
        desc_count=args.desc_count,
        gsa_mode=gsa_mode,
        crf_enabled=not args.no_crf,
        adapter_enabled=not args.no_adapter,
    )


def cmd_train(args):
    seed = args.seed if args.seed is not None else _default_seed()
    base_cfg = _config_from_args(args, seed)
    sigmas = args.sigma if args.sigma else [0.5]

    labels = _load_label_side(args.descriptions, "seen")
    conversations = load_corpus(args.corpus, labels)
    tensors = read_manifest(args.embeddings)
    utterances = find_tensor(tensors, UTTERANCE_TENSOR)
    prototypes = find_tensor(tensors, base_cfg.prototype_tensor_name())

    validation = None
    val_flags = (args.val_corpus, args.val_embeddings, args.val_descriptions)
    if any(v is not None for v in val_flags):
        if not all(v is not None for v in val_flags):
            raise UsageError(
                "--val-corpus, --val-embeddings and --val-descriptions "
                "must be given together"
            )
        val_labels = _load_label_side(args.val_descriptions, "unseen")
        val_tensors = read_manifest(args.val_embeddings)
        validation = ValidationData(
            conversations=load_corpus(args.val_corpus, val_labels),
            labels=val_labels,
            utterances=find_tensor(val_tensors, UTTERANCE_TENSOR),
            prototypes=find_tensor(val_tensors, base_cfg.prototype_tensor_name()),
        )

    sweep = []
    for sigma in sigmas:
        cfg = TrainConfig(**{**base_cfg.to_dict(), "sigma": sigma})
        out_dir = (
            args.out
            if len(sigmas) == 1
            else os.path.join(args.out, "sigma_{}".format(sigma))
        )
        lines = []
        result = train(
            conversations, labels, utterances, prototypes, cfg,
            validation=validation, log=lines.append,
        )
        save_checkpoint(result.checkpoint, out_dir)
        with open(
            os.path.join(out_dir, "train_log.txt"), "w", encoding="utf-8"
        ) as fh:
            for line in lines:
                fh.write(line + "\n")
        last = result.history[-1]
        sweep.append(
            {
                "sigma": sigma,
                "kept_epoch": result.checkpoint.epoch,
                "validation_wf1": result.checkpoint.validation_wf1,
                "final_mean_nll": last.mean_nll,
            }
        )
        print(
            "trained sigma={} -> {} (kept epoch {}{})".format(
                sigma,
                out_dir,
                result.checkpoint.epoch,
                ""
                if result.checkpoint.validation_wf1 is None
                else ", val_wf1 {:.4f}".format(result.checkpoint.validation_wf1),
            )
        )
    if len(sigmas) > 1:
        with open(os.path.join(args.out, "sweep.json"), "w", encoding="utf-8") as fh:
            json.dump(sweep, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
    return 0


def cmd_predict(args):
    ckpt = load_checkpoint(args.checkpoint)
    unseen_labels = _load_label_side(args.descriptions, "unseen")
    conversations = load_corpus(args.corpus, unseen_labels)
    tensors = read_manifest(args.embeddings)
    utterances = find_tensor(tensors, UTTERANCE_TENSOR)
    prototypes = find_tensor(tensors, ckpt.config.prototype_tensor_name())
    predictions = decode_corpus(
        conversations,
        utterances,
        ckpt,
        unseen_labels,
        prototypes,
        clamp_negative=args.clamp_transfer,
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for conv, pred in zip(conversations, predictions):
            for i in range(len(conv)):
                record = {
                    "conversation": conv.id,
                    "index": i,
                    "predicted": unseen_labels.words[int(pred.unseen_pred[i])],
                    "transfer": None
                    if pred.transfer is None
                    else [float(v) for v in pred.transfer[i]],
                    "cosines": [float(v) for v in pred.unseen_cosines[i]],
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print("wrote {} records to {}".format(sum(len(c) for c in conversations), args.out))
    return 0


def _read_predictions(path):
    records = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    "line {}: bad JSON in prediction file: {}".format(line_no, exc)
                ) from exc
            for key in ("conversation", "index", "predicted"):
                if key not in rec:
                    raise FormatError(
                        "line {}: prediction record needs {!r}".format(line_no, key)
                    )
            records[(rec["conversation"], int(rec["index"]))] = rec["predicted"]
    return records


def cmd_eval(args):
    unseen_labels = _load_label_side(args.descriptions, "unseen")
    conversations = load_corpus(args.corpus, unseen_labels)
    predicted = _read_predictions(args.predictions)
    golds = []
    preds = []
    for conv in conversations:
        for i, utt in enumerate(conv.utterances):
            if utt.gold_label is None:
                continue
            key = (conv.id, i)
            if key not in predicted:
                raise FormatError(
                    "no prediction for conversation {!r} utterance {}".format(
                        conv.id, i
                    )
                )
            golds.append(utt.gold_label)
            preds.append(unseen_labels.index_of(predicted[key]))
    report = weighted_prf(golds, preds, len(unseen_labels), list(unseen_labels.words))
    sys.stdout.write(report.to_text())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(
            os.path.join(args.out, "report.json"), "w", encoding="utf-8"
        ) as fh:
            fh.write(report.to_json() + "\n")
        with open(
            os.path.join(args.out, "report.txt"), "w", encoding="utf-8"
        ) as fh:
            fh.write(report.to_text())
    return 0


def cmd_gradcheck(args):
    seed = args.seed if args.seed is not None else _default_seed()
    all_ok = True
    for trial in range(args.trials):
        inst = make_instance(seed + trial)
        report = gradient_check(inst, tolerance=args.tolerance, step=args.step)
        worst = max(b.max_rel_err for b in report.blocks.values())
        print(
            "instance seed={} max_rel_err={:.3e} {}".format(
                seed + trial, worst, "ok" if report.passed else "FAIL"
            )
        )
        if not report.passed:
            for line in report.lines():
                print(line)
            all_ok = False
    print("gradient check: {}".format("PASS" if all_ok else "FAIL"))
    return 0 if all_ok else 1


def cmd_inspect(args):
    if (args.corpus is None) != (args.checkpoint is None):
        raise UsageError("--corpus and --checkpoint must be given together")
    ckpt = load_checkpoint(args.checkpoint) if args.checkpoint else None
    labels = _load_label_side(args.descriptions, "unseen")
    tensors = read_manifest(args.embeddings)
    tensor_name = args.tensor or (
        ckpt.config.prototype_tensor_name()
        if ckpt
        else TrainConfig().prototype_tensor_name()
    )
    prototypes = find_tensor(tensors, tensor_name)
    rows = rows_for_labels(prototypes, labels).astype(np.float64)
    sim = prototype_similarity(rows, list(labels.words))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "prototype_similarity.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(similarity_csv(sim, list(labels.words)))
    print("wrote {}".format(csv_path))
    if ckpt is not None:
        conversations = load_corpus(args.corpus, labels)
        utterances = find_tensor(tensors, UTTERANCE_TENSOR)
        predictions = decode_corpus(
            conversations, utterances, ckpt, labels, prototypes
        )
        keys = []
        vecs = []
        for conv, pred in zip(conversations, predictions):
            for i in range(len(conv)):
                keys.append(utterance_key(conv.id, i))
                vecs.append(pred.h_prime[i])
        matrix = EmbeddingMatrix(
            "h_prime", np.asarray(vecs, dtype=np.float32), keys
        )
        manifest = write_manifest([matrix], os.path.join(args.out, "h_prime"))
        print("wrote {}".format(manifest))
    return 0


def cmd_oracle(args):
    seed = args.seed if args.seed is not None else _default_seed()
    report = run_oracle_suite(
        trials=args.trials,
        max_len=args.max_n,
        max_labels=args.max_labels,
        seed=seed,
        tolerance=args.tolerance,
    )
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def _add_train_flags(p):
    p.add_argument("--lr", type=float, default=2.0e-5, help="peak learning rate")
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--warmup-steps", type=int, default=100)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=None, help="default: $EMOCRF_SEED or 0")
    p.add_argument(
        "--sigma",
        type=float,
        action="append",
        help="attention window width; repeat the flag to sweep (default 0.5)",
    )
    p.add_argument("--tau", type=float, default=0.02, help="similarity temperature")
    p.add_argument(
        "--no-led",
        action="store_true",
        help="use dictionary-only prototype descriptions",
    )
    p.add_argument(
        "--desc-count",
        type=int,
        choices=(1, 2, 3),
        default=2,
        help="generated sentences per description in full mode",
    )
    attention = p.add_mutually_exclusive_group()
    attention.add_argument(
        "--no-gsa", action="store_true", help="disable self-attention"
    )
    attention.add_argument(
        "--plain-sa",
        action="store_true",
        help="self-attention without the Gaussian window",
    )
    p.add_argument("--no-crf", action="store_true", help="disable the chain model")
    p.add_argument("--no-adapter", action="store_true", help="freeze the adapter")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emocrf",
        description="Zero-shot emotion labeling over conversation embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit transitions and adapter")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True, help="manifest dir or file")
    p.add_argument("--descriptions", required=True, help="seen label descriptions")
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--val-corpus")
    p.add_argument("--val-embeddings")
    p.add_argument("--val-descriptions")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="decode a corpus against unseen labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--descriptions", required=True, help="unseen label descriptions")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True, help="prediction file (JSON lines)")
    p.add_argument(
        "--clamp-transfer",
        action="store_true",
        help="floor transfer weights at zero before normalizing",
    )
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--descriptions", required=True, help="unseen label descriptions")
    p.add_argument("--out", help="directory for report.txt / report.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1.0e-4)
    p.add_argument("--step", type=float, default=1.0e-5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("inspect", help="similarity CSV and enhanced vectors")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--descriptions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", help="with --checkpoint: export enhanced vectors")
    p.add_argument("--checkpoint")
    p.add_argument("--tensor", help="prototype tensor name override")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("oracle", help="brute-force chain comparison")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-n", type=int, default=6, help="max conversation length")
    p.add_argument("--max-labels", type=int, default=4)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1.0e-8)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print("usage error: {}".format(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("error: missing input path: {}".format(exc), file=sys.stderr)
        return 2
    except EmocrfError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
