"""Command line front end: ``embed`` and ``generate``.

Exit codes follow the downstream package's convention: 0 on success, 2 for
bad invocations (unknown flags, missing input paths, inconsistent flag
combinations), 1 for runtime failures (encoder load problems, malformed
files, generation failures).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import DEFAULT_KEY_ENV, BridgeConfig
from .descriptions import VARIANTS, assemble, available_variants
from .errors import BridgeError
from .formats import (
    read_corpus_texts,
    read_description_records,
    write_description_records,
    write_embedding_manifest,
)
from .generate import FixtureBackend, HttpBackend, generate_descriptions

log = logging.getLogger("emobridge")


class UsageError(Exception):
    """Bad invocation; maps to exit code 2."""


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emocrf-bridge",
        description=(
            "Produce the embedding manifests and label description files "
            "consumed by the zero-shot emotion labeler."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed", help="encode texts with a frozen transformer")
    embed.add_argument("--model", required=True, help="encoder directory or hub id")
    embed.add_argument("--corpus", help="conversation corpus (.tsv)")
    embed.add_argument(
        "--descriptions",
        help="label description file (.jsonl); may be combined with --corpus "
        "to put utterance and prototype tensors into one manifest",
    )
    embed.add_argument("--out", required=True, help="manifest directory")
    embed.add_argument("--batch-size", type=int, default=8)
    embed.add_argument(
        "--tensor-name", default="utterances", help="tensor name in corpus mode"
    )
    embed.add_argument(
        "--variants",
        help="comma separated subset of {} (descriptions mode; default: all "
        "the input has material for)".format(", ".join(VARIANTS)),
    )

    gen = sub.add_parser("generate", help="generate label description sentences")
    words = gen.add_mutually_exclusive_group(required=True)
    words.add_argument("--words", help="plain word list, one per line")
    words.add_argument(
        "--glosses", help="description file whose records carry word and dict"
    )
    gen.add_argument("--out", required=True, help="description file to write")
    gen.add_argument("--count", type=int, default=2, choices=(1, 2, 3))
    backend = gen.add_mutually_exclusive_group(required=True)
    backend.add_argument("--endpoint", help="chat-completions endpoint URL")
    backend.add_argument("--fixture", help="canned response JSON file (offline mode)")
    gen.add_argument("--gen-model", default="gpt-3.5-turbo")
    gen.add_argument("--temperature", type=float, default=0.7)
    gen.add_argument(
        "--key-env",
        default=DEFAULT_KEY_ENV,
        help="environment variable holding the API key (default {})".format(
            DEFAULT_KEY_ENV
        ),
    )
    gen.add_argument("--max-retries", type=int, default=3)
    gen.add_argument("--backoff", type=float, default=0.5)
    gen.add_argument(
        "--rps", type=float, default=0.0, help="max requests per second (0 = no cap)"
    )
    gen.add_argument("--timeout", type=float, default=30.0)
    return parser


def _require_file(path):
    if not os.path.isfile(path):
        raise UsageError("missing input path: {}".format(path))
    return path


def _parse_variants(raw, records):
    if raw is None:
        return available_variants(records)
    chosen = [v.strip() for v in raw.split(",") if v.strip()]
    if not chosen:
        raise UsageError("--variants must name at least one variant")
    unknown = [v for v in chosen if v not in VARIANTS]
    if unknown:
        raise UsageError(
            "unknown variants {}; expected a subset of {}".format(
                unknown, ", ".join(VARIANTS)
            )
        )
    return tuple(v for v in VARIANTS if v in chosen)


def cmd_embed(args):
    if args.variants is not None and not args.descriptions:
        raise UsageError("--variants only applies to --descriptions")
    if not args.corpus and not args.descriptions:
        raise UsageError("embed needs --corpus, --descriptions, or both")
    from .encoder import FrozenEncoder

    pairs = None
    if args.corpus:
        pairs = read_corpus_texts(_require_file(args.corpus))

    records = None
    variants = ()
    if args.descriptions:
        records = read_description_records(_require_file(args.descriptions))
        if not records:
            raise UsageError("description file {} is empty".format(args.descriptions))
        skipped = [r["word"] for r in records if r.get("skip")]
        if skipped:
            log.warning(
                "description file carries skip-flagged records (%s); they limit "
                "which variants have material",
                ", ".join(skipped),
            )
        variants = _parse_variants(args.variants, records)

    encoder = FrozenEncoder(args.model)
    tensors = []
    parts = []
    if pairs is not None:
        keys, matrix = encoder.encode_keyed(pairs, args.batch_size)
        tensors.append((args.tensor_name, matrix, keys))
        parts.append("{} rows".format(len(keys)))
    if records is not None:
        words = [r["word"] for r in records]
        for variant in variants:
            texts = [assemble(record, variant) for record in records]
            _, matrix = encoder.encode_keyed(
                list(zip(words, texts)), args.batch_size
            )
            tensors.append((variant, matrix, words))
        parts.append("{} words, variants: {}".format(len(words), ", ".join(variants)))
    path = write_embedding_manifest(tensors, args.out)
    print("wrote {} ({})".format(path, "; ".join(parts)))


def _read_word_list(path):
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            word = raw.strip()
            if not word:
                continue
            key = word.lower()
            if key in seen:
                raise UsageError(
                    "duplicate word {!r} in {} (line {})".format(word, path, line_no)
                )
            seen.add(key)
            records.append({"word": word, "dict": ""})
    if not records:
        raise UsageError("word list {} is empty".format(path))
    return records


def cmd_generate(args):
    if args.words:
        records = _read_word_list(_require_file(args.words))
    else:
        records = read_description_records(_require_file(args.glosses))
        if not records:
            raise UsageError("gloss file {} is empty".format(args.glosses))

    cfg = BridgeConfig(
        endpoint=args.endpoint or "",
        api_key_env=args.key_env,
        generation_model=args.gen_model,
        temperature=args.temperature,
        fixture_path=args.fixture or "",
        description_count=args.count,
        max_retries=args.max_retries,
        backoff=args.backoff,
        requests_per_second=args.rps,
        timeout=args.timeout,
    )
    if cfg.fixture_path:
        backend = FixtureBackend(_require_file(cfg.fixture_path))
    else:
        backend = HttpBackend(
            cfg.endpoint,
            model=cfg.generation_model,
            temperature=cfg.temperature,
            key_env=cfg.api_key_env,
            timeout=cfg.timeout,
        )
    results = generate_descriptions(
        records,
        backend,
        count=cfg.description_count,
        max_retries=cfg.max_retries,
        backoff=cfg.backoff,
        requests_per_second=cfg.requests_per_second,
    )
    write_description_records(results, args.out)
    skipped = [r["word"] for r in results if r.get("skip")]
    message = "wrote {} records to {}".format(len(results), args.out)
    if skipped:
        message += " ({} skipped: {})".format(len(skipped), ", ".join(skipped))
    print(message)


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "embed":
            cmd_embed(args)
        else:
            cmd_generate(args)
    except UsageError as exc:
        print("usage error: {}".format(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print("error: missing input path: {}".format(exc), file=sys.stderr)
        return 2
    except BridgeError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
