"""Command line entry point.

Two subcommands, one per output family:

  dialexport expand --dataset d.jsonl --model MODEL --out exp.jsonl
  dialexport embed  --dataset d.jsonl --model MODEL --out vectors.demb

Exit codes: 0 success, 2 bad settings (E_CONFIG), 3 bad input data or an
output that would break the file contract (E_DATA), 4 model failure
(E_MODEL).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DataError, ModelError
from .jobs import ExportJob, run_export


def cmd_expand(args) -> int:
    mode = "expand_last_utterance" if args.last_utterance else "expand_full"
    job = ExportJob(
        mode=mode,
        dataset=args.dataset,
        model=args.model,
        output=args.out,
        num_samples=args.samples,
        top_k=args.top_k,
        max_new_tokens=args.max_new_tokens,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        infer_batch_size=args.infer_batch_size,
        max_source_length=args.max_source_length,
        max_target_length=args.max_target_length,
        seed=args.seed,
        save_model=args.save_model,
    )
    written = run_export(job)
    print(f"wrote expansion records to {written[0]}")
    if len(written) > 1:
        print(f"saved fine-tuned model to {written[1]}")
    return 0


def cmd_embed(args) -> int:
    job = ExportJob(
        mode="embed",
        dataset=args.dataset,
        model=args.model,
        output=args.out,
        texts=args.what,
        split=args.split,
        infer_batch_size=args.infer_batch_size,
        max_source_length=args.max_source_length,
    )
    written = run_export(job)
    print(f"wrote embeddings to {written[0]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialexport",
        description="Export generated context expansions and transformer "
        "embeddings for dialogue retrieval datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="fine-tune a generator and emit expansions")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, help="hub id or checkpoint directory")
    p.add_argument("--out", required=True)
    p.add_argument("--last-utterance", action="store_true",
                   help="fine-tune against the final utterance only")
    p.add_argument("--samples", type=int, default=3)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--max-new-tokens", type=int, default=64)
    p.add_argument("--epochs", type=int, default=2,
                   help="0 skips fine-tuning (zero-shot generation)")
    p.add_argument("--learning-rate", type=float, default=2e-5)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--infer-batch-size", type=int, default=16)
    p.add_argument("--max-source-length", type=int, default=512)
    p.add_argument("--max-target-length", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-model", default=None,
                   help="directory for the fine-tuned checkpoint")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("embed", help="emit mean-pooled encoder embeddings")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, help="hub id or checkpoint directory")
    p.add_argument("--out", required=True)
    p.add_argument("--what", choices=("responses", "contexts"), default="responses")
    p.add_argument("--split", default="test", help="which contexts (contexts only)")
    p.add_argument("--infer-batch-size", type=int, default=32)
    p.add_argument("--max-source-length", type=int, default=512)
    p.set_defaults(func=cmd_embed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"E_CONFIG: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"E_DATA: {exc}", file=sys.stderr)
        return 3
    except ModelError as exc:
        print(f"E_MODEL: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"E_DATA: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
