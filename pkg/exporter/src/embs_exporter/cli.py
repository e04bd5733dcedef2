"""Command-line front end mirroring the ExportJob fields."""

import argparse
import json
import logging
import sys

from .errors import InputError, ModelLoadError
from .export import ExportJob, export_embeddings


def _read_texts(args) -> tuple[str, ...]:
    texts: list[str] = list(args.text or [])
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            texts.extend(line for line in fh.read().splitlines() if line.strip())
    return tuple(texts)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="embs-export",
        description="Embed texts with a transformer checkpoint and write an EMBS file.")
    ap.add_argument("--model", required=True,
                    help="checkpoint path or identifier (fine-tuned checkpoints welcome)")
    ap.add_argument("--input", help="file with one text per line")
    ap.add_argument("--text", action="append",
                    help="inline text; repeatable, combined with --input")
    ap.add_argument("--out", required=True, help="EMBS output path")
    ap.add_argument("--batch-size", type=int, default=32)
    ap.add_argument("--device", default="cpu")
    ap.add_argument("--include-special-tokens", action="store_true",
                    help="keep sequence-start/end tokens in the mean")
    ap.add_argument("--max-length", type=int, default=None,
                    help="override the model maximum sequence length")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        job = ExportJob(
            model=args.model,
            texts=_read_texts(args),
            out=args.out,
            batch_size=args.batch_size,
            device=args.device,
            include_special_tokens=args.include_special_tokens,
            max_length=args.max_length,
        )
        summary = export_embeddings(job)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ModelLoadError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
