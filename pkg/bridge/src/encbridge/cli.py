"""encbridge command line: `serve` runs the HTTP service, `dump` bulk-
embeds a corpus into the binary vector format."""

from __future__ import annotations

import argparse
import sys

from .config import DEFAULT_EMBED_MODEL, DEFAULT_SCORE_MODEL, BridgeConfig
from .dump import dump_embeddings
from .models import ModelLoadError, make_embedder


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encbridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the /embed + /score HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8900)
    p.add_argument("--embed-model", default=DEFAULT_EMBED_MODEL,
                   help="sentence-transformers id, or hash:<dim> for the builtin featurizer")
    p.add_argument("--score-model", default=DEFAULT_SCORE_MODEL)
    p.add_argument("--max-batch", type=int, default=64)
    p.add_argument("--device", default="cpu")
    p.add_argument("--queue", type=int, default=8, help="admission queue size (429 beyond it)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("dump", help="embed a corpus JSONL into vector + id files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-vectors", required=True)
    p.add_argument("--out-ids", required=True)
    p.add_argument("--model", default=DEFAULT_EMBED_MODEL)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--device", default="cpu")
    p.add_argument("--use-title", action="store_true")
    p.set_defaults(func=cmd_dump)

    return parser


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = BridgeConfig(
        embed_model_id=args.embed_model,
        score_model_id=args.score_model,
        port=args.port,
        max_batch=args.max_batch,
        device=args.device,
        queue_limit=args.queue,
    )
    uvicorn.run(create_app(config), host=args.host, port=config.port)
    return 0


def cmd_dump(args) -> int:
    try:
        embedder = make_embedder(args.model, device=args.device)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    count = dump_embeddings(
        args.corpus,
        args.out_vectors,
        args.out_ids,
        embedder,
        batch_size=args.batch,
        use_title=args.use_title,
    )
    print(f"embedded {count} passages (dim {embedder.dim}) -> {args.out_vectors}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
