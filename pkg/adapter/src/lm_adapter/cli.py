"""Command-line entry point: configure a session and serve stdin/stdout."""

from __future__ import annotations

import argparse
import sys

from .session import MODES, AdapterSession, SessionConfig
from .serve import serve
from .vocab import DEFAULT_BUCKETS


def _parse_modes(raw: str) -> tuple[str, ...]:
    modes = tuple(m.strip() for m in raw.split(",") if m.strip())
    if not modes:
        raise argparse.ArgumentTypeError("at least one mode is required")
    for mode in modes:
        if mode not in MODES:
            raise argparse.ArgumentTypeError(f"unknown mode {mode!r}; expected one of {list(MODES)}")
    if len(set(modes)) != len(modes):
        raise argparse.ArgumentTypeError(f"duplicate modes in {raw!r}")
    return modes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-adapter",
        description="Serve a seeded neural language model over the line-JSON scoring protocol.",
    )
    parser.add_argument("--model", default="tiny-transformer", help="model identifier reported in the handshake")
    parser.add_argument("--seed", type=int, default=0, help="weight-initialization seed")
    parser.add_argument("--device", default="cpu", help="torch device (default cpu)")
    parser.add_argument("--max-len", type=int, default=128, help="maximum tokens per request")
    parser.add_argument(
        "--modes",
        type=_parse_modes,
        default=MODES,
        help="comma-separated capabilities to serve: ar, mlm, or both (default both)",
    )
    parser.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="pin seeding and threading for reproducible responses (default on)",
    )
    parser.add_argument("--buckets", type=int, default=DEFAULT_BUCKETS, help="hash-vocabulary bucket count")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = SessionConfig(
            model=args.model,
            seed=args.seed,
            modes=tuple(args.modes),
            deterministic=args.deterministic,
            max_len=args.max_len,
            device=args.device,
            buckets=args.buckets,
        )
        session = AdapterSession(config)
    except (ValueError, RuntimeError) as exc:
        print(f"lm-adapter: {exc}", file=sys.stderr)
        return 1
    try:
        serve(session, sys.stdin, sys.stdout)
    except BrokenPipeError:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
