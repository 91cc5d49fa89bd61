"""Command-line pipeline: synth -> features -> classify -> stats.

Exit codes: 0 success, 2 config error, 3 data error, 4 resource cap hit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ComplexTooLarge, ConfigError, OracleTooLarge, TopofcError
from .pipeline import load_config, run_classify, run_features, run_stats, run_synth

log = logging.getLogger("topofc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RESOURCE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topofc",
        description=(
            "Multiscale topological features from connectivity distance matrices: "
            "Rips persistence, four vectorizations, cohort classification and "
            "group statistics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON pipeline config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--jobs", type=int, default=None, help="worker pool width")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("synth", help="write a synthetic cohort and its manifest")
    common(p)
    p = sub.add_parser("features", help="diagrams + fused feature vectors per subject")
    common(p)
    p = sub.add_parser("classify", help="cross-validated evaluation of configured models")
    common(p)
    p.add_argument("--features", default=None, help="features.csv path (default: <out>/features.csv)")
    p = sub.add_parser("stats", help="threshold/node rankings and Betti-AUC group summary")
    common(p)
    p.add_argument("--diagrams", default=None, help="diagrams dir (default: <out>/diagrams)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_config(args.config)
        if args.out is not None:
            config.out_dir = Path(args.out)
        if args.seed is not None:
            config.seed = args.seed
        if args.jobs is not None:
            config.jobs = args.jobs
        config.out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "synth":
            path = run_synth(config)
            log.info("wrote %s", path)
        elif args.command == "features":
            path = run_features(config)
            log.info("wrote %s", path)
        elif args.command == "classify":
            features = None if args.features is None else Path(args.features)
            for path in run_classify(config, features):
                log.info("wrote %s", path)
        elif args.command == "stats":
            diagrams = None if args.diagrams is None else Path(args.diagrams)
            for path in run_stats(config, diagrams):
                log.info("wrote %s", path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ComplexTooLarge, OracleTooLarge) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except TopofcError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
