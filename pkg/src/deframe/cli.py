"""``deframe`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, DomainError, ImageIOError, NumericError
from .harness import cmd_deblur, cmd_degrade, cmd_metrics, cmd_sweep, load_manifest

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def build_parser():
    p = argparse.ArgumentParser(prog="deframe", description="Semi-blind framelet/fractional-TV deblurring")
    p.add_argument("command", choices=("degrade", "deblur", "sweep", "metrics"))
    p.add_argument("manifest", help="experiment manifest (TOML)")
    p.add_argument("--seed", type=int, help="override the degradation seed")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--threads", type=int, help="parallel sweep workers (default: DEFRAME_THREADS or CPU count)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = load_manifest(args.manifest, seed=args.seed, out=args.out)
        if args.command == "degrade":
            paths = cmd_degrade(manifest)
            print(f"wrote {paths['y_png']}")
        elif args.command == "deblur":
            paths = cmd_deblur(manifest)
            print(f"wrote {paths['x']}")
        elif args.command == "sweep":
            path, records = cmd_sweep(manifest, threads=args.threads)
            best = records[0]
            print(f"wrote {path} ({len(records)} runs, best PSNR {best.report.psnr:.4f} dB, "
                  f"config {best.config_hash})")
        else:
            path = cmd_metrics(manifest)
            print(path.read_text(encoding="utf-8"), end="")
    except (ConfigError, DomainError) as exc:
        print(f"deframe: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        where = f" [step={exc.step}, iteration={exc.iteration}]" if exc.step else ""
        print(f"deframe: numeric failure: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ImageIOError, OSError) as exc:
        print(f"deframe: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
