"""``beamacq <study> --config run.toml --out results/``.

Exit status 0 on success, 2 on a config error (a JSON record goes to
stderr) and 1 on anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from dataclasses import replace

from .experiments import STUDIES, ConfigError, ExperimentConfig, load_config, run_study, validate, write_outputs

log = logging.getLogger("beamacq")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beamacq", description="Beam-training initial access experiments.")
    ap.add_argument("study", choices=STUDIES)
    ap.add_argument("--config", help="TOML file with [scenario] and [study] tables")
    ap.add_argument("--seed", type=int, help="master seed (overrides study.seed)")
    ap.add_argument("--trials", type=int, help="trial count (overrides study.trials)")
    ap.add_argument("--out", default=".", help="output directory for CSV files")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1", "threads")
    return validate(replace(cfg, study=replace(cfg.study, **overrides)))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2, which is our config-error code
        if exc.code not in (0, None):
            print(json.dumps({"error": "config", "key": None, "message": "invalid command line"}), file=sys.stderr)
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        tables = run_study(args.study, cfg, args.threads)
        for p in write_outputs(cfg, tables, args.out):
            log.info("wrote %s", p)
    except ConfigError as exc:
        print(exc.record(), file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001 - any other failure is a bug
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
