"""Command line front end.

    pipeopt run --config run.yaml [--dataset PATH --label COL --seed N --workers N --out DIR]
    pipeopt experiment --config run.yaml --runs 10
    pipeopt inspect OUT/report.json

Every config key can be overridden with ``--set section.key=value`` (the
value is parsed as YAML). Exit codes: 0 success, 1 configuration or input
error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import __version__
from .config import ConfigError, RunConfig, parse_config
from .data import DataError, load_csv
from .search import format_experiment, format_report, run_experiment, run_search

log = logging.getLogger("pipeopt")

OUTPUT_FILES = ("resolved_config.yaml", "report.json", "results.csv", "summary.txt")

# flag -> dotted config key
FLAG_KEYS = {
    "dataset": "dataset.path",
    "label": "dataset.label",
    "seed": "search.seed",
    "runs": "runs",
    "workers": "search.workers",
    "out": "output.dir",
}


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set {key}: cannot parse value {raw!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipeopt", description="Pipeline search for tabular classification.")
    parser.add_argument("--version", action="version", version=f"pipeopt {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (("run", "single search"), ("experiment", "repeated searches with seeds seed..seed+runs-1")):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", help="YAML run config")
        p.add_argument("--dataset", help="CSV file (dataset.path)")
        p.add_argument("--label", help="label column (dataset.label)")
        p.add_argument("--seed", type=int, help="global seed (search.seed)")
        p.add_argument("--runs", type=int, help="number of runs (runs)")
        p.add_argument("--workers", type=int, help="parallel workers (search.workers)")
        p.add_argument("--out", help="output directory (output.dir)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any dotted config key")
        p.add_argument("--log-file", help="also log here; default OUT/run.log once the run starts")
    p = sub.add_parser("inspect", help="print a report.json as text")
    p.add_argument("report")
    return parser


def resolve_args(args) -> RunConfig:
    overrides = _parse_set(args.set)
    for flag, key in FLAG_KEYS.items():
        val = getattr(args, flag)
        if val is None:
            continue
        if key in overrides and overrides[key] != val:
            raise ConfigError(f"contradictory values for {key}: --{flag} {val!r} vs --set {overrides[key]!r}")
        overrides[key] = val
    cfg = parse_config(args.config, overrides)
    if args.verb == "run" and cfg.runs != 1:
        raise ConfigError(f"'run' performs one search but runs={cfg.runs}; use 'experiment'")
    return cfg


def _setup_logging(verbosity: int, log_file: Path | None):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    root = logging.getLogger()
    for h in list(root.handlers):
        if getattr(h, "_pipeopt", False):
            root.removeHandler(h)
            h.close()
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    for h in handlers:
        h.setFormatter(fmt)
        h._pipeopt = True  # type: ignore[attr-defined]
        root.addHandler(h)
    root.setLevel(level)


def _inspect(path) -> int:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read report {path}: {exc}", file=sys.stderr)
        return 1
    text = format_experiment(data) if "aggregate" in data else format_report(data)
    sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "inspect":
        return _inspect(args.report)

    early_log = Path(args.log_file) if args.log_file else None
    try:
        cfg = resolve_args(args)
        dataset = load_csv(
            cfg.dataset["path"],
            cfg.dataset["label"],
            type_hints=cfg.dataset["type_hints"],
            missing_tokens=cfg.dataset["missing_tokens"],
            positive_label=cfg.dataset["positive_label"],
            drop_missing_labels=cfg.dataset["drop_missing_labels"],
        )
    except (ConfigError, DataError) as exc:
        _setup_logging(1, early_log)
        log.error("%s", exc)
        return 1

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    _setup_logging(cfg.verbosity, early_log or out / "run.log")
    log.info("pipeopt %s, seed %d, output %s", __version__, cfg.search.seed, out)
    log.info("dataset\n%s", dataset.summary())
    (out / "resolved_config.yaml").write_text(cfg.to_yaml(), encoding="utf-8")
    try:
        if args.verb == "run":
            report = run_search(cfg.search, dataset)
            results_csv = report.table.to_csv()
        else:
            report = run_experiment(cfg.search, dataset, cfg.runs)
            results_csv = report.results_csv()
    except Exception as exc:  # noqa: BLE001 - any failure is a runtime error
        log.exception("run failed: %s", exc)
        return 2
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "results.csv").write_text(results_csv, encoding="utf-8")
    summary = report.to_text()
    (out / "summary.txt").write_text(summary, encoding="utf-8")
    if cfg.verbosity > 0:
        sys.stdout.write(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
