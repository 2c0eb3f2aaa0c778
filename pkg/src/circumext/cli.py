"""Command line entry point: ``circumext verify``.

Exit codes: 0 when every record passes, 1 when some record fails (the failing
records are dumped to stderr), 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from circumext.verify import SUBSUITES, SUITES, Config, report_csv, report_json, run

SUITE_CHOICES = SUITES + tuple(SUBSUITES) + ("all",)
FORMATS = ("json", "csv")


class ConfigError(Exception):
    pass


def _positive_int(name, value, minimum=1):
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    if v < minimum:
        raise ConfigError(f"{name} must be at least {minimum}, got {v}")
    return v


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    known = {f.name for f in fields(Config)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(args) -> Config:
    values = read_config_file(args.config) if args.config else {}
    for name in ("suite", "seed", "fan", "grid", "pairs", "out", "format"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    cfg = Config()
    if "suite" in values:
        if values["suite"] not in SUITE_CHOICES:
            raise ConfigError(f"unknown suite {values['suite']!r}; choose from {', '.join(SUITE_CHOICES)}")
        cfg.suite = values["suite"]
    if "format" in values:
        if values["format"] not in FORMATS:
            raise ConfigError(f"unknown format {values['format']!r}")
        cfg.format = values["format"]
    if "seed" in values:
        cfg.seed = _positive_int("seed", values["seed"], 0)
    if "fan" in values:
        cfg.fan = _positive_int("fan", values["fan"], 16)
    if "grid" in values:
        cfg.grid = _positive_int("grid", values["grid"], 16)
    if "pairs" in values:
        cfg.pairs = _positive_int("pairs", values["pairs"], 1)
    if "out" in values:
        cfg.out = str(values["out"])
    return cfg


def write_outputs(cfg: Config, records, tables) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(cfg, records))
    if cfg.format == "csv":
        (out / "report.csv").write_text(report_csv(records))
    if tables:
        tdir = out / "tables"
        tdir.mkdir(exist_ok=True)
        for name in sorted(tables):
            (tdir / name).write_text(tables[name])
    return out


def run_cli(cfg: Config) -> int:
    """Run the configured suites, write the outputs and return the exit code."""
    records, tables = run(cfg)
    out = write_outputs(cfg, records, tables)
    failed = [r for r in records if not r["pass"]]
    for r in records:
        print(f"{'PASS' if r['pass'] else 'FAIL'}  [{r['suite']}] {r['paper_ref']}: "
              f"worst {r['worst_observed']} vs {r['tolerance']}")
    print(f"{len(records) - len(failed)}/{len(records)} passed; report in {out / 'report.json'}")
    if failed:
        print("failing cases:", file=sys.stderr)
        print(json.dumps(failed, indent=2, sort_keys=True), file=sys.stderr)
        return 1
    return 0


def _parser():
    p = argparse.ArgumentParser(prog="circumext", description="Circumcenter extension verification harness.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run verification suites and write a report")
    v.add_argument("--suite", choices=SUITE_CHOICES)
    v.add_argument("--seed", type=int)
    v.add_argument("--fan", type=int, help="direction fan size")
    v.add_argument("--grid", type=int, help="boundary grid size")
    v.add_argument("--pairs", type=int, help="sample pairs for the Hoelder and quasi-isometry checks")
    v.add_argument("--out", help="output directory")
    v.add_argument("--format", choices=FORMATS)
    v.add_argument("--config", help="file of key=value defaults; flags take precedence")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run_cli(cfg)


if __name__ == "__main__":
    sys.exit(main())
