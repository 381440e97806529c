"""Command line entry point: ``orthostab {axioms,run,suite}``.

Exit codes: 0 pass, 1 certificate or axiom failure, 2 config error,
3 sampler/solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

from ..hyers import OrbitOverflow
from ..orthogonality import SamplerExhausted, ThalesianFailure
from ..serialize import dumps, encode
from .config import ConfigError, default_config, from_dict, load, resolve_seed
from .presets import PRESET_NAMES
from .runner import run_axioms, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
INDEX_COLUMNS = ["preset", "eps_hat", "bound_name", "constant", "attained_sup", "ratio", "pass"]
RUNTIME_ERRORS = (ThalesianFailure, SamplerExhausted, OrbitOverflow, FloatingPointError)

log = logging.getLogger("orthostab")


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _scenario(args):
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        return load(args.config)
    if args.preset:
        return default_config(args.preset)
    raise ConfigError("one of --config or --preset is required")


def cmd_axioms(args) -> int:
    cfg = _scenario(args)
    report = run_axioms(cfg, args.seed)
    d = report.to_dict()
    _write(args.out, dumps(d))
    log.info(
        "O1 %s  O2 %s  O3 %s  O4 %s (pass rate %.4f, max residual %.2e)",
        *("pass" if d[k] else "FAIL" for k in ("o1_pass", "o2_pass", "o3_pass", "o4_pass")),
        d["o4_pass_rate"],
        d["max_thales_residual"],
    )
    return EXIT_PASS if report.all_pass else EXIT_FAIL


def _summarize(report) -> None:
    c = report.certificate
    log.info("%s: eps_hat=%.6g  %s", report.config["preset"], c["eps_hat"], "PASS" if c["all_pass"] else "FAIL")
    for b in c["bounds"]:
        ratio = "n/a" if b["ratio"] is None else f"{b['ratio']:.4f}"
        log.info("  %-22s ratio %-8s %s", b["name"], ratio, "pass" if b["pass"] else "FAIL")


def cmd_run(args) -> int:
    cfg = _scenario(args)
    report = run_scenario(cfg, args.seed)
    _write(args.out, dumps(report.to_dict()))
    _summarize(report)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _suite_one(job):
    preset, overlay, seed = job
    cfg = from_dict({**overlay, "preset": preset})
    return preset, run_scenario(cfg, seed)


def run_suite(out_dir: str, seed: Optional[int] = None, overlay: Optional[dict] = None, jobs: int = 1):
    """Run every preset; returns ``(reports, all_pass)``."""
    overlay = dict(overlay or {})
    overlay.pop("preset", None)
    # resolve once so every preset sees the same seed source
    seed = resolve_seed(seed, default_config(PRESET_NAMES[0], overlay.get("seed")))
    job_list = [(p, overlay, seed) for p in PRESET_NAMES]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_suite_one, job_list))
    else:
        results = [_suite_one(j) for j in job_list]
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for preset, report in results:
        _write(os.path.join(out_dir, f"{preset}.json"), dumps(report.to_dict(timing=False)))
        _write(os.path.join(out_dir, "timing", f"{preset}.json"), dumps(report.timing))
        rows.extend(report.index_rows())
    with open(os.path.join(out_dir, "index.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDEX_COLUMNS)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in encode(r)])
    reports = [r for _, r in results]
    return reports, all(r.passed for r in reports)


def cmd_suite(args) -> int:
    overlay = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                overlay = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read overlay {args.config}: {exc}") from None
        if not isinstance(overlay, dict):
            raise ConfigError("overlay must be a JSON object")
    if args.out is None:
        raise ConfigError("suite needs --out DIR")
    reports, ok = run_suite(args.out, args.seed, overlay, args.jobs)
    for r in reports:
        _summarize(r)
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthostab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset=True):
        p.add_argument("--config", help="scenario config JSON")
        if preset:
            p.add_argument("--preset", choices=PRESET_NAMES, help="run a preset with its default config")
        p.add_argument("--out", help="output path")
        p.add_argument("--seed", type=int, help="seed override (beats config and ORTHOSTAB_SEED)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary")

    p = sub.add_parser("axioms", help="check the orthogonality axioms for a config")
    common(p)
    p.set_defaults(func=cmd_axioms)
    p = sub.add_parser("run", help="run one scenario and write its report")
    common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("suite", help="run every preset; --config is an overlay merged into each")
    common(p, preset=False)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stdout, force=True
    )
    try:
        return args.func(args)
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RUNTIME_ERRORS as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
