"""``qfi-lab`` command line: run, reproduce and validate experiment configs."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import OUT_ENV, ExperimentConfig, load_config, parse_config
from .errors import ConfigError, QfiLabError
from .figures import FIGURES, PUBLISHED_PARAMETERS, preset
from .pipelines import RunOutput, run_pipeline

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2

log = logging.getLogger("qfi_lab")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    return v


def write_outputs(cfg: ExperimentConfig, out: RunOutput, directory: Path,
                  published: Optional[Sequence[str]] = None) -> list:
    """CSV, JSON manifest and log; contents depend only on ``cfg`` and ``out``."""
    directory.mkdir(parents=True, exist_ok=True)
    stem = directory / cfg.prefix
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(out.columns)
    for row in out.rows:
        writer.writerow([_fmt(v) for v in row])
    csv_path = stem.with_suffix(".csv")
    csv_path.write_bytes(buf.getvalue().encode())

    sources = dict(cfg.sources)
    if published is not None:
        # presets: values they set are either publication values or design choices
        for name, origin in sources.items():
            if origin == "user":
                sources[name] = "published" if name in published else "design"
    manifest = {
        "tool": "qfi-lab",
        "version": __version__,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "config": cfg.to_document(),
        "parameter_sources": sources,
        "summary": _jsonable(out.summary),
        "columns": out.columns,
        "rows": len(out.rows),
        "files": [csv_path.name, f"{cfg.prefix}.log"],
    }
    if cfg.photon is not None:
        manifest["readout_model"] = {
            "counts": "Poisson, mean p*n0_mean + (1-p)*n1_mean",
            "offset": "stand-in model: zero-mean Gaussian with sd extra_noise_sd on the normalized ratio, "
                      "shared by the N runs of one experiment",
        }
    man_path = stem.with_suffix(".manifest.json")
    man_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n")

    lines = [f"qfi-lab {__version__}: kind={cfg.kind} seed={cfg.seed}"]
    lines += [f"param {k} = {v!r} [{sources.get(k, 'design')}]" for k, v in cfg.params]
    lines += out.log
    lines += [f"summary {k} = {v}" for k, v in sorted(_jsonable(out.summary).items())]
    log_path = stem.with_suffix(".log")
    log_path.write_text("\n".join(lines) + "\n")
    return [csv_path, man_path, log_path]


def manifest_config(path) -> ExperimentConfig:
    """Rebuild the resolved config from a manifest written by ``write_outputs``."""
    return parse_config(json.loads(Path(path).read_text())["config"], env={})


def _error(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError) and exc.field:
        payload["field"] = exc.field
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def _execute(cfg: ExperimentConfig, out_dir: Optional[str], published=None) -> int:
    directory = Path(out_dir or cfg.output_dir)
    log.info("running %s into %s", cfg.kind, directory)
    try:
        result = run_pipeline(cfg)
    except QfiLabError as exc:
        return _error(exc, EXIT_FAILED)
    for path in write_outputs(cfg, result, directory, published):
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _error(exc, EXIT_INVALID)
    return _execute(cfg, args.out)


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _error(exc, EXIT_INVALID)
    print(json.dumps(_jsonable(cfg.to_document()), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    doc = preset(args.figure, args.seed)
    cfg = parse_config(doc)
    return _execute(cfg, args.out, PUBLISHED_PARAMETERS[args.figure])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfi-lab", description="QFI measurement and Ramsey estimation simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (default: config, then ${OUT_ENV})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="regenerate the data of a figure panel")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./qfi-lab-out)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("validate", help="check a config and print its resolved form")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
