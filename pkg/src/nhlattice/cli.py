"""Command-line experiment runner.

Usage::

    nhlattice <experiment> [--param value ...] [--config path] --out dir

Parameters not given on the command line come from the JSON config file
(``{"experiment": ..., "params": {...}}``) and then from the experiment
defaults. Every run writes CSV tables, a ``manifest.json`` and, for figure
experiments, a ``plot.py`` that renders the tables. On failure an
``error.json`` is written instead and the exit status is non-zero.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import InvalidParameter, NHLatticeError
from .experiments import DEFAULTS, run_experiment
from .io import versions, write_csv, write_manifest

EXIT_ERROR = 2


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_overrides(extra):
    out = {}
    i = 0
    while i < len(extra):
        key = extra[i]
        if not key.startswith("--") or i + 1 >= len(extra):
            raise InvalidParameter(f"expected '--name value' pairs, got {extra[i:]}")
        out[key[2:].replace("-", "_")] = _parse_value(extra[i + 1])
        i += 2
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nhlattice",
        description="Steady states of dissipative non-reciprocal lattices.",
        epilog="Extra '--name value' pairs override experiment parameters.",
    )
    parser.add_argument("experiment", choices=sorted(DEFAULTS))
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def _load_config(path, experiment):
    if path is None:
        return {}
    doc = json.loads(Path(path).read_text())
    if doc.get("experiment", experiment) != experiment:
        raise InvalidParameter(f"config is for {doc['experiment']!r}, not {experiment!r}")
    return dict(doc.get("params", {}))


def _error_doc(exc):
    code = getattr(exc, "code", "error")
    return {"error": code, "type": type(exc).__name__, "message": str(exc)}


def run(experiment, overrides, out):
    """Run one experiment and write its files to ``out``; returns the manifest."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run_experiment(experiment, overrides)
    outputs = []
    for name, table in result.tables.items():
        write_csv(out / f"{name}.csv", table.header, table.rows)
        outputs.append(f"{name}.csv")
    if result.plot:
        (out / "plot.py").write_text(result.plot)
        outputs.append("plot.py")
    timings = dict(result.timings, total=time.perf_counter() - t0)
    manifest = {
        "experiment": experiment,
        "params": result.params,
        "residuals": {k: float(v) for k, v in result.residuals.items()},
        "timings": timings,
        "versions": versions(),
        "outputs": outputs,
        "notes": list(result.notes),
    }
    write_manifest(out / "manifest.json", manifest)
    return manifest


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _load_config(args.config, args.experiment)
        overrides.update(_parse_overrides(extra))
        run(args.experiment, overrides, args.out)
    except (NHLatticeError, OSError, json.JSONDecodeError) as exc:
        doc = _error_doc(exc)
        try:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "error.json").write_text(json.dumps(doc, indent=2) + "\n")
        except OSError:
            pass
        print(json.dumps(doc), file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
