"""Command-line entry point: verification suites from config files.

Subcommands
-----------
verify     surface-calculus / kinematics / constitutive identity suites
vary       first-variation identity corpus and per-term energy variations
decompose  Helmholtz-Weyl round trips and the defect detector
simulate   radial two-phase bubble run with conservation audit

One YAML config file holds a section per subcommand; reports are written
as JSON-lines plus a summary CSV in the output directory.  Identical
manifests (config + seed) produce byte-identical reports.

Exit status: 0 all assertions passed, 1 assertion failure (details in
the report), 2 configuration or constraint error.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from .reporting import Reporter
from .suites import SUITES

SUITE_DESCRIPTIONS = {
    "verify": "surface calculus, flow-map kinematics and constitutive laws",
    "vary": "action first-variation identities (finite differences vs quadrature)",
    "decompose": "surface Helmholtz-Weyl decomposition round trips",
    "simulate": "spherically symmetric two-phase bubble run + conservation audit",
}


@dataclass
class RunManifest:
    subcommand: str
    config_path: str
    output_dir: str
    seed: int = 0
    tol_scale: float = 1.0
    overrides: dict = field(default_factory=dict)


def load_config(path, section):
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    cfg = data.get(section, {})
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ValueError(f"config section {section!r} must be a mapping")
    return cfg


def run(manifest):
    """Execute one manifest; returns the process exit status."""
    try:
        cfg = load_config(manifest.config_path, manifest.subcommand)
        cfg.update(manifest.overrides)
    except Exception as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}))
        return 2
    reporter = Reporter(manifest.output_dir)
    rng = np.random.default_rng(manifest.seed)
    suite = SUITES[manifest.subcommand]
    try:
        if manifest.subcommand in ("verify", "decompose", "simulate"):
            suite(reporter, cfg, rng, manifest.tol_scale,
                  output_dir=manifest.output_dir)
        else:
            suite(reporter, cfg, rng, manifest.tol_scale)
    except Exception as exc:
        # constraint/validation rejections are configuration errors
        from .laws import LawDomainError
        from .variation import ConfigurationError, ConstraintError

        if isinstance(exc, (ConstraintError, ConfigurationError, LawDomainError,
                            KeyError, ValueError)):
            print(json.dumps({"error": "constraint", "detail": str(exc)}))
            return 2
        raise
    reporter.write()
    failures = reporter.failures
    summary = {
        "subcommand": manifest.subcommand,
        "records": len(reporter.records),
        "passed": reporter.n_passed,
        "failed": len(failures),
    }
    print(json.dumps(summary))
    if failures:
        for rec in failures:
            print(json.dumps({"failure": rec}))
        return 1
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="baroflow",
        description="verification toolkit for inviscid two-phase flow "
        "with surface flow and tension",
    )
    parser.add_argument("--list", action="store_true",
                        help="enumerate available suites and exit")
    sub = parser.add_subparsers(dest="subcommand")
    for name, desc in SUITE_DESCRIPTIONS.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized probe sets")
        p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply all tolerances by this factor")
    args = parser.parse_args(argv)
    if args.list:
        for name, desc in SUITE_DESCRIPTIONS.items():
            print(f"{name}: {desc}")
        return 0
    if not args.subcommand:
        parser.print_usage()
        return 2
    manifest = RunManifest(
        subcommand=args.subcommand,
        config_path=args.config,
        output_dir=args.out,
        seed=args.seed,
        tol_scale=args.tol_scale,
    )
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
