"""Deterministic machine-readable run reports.

JSON-lines records plus a summary CSV.  Records carry a stable
``identity`` tag naming the verified statement, the measured value, the
tolerance and the pass flag.  All floats are printed with 17 significant
digits and no timestamps are written, so identical runs produce
byte-identical files.
"""

import json
import os

__all__ = ["Reporter", "fmt"]


def fmt(x):
    """17-significant-digit representation of a float."""
    return float(f"{x:.17g}")


class Reporter:
    def __init__(self, output_dir):
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)
        self.records = []

    def add(self, identity, test_case, value, tolerance, passed, **extra):
        rec = {
            "identity": identity,
            "test_case": test_case,
            "residual": fmt(float(value)),
            "tolerance": fmt(float(tolerance)),
            "pass": bool(passed),
        }
        for key, val in extra.items():
            rec[key] = fmt(float(val)) if isinstance(val, float) else val
        self.records.append(rec)
        return rec

    def check(self, identity, test_case, value, tolerance, **extra):
        """Record value <= tolerance; returns the pass flag."""
        passed = bool(value <= tolerance)
        self.add(identity, test_case, value, tolerance, passed, **extra)
        return passed

    @property
    def n_passed(self):
        return sum(1 for r in self.records if r["pass"])

    @property
    def failures(self):
        return [r for r in self.records if not r["pass"]]

    def write(self, stem="report"):
        jsonl = os.path.join(self.output_dir, f"{stem}.jsonl")
        with open(jsonl, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=False) + "\n")
        csv = os.path.join(self.output_dir, f"{stem}_summary.csv")
        with open(csv, "w") as fh:
            fh.write("identity,test_case,residual,tolerance,pass\n")
            for rec in self.records:
                fh.write(
                    "%s,%s,%.17g,%.17g,%s\n"
                    % (
                        rec["identity"],
                        rec["test_case"],
                        rec["residual"],
                        rec["tolerance"],
                        rec["pass"],
                    )
                )
        return jsonl, csv


def write_timeseries_csv(path, records, columns):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for rec in records:
            fh.write(",".join("%.17g" % rec[c] for c in columns) + "\n")


def write_profile_csv(path, r, rho, u, pressure):
    with open(path, "w") as fh:
        fh.write("r,rho,u,pressure\n")
        for vals in zip(r, rho, u, pressure):
            fh.write(",".join("%.17g" % v for v in vals) + "\n")
