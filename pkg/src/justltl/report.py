"""File reports for the fuzz and detect commands: delimited tables plus figures.

Each writer produces a CSV table and a rendered PNG chart in the chosen
directory and returns the list of paths written.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import FuzzReport, PropertyProfile


def write_fuzz_report(report: FuzzReport, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    schemas = sorted(report.per_schema_counts)
    bad_counts = {name: 0 for name in schemas}
    for v in report.violations:
        bad_counts[v.kind] = bad_counts.get(v.kind, 0) + 1

    csv_path = outdir / "fuzz.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["schema", "instances_checked", "violations"])
        for name in schemas:
            writer.writerow([name, report.per_schema_counts[name], bad_counts.get(name, 0)])

    fig, ax = plt.subplots(figsize=(9, 4))
    xs = range(len(schemas))
    ax.bar(xs, [report.per_schema_counts[s] for s in schemas], color="#4878a8", label="checked")
    ax.bar(xs, [bad_counts.get(s, 0) for s in schemas], color="#c44e52", label="violations")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(schemas, rotation=45, ha="right")
    ax.set_ylabel("instances")
    ax.set_title(
        f"soundness fuzz: {report.trials} systems, {report.instances_checked} instances, "
        f"{len(report.violations)} violations (seed {report.master_seed})"
    )
    ax.legend()
    fig.tight_layout()
    png_path = outdir / "fuzz.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def write_detect_report(profiles: Sequence[PropertyProfile], outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    csv_path = outdir / "detect.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["system", "unique_initial", "synchronous", "perfect_recall", "no_learning"]
        )
        for k, prof in enumerate(profiles):
            writer.writerow(
                [
                    k,
                    int(prof.unique_initial),
                    int(prof.synchronous),
                    ";".join(str(int(b)) for b in prof.perfect_recall),
                    ";".join(str(int(b)) for b in prof.no_learning),
                ]
            )

    labels = ["unique initial", "synchronous", "perfect recall", "no learning", "sync + recall"]
    counts = [
        sum(p.unique_initial for p in profiles),
        sum(p.synchronous for p in profiles),
        sum(all(p.perfect_recall) for p in profiles),
        sum(all(p.no_learning) for p in profiles),
        sum(p.synchronous and all(p.perfect_recall) for p in profiles),
    ]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(labels)), counts, color="#55a868")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(f"systems out of {len(profiles)}")
    ax.set_title("detected run properties")
    fig.tight_layout()
    png_path = outdir / "detect.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]
