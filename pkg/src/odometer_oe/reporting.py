"""Run manifests and the on-disk layout of plan / verify / simulate outputs."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Sequence

from . import __version__

MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict[str, Any]
    plan_hash: str = ""
    seed: int | None = None
    outcome: dict[str, Any] = field(default_factory=dict)
    wall_clock_seconds: float = 0.0
    tool_version: str = __version__

    def to_json(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "plan_hash": self.plan_hash,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "outcome": self.outcome,
            "wall_clock_seconds": self.wall_clock_seconds,
        }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_json(path: str, obj: Any) -> None:
    write_text(path, dumps(obj))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    write_text(path, csv_text(header, rows))


def write_manifest(outdir: str, manifest: RunManifest) -> None:
    write_json(os.path.join(outdir, MANIFEST), manifest.to_json())


def load_schema(name: str) -> dict:
    text = resources.files("odometer_oe").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def plot_csv(csv_path: str, png_path: str, x: str, ys: Sequence[str], title: str) -> bool:
    """Render a line plot from a CSV; returns False when matplotlib is unavailable."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return False
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return False
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [float(r[x]) for r in rows]
    for y in ys:
        ax.plot(xs, [float(r[y]) for r in rows], marker="o", label=y)
    ax.set_xlabel(x)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, metadata={"Software": None})
    plt.close(fig)
    return True
