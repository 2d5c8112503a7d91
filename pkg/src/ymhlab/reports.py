"""Output writers for experiment runs: JSONL records, CSV tables,
two-column plot data, and rendered matplotlib figures.

Every file embeds the config hash and package version so results can be
traced back to the exact invocation; CSV files carry them in a leading
comment line, JSONL in each record, figures in their PNG metadata.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402

__all__ = ["config_hash", "ReportWriter"]


def config_hash(config: dict) -> str:
    canon = "\n".join(f"{k} = {config[k]}" for k in sorted(config))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


class ReportWriter:
    """Collects records/tables/figures for one experiment run."""

    def __init__(self, out_dir, config: dict):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.config = dict(config)
        self.hash = config_hash(self.config)
        self._records_path = self.out / "results.jsonl"
        self._records_path.write_text("")
        self.written: list[str] = []

    def _stamp(self) -> str:
        return f"config={self.hash} version={__version__}"

    def record(self, kind: str, **fields) -> dict:
        rec = {"kind": kind, "config_hash": self.hash,
               "version": __version__}
        rec.update(fields)
        with open(self._records_path, "a") as fh:
            fh.write(json.dumps(rec, sort_keys=True, default=float) + "\n")
        return rec

    def table(self, name: str, header: list[str], rows) -> Path:
        path = self.out / f"{name}.csv"
        with open(path, "w") as fh:
            fh.write(f"# {self._stamp()}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(f"{v:.12g}" if isinstance(v, float)
                                  else str(v) for v in row) + "\n")
        self.written.append(str(path))
        return path

    def plot_xy(self, name: str, x, y, xlabel: str, ylabel: str,
                title: str = "", hline: float | None = None,
                logx: bool = False, logy: bool = False) -> Path:
        """Two-column plot data CSV plus a rendered PNG figure."""
        data = self.out / f"{name}.csv"
        with open(data, "w") as fh:
            fh.write(f"# {self._stamp()}\n{xlabel},{ylabel}\n")
            for a, b in zip(x, y):
                fh.write(f"{a:.12g},{b:.12g}\n")
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(x, y, "o-", lw=1.2, ms=4)
        if hline is not None:
            ax.axhline(hline, color="0.4", ls="--", lw=0.8)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title, fontsize=10)
        fig.tight_layout()
        png = self.out / f"{name}.png"
        fig.savefig(png, dpi=140, metadata={"Description": self._stamp()})
        plt.close(fig)
        self.written.extend([str(data), str(png)])
        return png

    def save_config(self) -> Path:
        path = self.out / "config_used.txt"
        with open(path, "w") as fh:
            fh.write(f"# {self._stamp()}\n")
            for k in sorted(self.config):
                fh.write(f"{k} = {self.config[k]}\n")
        self.written.append(str(path))
        return path
