"""Finished runs on disk: any directory under the storage root holding a ``summary.json``."""
import json
import logging
import os
from pathlib import Path
from typing import Optional

import pandas as pd

logger = logging.getLogger(__name__)

GRAPH_FILES = {"diagnostics": "diagnostics.png", "vorticity": "vorticity.png"}


class RunHistory:
    """Scans a storage root for run directories, newest first."""

    def __init__(self, storage_root: os.PathLike | str):
        self.storage_root = Path(storage_root)
        self.runs: dict[str, dict] = {}

    def reload_history(self) -> None:
        """Scans the disk for finished runs; nested sweep members are named by their relative path."""
        self.runs = {}
        logger.debug(f"Scanning {self.storage_root} for runs")
        if not self.storage_root.is_dir():
            logger.info(f"Storage root {self.storage_root} does not exist")
            return
        found: list[tuple[str, dict]] = []
        for summary_path in self.storage_root.rglob("summary.json"):
            name = summary_path.parent.relative_to(self.storage_root).as_posix()
            if name == ".":
                name = summary_path.parent.name
            try:
                found.append((name, json.loads(summary_path.read_text())))
            except (OSError, json.JSONDecodeError) as e:
                logger.error(f"Failed to load run {name}: {e}")
        found.sort(key=lambda item: item[1].get("started", ""), reverse=True)
        self.runs = dict(found)
        logger.debug(f"Loaded {len(self.runs)} runs")

    def list_runs(self) -> list[str]:
        self.reload_history()
        return list(self.runs)

    def run_dir(self, name: str) -> Optional[Path]:
        """Directory of a known run, or None."""
        self.reload_history()
        if name not in self.runs:
            return None
        candidate = self.storage_root / name
        return candidate if candidate.is_dir() else self.storage_root

    def get_summary(self, name: str) -> Optional[dict]:
        self.reload_history()
        return self.runs.get(name)

    def get_diagnostics(self, name: str, columns: Optional[list[str]] = None) -> Optional[pd.DataFrame]:
        """Ledger rows of a run; unknown columns are ignored."""
        directory = self.run_dir(name)
        if directory is None or not (directory / "diagnostics.csv").exists():
            return None
        frame = pd.read_csv(directory / "diagnostics.csv")
        if columns:
            frame = frame[["t", *[c for c in columns if c in frame.columns and c != "t"]]]
        return frame

    def get_graph(self, name: str, kind: str = "diagnostics") -> Optional[bytes]:
        directory = self.run_dir(name)
        if directory is None or kind not in GRAPH_FILES:
            return None
        path = directory / GRAPH_FILES[kind]
        return path.read_bytes() if path.exists() else None
