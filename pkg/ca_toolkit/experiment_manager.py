#!/usr/bin/env python3
"""
Experiment Manager for the CA toolkit

Keeps the audit trail of CLI runs. Every command writes one numbered
manifest (`001_simulate.json`, `002_route.json`, ...) into the runs
directory, recording the argv, inputs, parameters, seed and a digest of
every output, so the run can be replayed and compared byte for byte.
"""

import hashlib
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

RUN_INFO = "run_info.json"


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path: str) -> str:
    with open(path, 'rb') as f:
        return digest_bytes(f.read())


class ExperimentManager:
    """Numbered experiment manifests inside one runs directory."""

    def __init__(self, runs_dir: str = "runs"):
        self.runs_dir = Path(runs_dir)
        self.info_file = self.runs_dir / RUN_INFO

    def _ensure_dir(self):
        if self.runs_dir.exists():
            return
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        metadata = {
            "created_at": datetime.now().isoformat(),
            "manifest_count": 0,
            "description": "cellular automaton experiment runs"
        }
        with open(self.info_file, 'w') as f:
            json.dump(metadata, f, indent=2)

    def manifest_files(self) -> List[Path]:
        if not self.runs_dir.exists():
            return []
        return sorted(f for f in self.runs_dir.glob("*.json") if f.name != RUN_INFO)

    def get_next_manifest_filename(self, command: str) -> str:
        """
        Get the next manifest filename with auto-incrementing number.

        Returns:
            str: Filename like "001_simulate.json", "002_route.json", etc.
        """
        next_num = len(self.manifest_files()) + 1
        return f"{next_num:03d}_{command}.json"

    def write_manifest(self, command: str, manifest: Dict[str, Any]) -> Path:
        """Write a manifest for `command` and return its path."""
        self._ensure_dir()
        path = self.runs_dir / self.get_next_manifest_filename(command)
        record = {
            "created_at": datetime.now().isoformat(),
            "command": command,
            **manifest
        }
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(record, f, indent=2, sort_keys=True, ensure_ascii=False)
        self._update_run_info()
        return path

    def _update_run_info(self):
        metadata = {}
        if self.info_file.exists():
            with open(self.info_file, 'r') as f:
                metadata = json.load(f)
        metadata.update({
            "manifest_count": len(self.manifest_files()),
            "updated_at": datetime.now().isoformat()
        })
        with open(self.info_file, 'w') as f:
            json.dump(metadata, f, indent=2)

    def list_manifests(self) -> List[Dict[str, Any]]:
        manifests = []
        for path in self.manifest_files():
            with open(path, 'r', encoding='utf-8') as f:
                manifests.append({"file": path.name, **json.load(f)})
        return manifests


def load_manifest(path: str) -> Optional[Dict[str, Any]]:
    """Load a manifest; None (with an error printed) when it is unusable."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"Error: Cannot read manifest {path}: {e}")
        return None
    for field in ("command", "argv", "outputs"):
        if field not in manifest:
            print(f"Error: Missing required field '{field}' in manifest {path}")
            return None
    return manifest
