#!/usr/bin/env python3
"""
Configuration utilities for cellular-automaton runs

Functions for loading, validating, and merging run-configuration files.
"""

import json
import os
from typing import Dict, Any, Optional

VIOLATION_SCOPES = ("center-window", "any-window")

DEFAULT_RUN_CONFIG: Dict[str, Any] = {
    "violation-scope": "center-window",
    "min-interior": 1,
    "threads": os.cpu_count() or 1,
    "seed": 0,
    "attract-factor": 4,
    "search-bound": 24,
    "ppm-scale": 4,
}


def load_json_file(file_path: str) -> Optional[Dict[str, Any]]:
    """Load and parse a JSON file."""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        print(f"Error: File not found: {file_path}")
        return None
    except json.JSONDecodeError as e:
        print(f"Error: Invalid JSON in {file_path}: {e}")
        return None
    except Exception as e:
        print(f"Error: Failed to read {file_path}: {e}")
        return None


def validate_run_config(config: Dict[str, Any]) -> bool:
    """Validate a run configuration (after defaults are merged)."""
    required_fields = list(DEFAULT_RUN_CONFIG)

    for field in required_fields:
        if field not in config:
            print(f"Error: Missing required field '{field}' in run config")
            return False

    unknown = sorted(set(config) - set(DEFAULT_RUN_CONFIG))
    if unknown:
        print(f"Error: Unknown field(s) in run config: {', '.join(unknown)}")
        return False

    if config["violation-scope"] not in VIOLATION_SCOPES:
        print(f"Error: 'violation-scope' must be one of {', '.join(VIOLATION_SCOPES)}")
        return False

    for field in ("min-interior", "threads", "attract-factor", "search-bound", "ppm-scale"):
        value = config[field]
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            print(f"Error: '{field}' must be a positive integer")
            return False

    if not isinstance(config["seed"], int) or isinstance(config["seed"], bool):
        print("Error: 'seed' must be an integer")
        return False

    return True


def load_run_config(file_path: Optional[str] = None) -> Optional[Dict[str, Any]]:
    """Merge a JSON run-config file over DEFAULT_RUN_CONFIG; None when invalid."""
    config = dict(DEFAULT_RUN_CONFIG)
    if file_path:
        loaded = load_json_file(file_path)
        if loaded is None:
            return None
        if not isinstance(loaded, dict):
            print(f"Error: Run config {file_path} must be a JSON object")
            return None
        config.update(loaded)
    if not validate_run_config(config):
        return None
    return config
