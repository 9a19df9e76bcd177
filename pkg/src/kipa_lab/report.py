"""Machine-readable report bundles emitted by every CLI command.

A bundle is a plain dict: echoed inputs, a results block, optional
per-point residuals, and a provenance block (tool version + config hash).
Timestamps are deliberately absent so identical config and seed give a
byte-identical result document.
"""

from __future__ import annotations

import csv
import io
import json
import os
from typing import Optional

from . import __version__
from .config import config_hash


def make_bundle(command: str, inputs: dict, results: dict, residuals: Optional[list] = None) -> dict:
    bundle = {
        "command": command,
        "inputs": inputs,
        "results": results,
        "provenance": {"tool": "kipa-lab", "version": __version__, "config_sha256": config_hash(inputs)},
    }
    if residuals is not None:
        bundle["residuals"] = residuals
    return bundle


def bundle_json(bundle: dict) -> str:
    return json.dumps(bundle, indent=2, sort_keys=True) + "\n"


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, (list, tuple)):
        rows.append((prefix, json.dumps(obj)))
    else:
        rows.append((prefix, obj))


def bundle_csv(bundle: dict) -> str:
    """key,value flattening of the results block (CSV output format)."""
    rows: list = []
    _flatten("", bundle.get("results", {}), rows)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["key", "value"])
    w.writerows(rows)
    return buf.getvalue()


def write_bundle(bundle: dict, out_dir: str, fmt: str = "json") -> list[str]:
    """Write the bundle under out_dir; returns the created paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    result_path = os.path.join(out_dir, "result.json")
    with open(result_path, "w") as fh:
        fh.write(bundle_json(bundle))
    paths.append(result_path)
    if fmt == "csv":
        csv_path = os.path.join(out_dir, "result.csv")
        with open(csv_path, "w") as fh:
            fh.write(bundle_csv(bundle))
        paths.append(csv_path)
    if "residuals" in bundle and bundle["residuals"]:
        res_path = os.path.join(out_dir, "residuals.csv")
        keys = list(bundle["residuals"][0].keys())
        with open(res_path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            w.writerows(bundle["residuals"])
        paths.append(res_path)
    return paths
