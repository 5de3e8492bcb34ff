"""
Output helpers: atomic file writes, digests and run manifests.
"""
import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field

LIBRARY_VERSION = "0.3.0"
FLOAT_FORMAT = "%.17g"
MANIFEST_NAME = "manifest.json"

class RunManifest(BaseModel):
    """Record of one command invocation and the artifacts it produced."""
    command: str = Field(..., description="CLI command name")
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved configuration")
    input_digests: Dict[str, str] = Field(default_factory=dict, description="sha256 of each input file")
    seed: Optional[int] = Field(default=None, description="RNG seed")
    started_at: str = Field(..., description="UTC start timestamp")
    finished_at: Optional[str] = Field(default=None, description="UTC end timestamp")
    artifacts: List[str] = Field(default_factory=list, description="Artifact paths relative to the output directory")
    artifact_digests: Dict[str, str] = Field(default_factory=dict, description="sha256 of each artifact")
    library_version: str = Field(default=LIBRARY_VERSION, description="Package version")
    status: str = Field(default="running", description="running, ok or failed")
    error: Optional[Dict[str, Any]] = Field(default=None, description="Error payload on failure")

def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()

def file_digest(path: Path) -> str:
    """sha256 hex digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()

def _atomic_write(path: Path, write) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            write(handle)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise

def write_bytes_atomic(path: Path, payload: bytes) -> None:
    _atomic_write(path, lambda handle: handle.write(payload))

def write_json_atomic(path: Path, payload: Any) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    write_bytes_atomic(path, text.encode("utf-8"))

def write_csv_atomic(path: Path, frame: pd.DataFrame) -> None:
    """Write a frame with fixed 17-significant-digit floats."""
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    write_bytes_atomic(path, text.encode("utf-8"))

def write_manifest(outdir: Path, manifest: RunManifest) -> Path:
    """Write manifest.json, filling digests for every listed artifact that exists."""
    outdir = Path(outdir)
    digests = {}
    for artifact in manifest.artifacts:
        artifact_path = outdir / artifact
        if artifact_path.is_file():
            digests[artifact] = file_digest(artifact_path)
    manifest.artifact_digests = digests
    path = outdir / MANIFEST_NAME
    write_json_atomic(path, manifest.model_dump(mode="json"))
    return path
