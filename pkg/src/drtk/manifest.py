"""Run manifests: full config snapshot + artifact paths for reproducibility.

Re-running a command with the same manifest (its config snapshot) in the
same environment reproduces identical adversarial images bitwise. Every run
directory holds exactly one manifest; commands refuse to reuse a directory
that already has one.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import DrtkError

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    artifacts: dict[str, str] = field(default_factory=dict)
    toolkit_version: str = __version__
    created_utc: str = ""

    def __post_init__(self):
        if not self.created_utc:
            self.created_utc = datetime.now(timezone.utc).isoformat()

    def save(self, run_dir: Path) -> Path:
        path = Path(run_dir) / MANIFEST_NAME
        path.write_text(json.dumps(asdict(self), indent=2))
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        return cls(**doc)


def prepare_run_dir(out_dir: Path) -> Path:
    """Create the run directory; refuse one that already holds a manifest."""
    out_dir = Path(out_dir)
    if (out_dir / MANIFEST_NAME).exists():
        raise DrtkError(
            f"{out_dir} already contains a manifest; use a fresh output directory"
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir
