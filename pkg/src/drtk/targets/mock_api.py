"""Offline stand-in for a remote vision API: replay canned responses.

Fixture layout (keyed by image content hash so renames don't break replay):

    fixture_dir/
      manifest.json            {"version": 1, "task": ..., "label_map": {...},
                                "entries": [{"sha256": ..., "file": ...}]}
      <sha256>.json            one response per recorded image
      masks/<sha256>.png       segment task only

Response schemas:
    classify  {"labels": [{"name": str, "score": float}, ...]}   best first
    detect    {"objects": [{"name": str, "score": float,
                            "bbox": [x1, y1, x2, y2]}, ...]}
    segment   {"mask_path": "masks/<sha256>.png"}

Requests for an unrecorded image raise NotInFixture. Building a fixture from
any local adapter lets the full pipeline run with zero network and zero cost.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import LoadFailure, NotInFixture, TargetFailure
from ..images import ImageBatch, content_hash
from .base import TASKS, TargetAdapter


class MockApiTarget(TargetAdapter):
    def __init__(self, fixture_dir):
        self.fixture_dir = Path(fixture_dir)
        manifest_path = self.fixture_dir / "manifest.json"
        if not manifest_path.is_file():
            raise LoadFailure(f"no fixture manifest at {manifest_path}")
        try:
            manifest = json.loads(manifest_path.read_text())
            self.task = manifest["task"]
            self.label_map = {int(k): v for k, v in manifest["label_map"].items()}
            self._files = {e["sha256"]: e["file"] for e in manifest["entries"]}
        except (ValueError, KeyError, TypeError) as exc:
            raise LoadFailure(f"corrupt fixture manifest {manifest_path}: {exc}") from exc
        if self.task not in TASKS:
            raise LoadFailure(f"{manifest_path}: unknown task {self.task!r}")
        self.name = f"mock-api/{self.task}"
        self._name_to_id = {v: k for k, v in self.label_map.items()}
        self._cache: dict[str, dict] = {}

    def _response(self, digest: str) -> dict:
        if digest not in self._files:
            raise NotInFixture(f"no recorded response for content hash {digest}")
        if digest not in self._cache:
            self._cache[digest] = json.loads(
                (self.fixture_dir / self._files[digest]).read_text()
            )
        return self._cache[digest]

    def invoke_one(self, image, image_id):
        from ..evaluation.metrics import Detection

        response = self._response(content_hash(image))
        try:
            if self.task == "classify":
                best = max(response["labels"], key=lambda lab: lab["score"])
                return self._name_to_id[best["name"]]
            if self.task == "detect":
                return [
                    Detection(tuple(obj["bbox"]), self._name_to_id[obj["name"]],
                              float(obj["score"]))
                    for obj in response["objects"]
                ]
            mask_path = self.fixture_dir / response["mask_path"]
            with Image.open(mask_path) as img:
                return np.asarray(img, dtype=np.int64)
        except NotInFixture:
            raise
        except Exception as exc:  # noqa: BLE001 - malformed canned payload
            raise TargetFailure(image_id, f"bad fixture payload: {exc}") from exc


def build_fixture(adapter: TargetAdapter, batch: ImageBatch, fixture_dir) -> Path:
    """Record an adapter's responses for every image in the batch."""
    fixture_dir = Path(fixture_dir)
    fixture_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, image_id in enumerate(batch.ids):
        image = batch.image(i)
        digest = content_hash(image)
        prediction = adapter.invoke_one(image, image_id)
        if adapter.task == "classify":
            payload = {
                "labels": [{"name": adapter.label_map[int(prediction)], "score": 1.0}]
            }
        elif adapter.task == "detect":
            payload = {
                "objects": [
                    {
                        "name": adapter.label_map[d.label],
                        "score": d.score,
                        "bbox": list(d.box),
                    }
                    for d in prediction
                ]
            }
        else:
            mask_rel = Path("masks") / f"{digest}.png"
            (fixture_dir / "masks").mkdir(exist_ok=True)
            Image.fromarray(np.asarray(prediction, dtype=np.uint8)).save(
                fixture_dir / mask_rel
            )
            payload = {"mask_path": mask_rel.as_posix()}
        (fixture_dir / f"{digest}.json").write_text(json.dumps(payload))
        entries.append({"sha256": digest, "file": f"{digest}.json"})
    manifest = {
        "version": 1,
        "task": adapter.task,
        "label_map": {str(k): v for k, v in adapter.label_map.items()},
        "entries": entries,
    }
    manifest_path = fixture_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


def mock_api_adapter(fixture_dir) -> MockApiTarget:
    return MockApiTarget(fixture_dir)
