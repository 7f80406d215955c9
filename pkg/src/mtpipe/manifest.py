"""Run manifests: enough provenance to reproduce a run byte-for-byte.

A manifest stores the config snapshot, sha256 digests of every input
and artifact, the tool version, and the training hyperparameters a
downstream trainer would need. It never stores timestamps, so two runs
over identical inputs write identical manifests.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import DataError

# Declared for downstream trainers; nothing in this package executes them.
TRAINING_HYPERPARAMETERS = {
    "pretrain": {
        "learning_rate": 5e-5,
        "lr_schedule": "cosine",
        "warmup_ratio": 0.03,
        "batch_size": 65536,
    },
    "finetune": {
        "batch_size": 32,
        "epochs": 3,
        "learning_rate": 2e-5,
        "weight_decay": 0.0,
    },
    "inference": {"beam_size": 5},
}


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                h.update(chunk)
    except OSError as exc:
        raise DataError(f"cannot digest {path}: {exc}") from exc
    return "sha256:" + h.hexdigest()


def digest_tree(root: str | Path, pattern: str = "**/*") -> dict[str, str]:
    """Digest every file under ``root``, keyed by posix-relative path."""
    root = Path(root)
    out = {}
    for path in sorted(root.glob(pattern)):
        if path.is_file():
            out[path.relative_to(root).as_posix()] = file_digest(path)
    return out


@dataclass
class RunManifest:
    config: dict
    inputs: dict[str, str]
    artifacts: dict[str, str]
    tool_version: str = __version__
    training_hyperparameters: dict = field(
        default_factory=lambda: copy.deepcopy(TRAINING_HYPERPARAMETERS)
    )

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "inputs": self.inputs,
            "artifacts": self.artifacts,
            "tool_version": self.tool_version,
            "training_hyperparameters": self.training_hyperparameters,
        }
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        try:
            payload = json.loads(Path(path).read_text("utf-8"))
            return cls(
                config=payload["config"],
                inputs=payload["inputs"],
                artifacts=payload["artifacts"],
                tool_version=payload["tool_version"],
                training_hyperparameters=payload["training_hyperparameters"],
            )
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"malformed manifest {path}: {exc}") from exc
