"""
Run Manifest

Every command writes a manifest next to its outputs, and every CSV it
writes starts with a `#` comment naming the manifest's run id and seeds.
"""

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from ahd.tanner import default_spec_path, load_spec, serialize_spec

MANIFEST_NAME = "manifest.json"
REPORT_MANIFEST_NAME = "report_manifest.json"


def code_spec_hash(lift_size: int = 16) -> str:
    spec = load_spec(default_spec_path(lift_size))
    return hashlib.sha256(serialize_spec(spec).encode("utf-8")).hexdigest()


def derive_run_id(command: str, config: dict[str, Any], seeds: dict[str, int]) -> str:
    """Deterministic run id, so reruns with the same inputs write identical files."""
    blob = json.dumps({"command": command, "config": config, "seeds": seeds}, sort_keys=True)
    return f"{command}-{hashlib.sha256(blob.encode('utf-8')).hexdigest()[:12]}"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    run_id: str
    command: str
    config: dict[str, Any]
    code_spec_hash: str
    protocol_hash: str
    seeds: dict[str, int]
    out_dir: str
    started_at: str = field(default_factory=_now)
    finished_at: Optional[str] = None
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def start(
        cls,
        command: str,
        config: dict[str, Any],
        seeds: dict[str, int],
        out_dir: Path,
        *,
        protocol_hash: str = "",
        lift_size: int = 16,
        run_id: Optional[str] = None,
    ) -> "RunManifest":
        return cls(
            run_id=run_id or derive_run_id(command, config, seeds),
            command=command,
            config=config,
            code_spec_hash=code_spec_hash(lift_size),
            protocol_hash=protocol_hash,
            seeds=seeds,
            out_dir=str(out_dir),
        )

    def header(self) -> str:
        seeds = " ".join(f"{k}={v}" for k, v in sorted(self.seeds.items()))
        return f"# run_id={self.run_id} {seeds}".rstrip()

    def write_csv(
        self,
        name: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
    ) -> Path:
        path = Path(self.out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.header() + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(rows)
        self.outputs.append(name)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = Path(self.out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.outputs.append(name)
        return path

    def finish(self, name: str = MANIFEST_NAME) -> Path:
        self.finished_at = _now()
        path = Path(self.out_dir) / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))
