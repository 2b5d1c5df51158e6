"""Run manifests: resolved parameters plus input digests, written alongside
every output so reruns are verifiable.  Equal manifests must imply
byte-identical outputs; nothing time- or host-dependent goes in here."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    inputs: dict[str, str] = field(default_factory=dict)
    version: str = ""

    @classmethod
    def create(cls, subcommand: str, parameters: dict, input_paths: dict[str, str]):
        from . import __version__

        digests = {name: sha256_file(p) for name, p in sorted(input_paths.items())}
        return cls(
            subcommand=subcommand,
            parameters=parameters,
            inputs=digests,
            version=__version__,
        )

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "inputs": self.inputs,
            "version": self.version,
        }

    def write(self, out_path) -> Path:
        path = Path(str(out_path) + ".manifest.json")
        path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return path
