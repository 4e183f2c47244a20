"""Run manifests: the single JSON input that makes an experiment reproducible.

Schema (all sections except corpora/trainers optional):
{
  "corpora":  [{"id": ..., "path": ..., "domain": ...}, ...],
  "trainers": [{"algorithm": "sgns"|"glove"|"ppmi", "dimension": 100,
                "replicates": 5, "seed": 1, "seeds": [..optional explicit..],
                ...TrainerConfig overrides...}, ...],
  "stability":  {"k": 10, "k_values": [...], "frequency_buckets": [...],
                 "position_buckets": [...], "words": [...]},
  "lexicons":   {"pos": path, "syllables": path, "senses": path},
  "regression": {"lambda": 1.0, "standardize": true, "intercept": true,
                 "normalize_loss": false, "normalized_frequency": false,
                 "max_words": null, "groups": {...}},
  "output_dir": "out"
}
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

from .embeddings.config import TrainerConfig
from .embeddings.space import ALGORITHMS
from .errors import DataError


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    path: str
    domain: str


@dataclass(frozen=True)
class TrainerEntry:
    algorithm: str
    dimension: int
    seeds: tuple[int, ...]
    overrides: dict = field(default_factory=dict)

    def config(self, seed: int, workers: int = 1) -> TrainerConfig:
        return TrainerConfig(
            dimension=self.dimension, seed=seed, workers=workers, **self.overrides
        )


@dataclass
class RunManifest:
    corpora: list[CorpusEntry]
    trainers: list[TrainerEntry]
    stability: dict
    lexicons: dict
    regression: dict
    output_dir: str
    hash: str

    def spaces_dir(self) -> str:
        return os.path.join(self.output_dir, "spaces")

    def space_path(self, corpus_id: str, algorithm: str, dim: int, seed: int) -> str:
        return os.path.join(
            self.spaces_dir(),
            f"{_safe(corpus_id)}_{algorithm}_d{dim}_s{seed}.txt",
        )


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", name)


_TRAINER_KEYS = {
    "algorithm",
    "dimension",
    "replicates",
    "seed",
    "seeds",
    "window",
    "min_count",
    "negative_samples",
    "epochs",
    "learning_rate",
    "subsample_threshold",
    "negative_exponent",
    "dynamic_window",
    "glove_iterations",
    "glove_learning_rate",
    "x_max",
    "alpha",
    "svd_exponent",
    "ppmi_weighting",
    "glove_weighting",
}


def load_manifest(path: str, base_seed: int | None = None) -> RunManifest:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read manifest {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path!r} is not valid JSON: {exc}") from exc
    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True).encode("utf-8")
    ).hexdigest()[:12]

    root = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(root, p)

    corpora = []
    seen_ids = set()
    for c in raw.get("corpora", []):
        for key in ("id", "path", "domain"):
            if key not in c:
                raise DataError(f"corpus entry missing {key!r}: {c}")
        if c["id"] in seen_ids:
            raise DataError(f"duplicate corpus id {c['id']!r}")
        seen_ids.add(c["id"])
        cpath = resolve(c["path"])
        if not os.path.exists(cpath):
            raise DataError(f"corpus path does not exist: {cpath!r}")
        corpora.append(CorpusEntry(id=c["id"], path=cpath, domain=c["domain"]))
    if not corpora:
        raise DataError("manifest declares no corpora")

    trainers = []
    for t in raw.get("trainers", []):
        unknown = set(t) - _TRAINER_KEYS
        if unknown:
            raise DataError(f"unknown trainer keys {sorted(unknown)}")
        algo = t.get("algorithm")
        if algo not in ALGORITHMS:
            raise DataError(f"trainer algorithm must be one of {ALGORITHMS}: {t}")
        dim = int(t.get("dimension", 100))
        replicates = int(t.get("replicates", 1))
        if replicates < 1:
            raise DataError("replicates must be >= 1")
        if "seeds" in t:
            seeds = tuple(int(s) for s in t["seeds"])
            if len(seeds) != replicates and "replicates" in t:
                raise DataError("seeds length must equal replicates")
        else:
            start = int(t.get("seed", 1)) if base_seed is None else base_seed
            seeds = tuple(range(start, start + replicates))
        if len(set(seeds)) != len(seeds):
            raise DataError(f"trainer seeds must be distinct: {seeds}")
        overrides = {
            k: v
            for k, v in t.items()
            if k not in ("algorithm", "dimension", "replicates", "seed", "seeds")
        }
        trainers.append(
            TrainerEntry(algorithm=algo, dimension=dim, seeds=seeds, overrides=overrides)
        )
    if not trainers:
        raise DataError("manifest declares no trainers")

    lexicons = {}
    for key, p in (raw.get("lexicons") or {}).items():
        if key not in ("pos", "syllables", "senses"):
            raise DataError(f"unknown lexicon key {key!r}")
        lp = resolve(p)
        if not os.path.exists(lp):
            raise DataError(f"lexicon path does not exist: {lp!r}")
        lexicons[key] = lp

    output_dir = resolve(raw.get("output_dir", "out"))
    return RunManifest(
        corpora=corpora,
        trainers=trainers,
        stability=raw.get("stability") or {},
        lexicons=lexicons,
        regression=raw.get("regression") or {},
        output_dir=output_dir,
        hash=digest,
    )
