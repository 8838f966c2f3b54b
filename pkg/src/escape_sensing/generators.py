"""Seeded random instances for the simulated game settings.

All kinds read from the same SplitMix64 stream, in a fixed order:
values (targets 1..n) first, then kind-specific draws, then the matrix
row-major. Using one stream for every kind makes Append(n,k,τ) and
Default(p=0.5) identical for the same seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Instance, INF, _norm_tau
from .rng import SplitMix64

KINDS = ("default", "euclidean", "randomlevel", "append")
STREAM_TAG = "esg-instance"


@dataclass(frozen=True)
class GeneratorConfig:
    kind: str
    n: int
    k: int
    tau: object = 2
    seed: int = 0
    p: float = 0.2
    radius: float = 0.3
    # test hook: fixed difficulty levels for RandomLevel, {target index: d_i}
    forced_difficulty: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        kind = self.kind.lower().replace("_", "").replace("-", "")
        if kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "tau", _norm_tau(self.tau))
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError("seed must be a 64-bit unsigned integer")


def generate(cfg: GeneratorConfig) -> Instance:
    rng = SplitMix64(cfg.seed, STREAM_TAG)
    n, k = cfg.n, cfg.k
    values = rng.random_block(n)
    meta = {"generator": cfg.kind, "seed": int(cfg.seed), "n": n, "k": k,
            "tau": "inf" if cfg.tau == INF else int(cfg.tau)}

    if cfg.kind in ("default", "append"):
        p = 0.5 if cfg.kind == "append" else cfg.p
        u = rng.random_block(n * k).reshape(n, k)
        matrix = (u < p).astype(np.uint8)
        meta["p"] = p
    elif cfg.kind == "euclidean":
        tpts = rng.random_block(2 * n).reshape(n, 2)
        spts = rng.random_block(2 * k).reshape(k, 2)
        diff = tpts[:, None, :] - spts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        matrix = (dist < cfg.radius).astype(np.uint8)
        meta.update(radius=cfg.radius, target_points=tpts.tolist(), sensor_points=spts.tolist())
    else:
        d = rng.random_block(n)
        if cfg.forced_difficulty:
            for i, val in cfg.forced_difficulty.items():
                d[int(i)] = float(val)
        s = rng.random_block(k)
        u = rng.random_block(n * k).reshape(n, k)
        matrix = (u < np.outer(1.0 - d, s)).astype(np.uint8)
        meta.update(difficulty=d.tolist(), skill=s.tolist())
    return Instance(n, k, cfg.tau, values, matrix, meta)


def generate_kind(kind: str, n: int, k: int, tau=2, seed: int = 0, **kw) -> Instance:
    return generate(GeneratorConfig(kind, n, k, tau, seed, **kw))
