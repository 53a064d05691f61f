"""Run configuration: one JSON document, validated before any compute."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import __version__
from .conventions import Conventions
from .lattice import LatticeContext
from .potential import Potential


@dataclass
class RunConfig:
    lattice: dict = field(default_factory=lambda: {"d": 3, "p_F": 10.0, "r": 1})
    potential: dict = field(default_factory=lambda: {"kind": "indicator", "amplitude": 1.0})
    kronecker: str = "consistent"
    normalization: str = "ledger"
    m: float = 6.0
    C: float = 1.0
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "lattice": dict(self.lattice),
            "potential": dict(self.potential),
            "kronecker": self.kronecker,
            "normalization": self.normalization,
            "m": self.m,
            "C": self.C,
            "seed": self.seed,
        }

    def validate(self) -> None:
        ctx = self.context()
        self.conventions()
        self.make_potential(ctx)
        if not self.m > 0:
            raise ValueError("m must be positive")
        if not self.C > 0:
            raise ValueError("C must be positive")

    def context(self) -> LatticeContext:
        return LatticeContext.from_dict(self.lattice)

    def conventions(self) -> Conventions:
        return Conventions(normalization=self.normalization, kronecker=self.kronecker)

    def make_potential(self, ctx: LatticeContext | None = None) -> Potential:
        ctx = ctx or self.context()
        data = {"d": ctx.d, "radius": ctx.r, **self.potential}
        pot = Potential.from_dict(data)
        if pot.d != ctx.d or pot.radius != ctx.r:
            raise ValueError("potential dimension/radius disagree with the lattice")
        return pot


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: RunConfig, command: dict | None = None) -> str:
    """Short SHA-256 of the resolved configuration and command parameters."""
    payload = {"config": cfg.to_dict(), "command": command or {}}
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]


def meta(cfg: RunConfig, command: dict) -> dict:
    return {
        "engine": "fermikin",
        "version": __version__,
        "config_hash": config_hash(cfg, command),
        "command": command,
        "config": cfg.to_dict(),
    }
