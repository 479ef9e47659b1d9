"""Synthetic dyadic event panels with planted structure.

Events are drawn per period from a logistic model combining a baseline
rate, block affinity, covariate effects, and previous-period edge
persistence. Ground-truth parameters come back alongside the data so
recovery checks have an oracle. All nodes span the full period range, so
eligibility never depends on inferred activity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GenerationError
from .seeding import seed_for
from .store import (
    CANONICAL_COVARIATES,
    INDICATOR_COVARIATES,
    CovariateTable,
    EventPanel,
)

DEFAULT_SYNTH_COVARIATES = (
    "joint-democracy",
    "trade-dependence",
    "contiguity",
    "capital-distance",
)


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters. rate_band bounds the overall positive rate
    (events per dyad-period); draws outside it are regenerated with a
    fresh derived seed up to max_attempts times."""

    n_nodes: int = 15
    periods: int = 30
    n_blocks: int = 2
    block_affinity: float = 0.0
    persistence: float = 0.0
    base_rate: float = 0.05
    covariate_effects: dict = field(default_factory=dict)
    covariate_names: tuple = DEFAULT_SYNTH_COVARIATES
    time_varying_covariates: bool = False
    initial_edges: tuple = ()
    rate_band: tuple = (0.0, 1.0)
    max_attempts: int = 20
    seed: int = 0

    def validate(self) -> None:
        if self.n_nodes < 2:
            raise GenerationError("need at least 2 nodes")
        if self.periods < 1:
            raise GenerationError("need at least 1 period")
        if self.n_blocks < 1:
            raise GenerationError("need at least 1 block")
        if not 0.0 <= self.persistence <= 1.0:
            raise GenerationError(f"persistence must be in [0,1], got {self.persistence}")
        if not 0.0 <= self.base_rate <= 1.0:
            raise GenerationError(f"base_rate must be in [0,1], got {self.base_rate}")
        for name in self.covariate_names:
            if name not in CANONICAL_COVARIATES:
                raise GenerationError(f"unknown covariate name {name!r}")
        for name in self.covariate_effects:
            if name not in self.covariate_names:
                raise GenerationError(f"effect on unemitted covariate {name!r}")
        lo, hi = self.rate_band
        if not 0.0 <= lo <= hi <= 1.0:
            raise GenerationError(f"rate_band must satisfy 0 <= lo <= hi <= 1, got {self.rate_band}")
        for a, b in self.initial_edges:
            if not (0 <= a < self.n_nodes and 0 <= b < self.n_nodes) or a == b:
                raise GenerationError(f"bad initial edge ({a},{b})")
        if self.max_attempts < 1:
            raise GenerationError("max_attempts must be >= 1")

    def to_json(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "periods": self.periods,
            "n_blocks": self.n_blocks,
            "block_affinity": self.block_affinity,
            "persistence": self.persistence,
            "base_rate": self.base_rate,
            "covariate_effects": dict(self.covariate_effects),
            "covariate_names": list(self.covariate_names),
            "time_varying_covariates": self.time_varying_covariates,
            "initial_edges": [list(e) for e in self.initial_edges],
            "rate_band": list(self.rate_band),
            "max_attempts": self.max_attempts,
            "seed": self.seed,
        }

    @staticmethod
    def from_json(obj: dict) -> "SyntheticSpec":
        known = {
            "n_nodes", "periods", "n_blocks", "block_affinity", "persistence",
            "base_rate", "covariate_effects", "covariate_names",
            "time_varying_covariates", "initial_edges", "rate_band",
            "max_attempts", "seed",
        }
        unknown = set(obj) - known
        if unknown:
            raise GenerationError(f"unknown synthetic spec keys: {sorted(unknown)}")
        kwargs = dict(obj)
        if "covariate_names" in kwargs:
            kwargs["covariate_names"] = tuple(kwargs["covariate_names"])
        if "initial_edges" in kwargs:
            kwargs["initial_edges"] = tuple(tuple(e) for e in kwargs["initial_edges"])
        if "rate_band" in kwargs:
            kwargs["rate_band"] = tuple(kwargs["rate_band"])
        return SyntheticSpec(**kwargs)


@dataclass(frozen=True)
class GroundTruth:
    """What the generator actually used, for recovery oracles."""

    blocks: dict
    intercept: float
    block_affinity: float
    persistence: float
    effects: dict
    rate: float
    attempts: int


def _logit(p: float) -> float:
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    return math.log(p / (1.0 - p))


def _sigmoid(eta: float) -> float:
    if eta > 36.0:
        return 1.0
    if eta < -36.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-eta))


def generate_synthetic(spec: SyntheticSpec):
    """Draw (EventPanel, CovariateTable, GroundTruth) from the spec.

    Edge probability at period p for dyad (i,j):
        p_logit = sigmoid(logit(base_rate) + block_affinity*[same block]
                          + sum_k effect_k * x_k(i,j))
        p       = persistence + (1-persistence)*p_logit   if edge at p-1
                = p_logit                                  otherwise
    Events at p>=2 use the covariate values recorded at p-1, matching what
    a forecaster sees; period 1 uses its own values. initial_edges fire
    with probability 1 at period 1.
    """
    spec.validate()
    nodes = [f"n{k:02d}" for k in range(spec.n_nodes)]
    blocks = {node: k % spec.n_blocks for k, node in enumerate(nodes)}
    dyads = [(i, j) for i in nodes for j in nodes if i != j]
    intercept = _logit(spec.base_rate)
    names = spec.covariate_names
    effects = [(names.index(n), e) for n, e in sorted(spec.covariate_effects.items())]
    registry = {node: (1, spec.periods) for node in nodes}
    initial = {(nodes[a], nodes[b]) for a, b in spec.initial_edges}

    lo, hi = spec.rate_band
    for attempt in range(spec.max_attempts):
        rng = np.random.default_rng(seed_for(spec.seed, "synth", attempt))

        def draw_block():
            vals = np.empty((len(dyads), len(names)))
            for c, name in enumerate(names):
                if name in INDICATOR_COVARIATES:
                    vals[:, c] = (rng.random(len(dyads)) < 0.5).astype(float)
                else:
                    vals[:, c] = rng.normal(0.0, 1.0, size=len(dyads))
            return vals

        xs = {1: draw_block()}
        for p in range(2, spec.periods + 1):
            xs[p] = draw_block() if spec.time_varying_covariates else xs[1]

        events = []
        prev: set = set()
        for p in range(1, spec.periods + 1):
            x = xs[p - 1] if p > 1 else xs[1]
            current = set()
            for d, (i, j) in enumerate(dyads):
                eta = intercept
                if blocks[i] == blocks[j]:
                    eta += spec.block_affinity
                for c, effect in effects:
                    eta += effect * x[d, c]
                p_logit = _sigmoid(eta)
                if p == 1 and (i, j) in initial:
                    prob = 1.0
                elif (i, j) in prev:
                    prob = spec.persistence + (1.0 - spec.persistence) * p_logit
                else:
                    prob = p_logit
                if rng.random() < prob:
                    events.append((i, j, p))
                    current.add((i, j))
            prev = current

        rate = len(events) / (len(dyads) * spec.periods)
        if lo <= rate <= hi:
            entries = {}
            for p in range(1, spec.periods + 1):
                x = xs[p]
                for d, (i, j) in enumerate(dyads):
                    for c, name in enumerate(names):
                        entries[(p, i, j, name)] = float(x[d, c])
            panel = EventPanel(events=tuple(events), registry=registry)
            table = CovariateTable(entries=entries)
            truth = GroundTruth(
                blocks=blocks,
                intercept=intercept,
                block_affinity=spec.block_affinity,
                persistence=spec.persistence,
                effects=dict(spec.covariate_effects),
                rate=rate,
                attempts=attempt + 1,
            )
            return panel, table, truth

    raise GenerationError(
        f"no draw landed in rate band {spec.rate_band} after {spec.max_attempts} attempts"
    )


def save_synthetic(panel: EventPanel, table: CovariateTable, out_dir) -> dict:
    """Write events.csv, registry.csv, covariates.csv in the ingestion
    schemas; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "events": out / "events.csv",
        "registry": out / "registry.csv",
        "covariates": out / "covariates.csv",
    }
    with open(paths["events"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sender", "receiver", "year"])
        for s, r, p in panel.events:
            w.writerow([s, r, p])
    with open(paths["registry"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "first_year", "last_year"])
        for node in sorted(panel.registry):
            lo, hi = panel.registry[node]
            w.writerow([node, lo, hi])
    with open(paths["covariates"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", "i", "j", "name", "value"])
        for key in sorted(table.entries):
            p, i, j, name = key
            w.writerow([p, i, j, name, repr(table.entries[key])])
    return {k: str(v) for k, v in paths.items()}
