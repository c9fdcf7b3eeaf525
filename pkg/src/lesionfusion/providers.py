"""Score providers standing in for the CNN ensemble, and their reduction.

A provider yields one :class:`~lesionfusion.dataset_io.ScoreTable`. Two
kinds exist: ``file`` (a score CSV) and ``synthetic_oracle`` (seeded draws
conditioned on ground truth, for tests and demos). Parallel members and
transform views are reduced by :func:`aggregate_mean`.

Synthetic oracle algorithm
--------------------------
Records are sorted by id and one uniform ``u`` per record is drawn from
numpy's PCG64 generator seeded with ``seed``. With target mean
``m = 0.5 + pos_strength / 2`` and concentration ``k = 2``, a positive
record scores ``Beta(m k, (1 - m) k).ppf(u)`` and a negative record scores
``1 - Beta(m k, (1 - m) k).ppf(u)``. For ``pos_strength = 1`` the
distribution collapses to 1 (and 0 for negatives). For the MM task, SK
records additionally get ``+ confuser_bias`` before clipping to [0, 1].
Because each record keeps its ``u`` across strengths, scores move
monotonically with ``pos_strength``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import beta

from .dataset_io import GroundTruthRecord, Label, ScoreTable, as_task, load_scores
from .errors import IdSetMismatch, InvalidConfig, MissingTruthForOracle, TaskMismatch

CONCENTRATION = 2.0


class ProviderKind(str, enum.Enum):
    file = "file"
    synthetic_oracle = "synthetic_oracle"


@dataclass(frozen=True)
class ProviderSpec:
    kind: ProviderKind
    task: Label
    path: Optional[str] = None
    seed: int = 0
    pos_strength: float = 0.8
    confuser_bias: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProviderKind(self.kind))
        object.__setattr__(self, "task", as_task(self.task))
        if self.kind is ProviderKind.file and not self.path:
            raise InvalidConfig("file provider needs a path")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0.0 < self.pos_strength <= 1.0:
            raise InvalidConfig(f"pos_strength must be in (0, 1], got {self.pos_strength}")
        if not 0.0 <= self.confuser_bias < 1.0:
            raise InvalidConfig(f"confuser_bias must be in [0, 1), got {self.confuser_bias}")

    @classmethod
    def from_dict(cls, d: dict, task=None) -> "ProviderSpec":
        d = dict(d)
        if task is not None:
            d.setdefault("task", task)
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidConfig(f"bad provider declaration {d}: {exc}") from None

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "task": self.task.value}
        if self.kind is ProviderKind.file:
            d["path"] = self.path
        else:
            d.update(seed=int(self.seed), pos_strength=self.pos_strength,
                     confuser_bias=self.confuser_bias)
        return d


@dataclass(frozen=True)
class EnsembleConfig:
    members: tuple[ProviderSpec, ...] = field(default_factory=tuple)
    aggregation: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InvalidConfig("an ensemble needs at least one member")
        if self.aggregation != "mean":
            raise InvalidConfig(f"unsupported aggregation {self.aggregation!r}")

    @classmethod
    def from_dict(cls, d: dict, task=None) -> "EnsembleConfig":
        members = [ProviderSpec.from_dict(m, task) for m in d.get("members", [])]
        return cls(members, d.get("aggregation", "mean"))

    def to_dict(self) -> dict:
        return {"members": [m.to_dict() for m in self.members], "aggregation": self.aggregation}


def _positive_quantile(u: np.ndarray, pos_strength: float) -> np.ndarray:
    mean = 0.5 + pos_strength / 2.0
    if mean >= 1.0:
        return np.ones_like(u)
    return beta.ppf(u, mean * CONCENTRATION, (1.0 - mean) * CONCENTRATION)


def synthetic_oracle_scores(truth: Sequence[GroundTruthRecord], spec: ProviderSpec) -> ScoreTable:
    if spec.kind is not ProviderKind.synthetic_oracle:
        raise InvalidConfig(f"expected a synthetic_oracle provider, got {spec.kind.value}")
    records = sorted(truth, key=lambda r: r.id)
    rng = np.random.default_rng(int(spec.seed))
    u = rng.random(len(records))
    x = _positive_quantile(u, spec.pos_strength)

    labels = np.array([r.label.value for r in records], dtype=object)
    scores = np.where(labels == spec.task.value, x, 1.0 - x)
    if spec.task is Label.MM and spec.confuser_bias > 0:
        scores = np.where(labels == Label.SK.value, scores + spec.confuser_bias, scores)
    scores = np.clip(scores, 0.0, 1.0)
    return ScoreTable(spec.task, {r.id: float(s) for r, s in zip(records, scores)})


def aggregate_mean(tables: Sequence[ScoreTable]) -> ScoreTable:
    """Average several score tables id by id.

    Sums use :func:`math.fsum`, which is correctly rounded, so the result
    does not depend on member order.

    Raises
    ------
    TaskMismatch
        If the tables belong to different tasks.
    IdSetMismatch
        If the tables do not cover identical id sets.
    """
    tables = list(tables)
    if not tables:
        raise ValueError("aggregate_mean needs at least one table")
    task = tables[0].task
    ids = set(tables[0].entries)
    for i, t in enumerate(tables[1:], start=1):
        if t.task is not task:
            raise TaskMismatch(f"member {i} is task {t.task.value}, member 0 is {task.value}")
        if set(t.entries) != ids:
            diff = sorted(ids.symmetric_difference(t.entries))
            raise IdSetMismatch(f"member {i} differs from member 0 on ids {diff[:5]}")

    n = len(tables)
    out = {}
    for id_ in sorted(ids):
        values = [t.entries[id_] for t in tables]
        mean = math.fsum(values) / n
        out[id_] = min(max(mean, min(values)), max(values))
    return ScoreTable(task, out)


def resolve_provider(spec: ProviderSpec, truth: Optional[Sequence[GroundTruthRecord]] = None) -> ScoreTable:
    if spec.kind is ProviderKind.file:
        return load_scores(spec.path, spec.task)
    if truth is None:
        raise MissingTruthForOracle("synthetic_oracle provider needs ground truth")
    return synthetic_oracle_scores(truth, spec)


def resolve_ensemble(
    config: EnsembleConfig,
    truth: Optional[Sequence[GroundTruthRecord]] = None,
    workers: int = 1,
) -> ScoreTable:
    """Resolve every member (optionally in threads) and average them."""
    if workers > 1 and len(config.members) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tables = list(pool.map(lambda m: resolve_provider(m, truth), config.members))
    else:
        tables = [resolve_provider(m, truth) for m in config.members]
    return aggregate_mean(tables)
