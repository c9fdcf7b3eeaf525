"""Complementary SK-into-MM score fusion, age gating, and the scoring pipeline.

A sample the SK classifier places above its EER threshold has its MM score
pulled down in proportion to how far the SK score clears that threshold::

    F_MM = max(0, F~_MM - C~_MM - alpha * (F_SK - C_SK))   if F_SK > C_SK
    F_MM = max(0, F~_MM - C~_MM)                            otherwise

The second line extends the rule continuously below the SK threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .calibration import Calibration
from .dataset_io import Label, MetadataRecord, ScoreTable
from .errors import IdSetMismatch, InvalidConfig, MissingCalibration


@dataclass(frozen=True)
class GateConfig:
    enabled: bool = False
    age_cutoff: int = 20
    gamma: float = 0.99
    use_sex: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidConfig(f"gate ceiling ratio must be in (0, 1], got {self.gamma}")
        if self.use_sex:
            raise InvalidConfig("sex-based gating is reserved and not implemented")


@dataclass
class FusedScores:
    mm: ScoreTable
    sk: ScoreTable
    calibration: Calibration


def fuse_mm_score(f_mm_tilde: float, f_sk: float, calib: Calibration) -> float:
    if f_sk > calib.c_sk:
        fused = f_mm_tilde - calib.c_mm_tilde - calib.alpha * (f_sk - calib.c_sk)
    else:
        fused = f_mm_tilde - calib.c_mm_tilde
    return min(max(0.0, fused), 1.0)


def gate_sk_score(
    f_sk: float,
    meta: Optional[MetadataRecord],
    calib: Calibration,
    gate: GateConfig,
) -> float:
    """Cap the SK score of young patients just below the SK threshold.

    Scores are never raised; a missing age leaves the score untouched.
    """
    if not gate.enabled or meta is None or meta.age is None or meta.age >= gate.age_cutoff:
        return f_sk
    return min(f_sk, gate.gamma * calib.c_sk)


def run_pipeline(
    mm_base: ScoreTable,
    sk_base: ScoreTable,
    calib: Optional[Calibration],
    metadata: Iterable[MetadataRecord] | Mapping[str, MetadataRecord] = (),
    gate: GateConfig = GateConfig(),
) -> FusedScores:
    """Gate the SK scores, then fuse them into the MM scores, id by id."""
    if calib is None:
        raise MissingCalibration("fusion needs a calibration")
    if mm_base.task is not Label.MM or sk_base.task is not Label.SK:
        raise InvalidConfig("run_pipeline expects an MM table and an SK table")
    if set(mm_base.entries) != set(sk_base.entries):
        diff = sorted(set(mm_base.entries).symmetric_difference(sk_base.entries))
        raise IdSetMismatch(f"MM and SK tables differ on {len(diff)} ids, e.g. {diff[:5]}")
    if not isinstance(metadata, Mapping):
        metadata = {m.id: m for m in metadata}

    mm_out, sk_out = {}, {}
    for id_ in mm_base.ids():
        sk = gate_sk_score(sk_base.entries[id_], metadata.get(id_), calib, gate)
        sk_out[id_] = sk
        mm_out[id_] = fuse_mm_score(mm_base.entries[id_], sk, calib)
    return FusedScores(ScoreTable(Label.MM, mm_out), ScoreTable(Label.SK, sk_out), calib)
