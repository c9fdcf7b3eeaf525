"""Declarative run configuration (a single JSON document).

Example::

    {
      "normalization": {"method": "shades_of_gray", "p": 6, "clip_policy": "clip_to_one"},
      "augmentation": {"rotations": [0, 90, 180, 270], "flips": [false, true]},
      "providers": {
        "MM": {"members": [{"kind": "synthetic_oracle", "seed": 1, "pos_strength": 0.2,
                            "confuser_bias": 0.3}]},
        "SK": {"members": [{"kind": "file", "path": "sk_view0.csv"}]}
      },
      "calibration": {"folds": 5, "holdout_fold": 0, "seed": 0},
      "gate": {"enabled": true, "age_cutoff": 20, "gamma": 0.99},
      "paths": {"truth": "truth.csv", "metadata": "meta.csv", "out_dir": "out"}
    }

Every section is optional. Relative paths are resolved against the
directory holding the config file. ``calibration`` holds either a fold
spec (thresholds derived from data) or inline ``c_mm_tilde``/``c_sk``
values with optional ``alpha``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .augmentation import DEFAULT_AXES, TransformSpec, transform_set_from_config
from .calibration import Calibration
from .color_constancy import NormalizationConfig
from .dataset_io import Label, as_task
from .errors import InvalidConfig, IoFailure
from .fusion import GateConfig
from .providers import EnsembleConfig, ProviderKind

SECTIONS = {"normalization", "augmentation", "providers", "calibration", "gate", "paths"}


@dataclass
class CalibrationPlan:
    """Where calibration thresholds come from."""

    folds: int = 5
    holdout_fold: Optional[int] = 0
    seed: int = 0
    inline: Optional[Calibration] = None


@dataclass
class RunConfig:
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    augmentation: dict = field(default_factory=lambda: dict(DEFAULT_AXES))
    providers: dict[Label, EnsembleConfig] = field(default_factory=dict)
    calibration: CalibrationPlan = field(default_factory=CalibrationPlan)
    gate: GateConfig = field(default_factory=GateConfig)
    paths: dict[str, Optional[str]] = field(default_factory=dict)

    @property
    def transforms(self) -> list[TransformSpec]:
        return transform_set_from_config(self.augmentation)

    def to_dict(self) -> dict:
        norm = asdict(self.normalization)
        norm["method"] = self.normalization.method.value
        norm["clip_policy"] = self.normalization.clip_policy.value
        cal = self.calibration
        if cal.inline is not None:
            calib = {k: v for k, v in cal.inline.to_dict().items() if k != "provenance"}
        else:
            calib = {"folds": cal.folds, "holdout_fold": cal.holdout_fold, "seed": cal.seed}
        return {
            "normalization": norm,
            "augmentation": {
                k: [list(v) if isinstance(v, tuple) else v for v in vals]
                for k, vals in self.augmentation.items()
            },
            "providers": {t.value: e.to_dict() for t, e in sorted(self.providers.items())},
            "calibration": calib,
            "gate": asdict(self.gate),
            "paths": dict(self.paths),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _resolve(base: Path, value):
    if value is None:
        return None
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def run_config_from_dict(d: dict, base_dir=".") -> RunConfig:
    base = Path(base_dir)
    unknown = set(d) - SECTIONS
    if unknown:
        raise InvalidConfig(f"unknown config sections: {sorted(unknown)}")
    try:
        normalization = NormalizationConfig(**d.get("normalization", {}))
        augmentation = dict(DEFAULT_AXES)
        augmentation.update(d.get("augmentation", {}))
        transform_set_from_config(augmentation)

        providers = {}
        for task, ens in d.get("providers", {}).items():
            task = as_task(task)
            members = []
            for m in ens.get("members", []):
                m = dict(m)
                if m.get("kind") == ProviderKind.file.value and "path" in m:
                    m["path"] = _resolve(base, m["path"])
                members.append(m)
            providers[task] = EnsembleConfig.from_dict({**ens, "members": members}, task)

        cal = dict(d.get("calibration", {}))
        if "c_mm_tilde" in cal or "c_sk" in cal:
            plan = CalibrationPlan(inline=Calibration.manual(
                float(cal["c_mm_tilde"]), float(cal["c_sk"]),
                None if cal.get("alpha") is None else float(cal["alpha"])))
        else:
            plan = CalibrationPlan(**cal)

        gate = GateConfig(**d.get("gate", {}))
        paths = {k: _resolve(base, v) for k, v in d.get("paths", {}).items()}
    except (TypeError, ValueError, KeyError) as exc:
        raise InvalidConfig(f"bad run config: {exc}") from None
    unknown_paths = set(paths) - {"truth", "metadata", "out_dir"}
    if unknown_paths:
        raise InvalidConfig(f"unknown path keys: {sorted(unknown_paths)}")
    return RunConfig(normalization, augmentation, providers, plan, gate, paths)


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfig(f"{path}: top level must be a JSON object")
    return run_config_from_dict(data, path.parent)
