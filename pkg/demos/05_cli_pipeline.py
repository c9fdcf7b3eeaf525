"""
End-to-end run with the command line tool
=========================================

synth-scores -> calibrate -> fuse -> evaluate, all in a scratch directory.
Every command prints one key=value summary line. The MM members here are
fairly strong, so the fused MM AUC comes out below the base AUC; see
04_calibration_and_fusion.py for why.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

from lesionfusion.dataset_io import GroundTruthRecord, Label, write_ground_truth

work = Path(tempfile.mkdtemp(prefix="lesionfusion-"))
labels = [Label.MM] * 60 + [Label.SK] * 40 + [Label.NCN] * 200
write_ground_truth([GroundTruthRecord(f"ISIC_{i:07d}", lab) for i, lab in enumerate(labels)],
                   work / "truth.csv")

config = {
    "providers": {
        "MM": {"members": [{"kind": "synthetic_oracle", "seed": s, "pos_strength": 0.3,
                            "confuser_bias": 0.3} for s in range(3)]},
        "SK": {"members": [{"kind": "synthetic_oracle", "seed": 10 + s, "pos_strength": 0.9}
                           for s in range(3)]},
    },
    "calibration": {"folds": 3, "holdout_fold": 0},
}
(work / "run.json").write_text(json.dumps(config, indent=2))
out = work / "out"


def cli(*args):
    cmd = [sys.executable, "-m", "lesionfusion", "--config", str(work / "run.json"),
           "--out-dir", str(out), "--seed", "7", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout.strip() or proc.stderr.strip())
    return proc.returncode


cli("synth-scores", "--truth", str(work / "truth.csv"))
cli("evaluate", "--mm-scores", str(out / "scores_mm.csv"), "--sk-scores",
    str(out / "scores_sk.csv"), "--truth", str(work / "truth.csv"), "--out", str(out / "base.json"))
cli("calibrate", "--mm-scores", str(out / "scores_mm.csv"), "--sk-scores",
    str(out / "scores_sk.csv"), "--truth", str(work / "truth.csv"))
cli("fuse", "--mm-scores", str(out / "scores_mm.csv"), "--sk-scores",
    str(out / "scores_sk.csv"), "--calibration", str(out / "calibration.json"))
cli("evaluate", "--mm-scores", str(out / "fused_mm.csv"), "--sk-scores",
    str(out / "fused_sk.csv"), "--truth", str(work / "truth.csv"),
    "--emit-roc", str(out / "roc"))
print("outputs in", out)
