"""
The whole experiment chain from one config
==========================================

One JSON config drives dataset generation, sparse and dense baselines,
document expansion, negative mining, training, evaluation, and paired
significance against the BM25 baseline. Everything is seeded: running the
pipeline twice with the same config produces byte-identical artifacts.

The same config works on the command line:  dialret pipeline --config <file>
"""

import json
import tempfile
from pathlib import Path

from dialret import load_config, run_pipeline

config = {
    "version": 1,
    "seed": 17,
    "synthetic": {
        "num_train": 150,
        "num_valid": 20,
        "num_test": 50,
        "num_distractors": 120,
        "num_components": 20,
        "seed": 2,
        "duplicates_per_positive": 3,
    },
    "ks": [1, 10],
    "significance_k": 10,
    "dense": {"dim": 32},
    "train": {
        "batch_size": 15,
        "learning_rate": 4.0,
        "weight_decay": 0.0,
        "total_steps": 600,
        "warmup_fraction": 0.1,
        "eval_every": 200,
        "seed": 1,
    },
    "samplers": [
        {"kind": "random", "n": 5},
        {"kind": "dense_top", "n": 5},
        {"kind": "denoised", "n": 5, "depth": 80, "window": 10},
    ],
}

workdir = Path(tempfile.mkdtemp(prefix="dialret-demo-"))
cfg_path = workdir / "config.json"
cfg_path.write_text(json.dumps(config, indent=2))

rows = run_pipeline(load_config(cfg_path), workdir / "out")

print((workdir / "out" / "report.txt").read_text())
print("artifacts under", workdir / "out")
for sub in ("runs", "checkpoints", "negatives", "history"):
    names = sorted(p.name for p in (workdir / "out" / sub).iterdir())
    print(f"  {sub}/: {', '.join(names)}")
