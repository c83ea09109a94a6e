"""The command-line workflow end to end on synthetic data, in a temp directory.

Equivalent shell commands are printed as they run.

Run: python3 demos/07_cli_walkthrough.py
"""

import json
import tempfile
from pathlib import Path

from focusarea.cli import main

root = Path(tempfile.mkdtemp(prefix="focusarea_demo_"))
(root / "small.ini").write_text("[sl]\nepochs = 1\nlr = 0.05\n\n[rl]\nlr = 0.05\niterations = 3\nbatch_size = 4\n")


def run(*argv):
    argv = [str(a) for a in argv]
    print("$ focusarea", " ".join(argv))
    code = main(argv)
    assert code == 0, code


for split, seed, n in (("train", 1, 8), ("val", 2, 4)):
    run("build-dataset", "--synthetic", n, "--seed", seed, "--split", split, "--out", root / split)
    run("summarize", "--dataset", root / split / "dataset.jsonl", "--seed", seed, "--out", root / split)
    run("gen-gold-focus", "--dataset", root / split / "summarized.jsonl", "--out", root / split)
run("train-sl", "--dataset", root / "train/gold.jsonl", "--policy", "candidate", "--config", root / "small.ini",
    "--out", root / "sl")
run("train-rl", "--dataset", root / "train/gold.jsonl", "--val", root / "val/gold.jsonl",
    "--policy-dir", root / "sl/policy", "--config", root / "small.ini", "--out", root / "rl")
run("ablate", "--reward", "rf1", "rf2", "--dataset", root / "train/gold.jsonl", "--val", root / "val/gold.jsonl",
    "--policy-dir", root / "sl/policy", "--config", root / "small.ini", "--out", root / "ablate")
for focus in ("none", "gold"):
    run("eval", "--dataset", root / "val/gold.jsonl", "--focus", focus, "--out", root / f"eval_{focus}")
run("eval", "--dataset", root / "val/gold.jsonl", "--focus", "policy", "--policy-dir", root / "rl/checkpoints/final",
    "--out", root / "eval_policy")
run("export-annotation-csv", "--dataset", root / "val/gold.jsonl", "--policy-dir", root / "rl/checkpoints/final",
    "--out", root / "annotation")

print("\nmanifest of the last eval:")
print(json.dumps(json.loads((root / "eval_policy" / "manifest.json").read_text())["outputs"], indent=2))
print("outputs under", root)
