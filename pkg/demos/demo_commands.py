"""
The command line pipeline and its manifests
===========================================

Every subcommand writes a manifest next to its first output: the exact
arguments plus SHA-256 digests of the inputs. replay_manifest re-runs the
recorded command with outputs redirected, reproducing results byte for
byte. This script drives the whole chain in a temporary directory.
"""

import json
import tempfile
from pathlib import Path

from scendetect.cli import replay_manifest, run_command

tmp = Path(tempfile.mkdtemp(prefix="scendetect_demo_"))
print("working in", tmp)

catalog = tmp / "catalog.tsv"
catalog.write_text("wash_hair\twashing ones hair\n"
                   "take_bath\ttaking a bath\n"
                   "make_tea\tpreparing tea\n", encoding="utf-8")

steps = [
    ["gen-synth", "--catalog", str(catalog),
     "--out-corpus", str(tmp / "corpus.jsonl"),
     "--out-annotations", str(tmp / "gold.jsonl"),
     "--docs-per-scenario", "6", "--words-per-scenario", "30",
     "--sentences-per-doc", "6", "--seed", "3"],
    ["train-lda", "--corpus", str(tmp / "corpus.jsonl"),
     "--out-model", str(tmp / "lda.json"),
     "--topics", "3", "--iterations", "30", "--seed", "1"],
    ["train-clf", "--corpus", str(tmp / "corpus.jsonl"),
     "--annotations", str(tmp / "gold.jsonl"), "--catalog", str(catalog),
     "--out-model", str(tmp / "clf.json"), "--epochs", "15"],
    ["detect", "--corpus", str(tmp / "corpus.jsonl"),
     "--lda", str(tmp / "lda.json"), "--model", str(tmp / "clf.json"),
     "--out", str(tmp / "detected.jsonl")],
    ["eval", "--corpus", str(tmp / "corpus.jsonl"),
     "--gold", str(tmp / "gold.jsonl"),
     "--scores", str(tmp / "detected.scores.jsonl"),
     "--out-report", str(tmp / "report.txt")],
]
for argv in steps:
    code = run_command(argv)
    print(f"$ {argv[0]:10s} -> exit {code}")
    assert code == 0

print("\n" + (tmp / "report.txt").read_text())

# the manifest records command, arguments, and input digests
manifest_path = tmp / "detected.jsonl.manifest.json"
manifest = json.loads(manifest_path.read_text())
print("manifest command:", manifest["command"])
print("manifest inputs:", len(manifest["inputs"]), "digested files")

# replay into a fresh directory and compare bytes
replay_dir = tmp / "replay"
replay_dir.mkdir()
outputs = replay_manifest(str(manifest_path), str(replay_dir))
for dest, new_path in outputs.items():
    same = Path(manifest["outputs"][dest]).read_bytes() == \
        Path(new_path).read_bytes()
    print(f"{dest}: byte-identical = {same}")
