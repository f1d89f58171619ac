"""One-off comparison of the fixture metrics against the TrackEval package.

TrackEval is not a dependency; install it by hand (``pip install trackeval``)
to run this.  The script feeds each fixture straight into TrackEval's metric
classes and prints both value sets side by side.  TrackEval counts MT/ML with
strict inequalities, so those two columns may legitimately differ at the
0.8/0.2 boundaries.

    python3 scripts/crosscheck_reference.py [--freeze]

With ``--freeze`` the reference values are also written to
tests/fixtures/reference_evaluator.json.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracle  # noqa: E402

# TrackEval still references aliases removed in numpy 2
for alias, typ in (("float", float), ("int", int), ("bool", bool)):
    if not hasattr(np, alias):
        setattr(np, alias, typ)

from trackeval.metrics import CLEAR, HOTA, Identity  # noqa: E402


def to_data(gt, res):
    gids = sorted({i for f in gt for i in f})
    pids = sorted({i for f in res for i in f})
    gmap = {g: k for k, g in enumerate(gids)}
    pmap = {p: k for k, p in enumerate(pids)}
    data = {"gt_ids": [], "tracker_ids": [], "similarity_scores": []}
    for g, p in zip(gt, res):
        ga, pa = sorted(g), sorted(p)
        data["gt_ids"].append(np.array([gmap[a] for a in ga], dtype=int))
        data["tracker_ids"].append(np.array([pmap[b] for b in pa], dtype=int))
        sim = np.array([[oracle.box_iou(g[a], p[b]) for b in pa] for a in ga]).reshape(len(ga), len(pa))
        data["similarity_scores"].append(sim)
    data["num_timesteps"] = len(gt)
    data["num_gt_ids"] = len(gids)
    data["num_tracker_ids"] = len(pids)
    data["num_gt_dets"] = sum(len(f) for f in gt)
    data["num_tracker_dets"] = sum(len(f) for f in res)
    return data


def main() -> None:
    quiet = {"PRINT_CONFIG": False}
    frozen = {}
    for d in sorted((ROOT / "tests" / "fixtures").iterdir()):
        if not (d / "gt.txt").exists():
            continue
        gt, res = oracle.read_mot(d / "gt.txt"), oracle.read_mot(d / "res.txt")
        res += [dict() for _ in range(len(gt) - len(res))]
        data = to_data(gt, res)
        h = HOTA(quiet).eval_sequence(data)
        c = CLEAR(quiet).eval_sequence(data)
        i = Identity(quiet).eval_sequence(data)
        ref = {
            "hota": float(np.mean(h["HOTA"])),
            "deta": float(np.mean(h["DetA"])),
            "assa": float(np.mean(h["AssA"])),
            "loca": float(np.mean(h["LocA"])),
            "mota": float(c["MOTA"]),
            "idsw": int(c["IDSW"]),
            "mt": int(c["MT"]),
            "ml": int(c["ML"]),
            "idf1": float(i["IDF1"]),
        }
        frozen[d.name] = ref
        expected = json.loads((d / "expected.json").read_text())
        print(d.name)
        for k, v in ref.items():
            diff = abs(v - expected[k])
            print(f"  {k:5s} reference={v:.12f} oracle={expected[k]:.12f} diff={diff:.2e}")
    if "--freeze" in sys.argv[1:]:
        out = ROOT / "tests" / "fixtures" / "reference_evaluator.json"
        out.write_text(json.dumps(frozen, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
