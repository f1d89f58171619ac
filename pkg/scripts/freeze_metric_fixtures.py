"""Write the hand-built metric fixtures and freeze their oracle values.

Each fixture directory under tests/fixtures/ gets gt.txt, res.txt (MOT
format) and expected.json computed by tests/oracle.py.  Re-run only when a
fixture is deliberately changed; the committed JSON is what tests compare to.

    python3 scripts/freeze_metric_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracle  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

# frames are lists of (id, left, top, width, height)
THREE_FRAME = {
    "gt": [
        [(1, 10, 10, 20, 20), (2, 100, 10, 20, 20)],
        [(1, 12, 10, 20, 20), (2, 102, 10, 20, 20)],
        [(1, 14, 10, 20, 20), (2, 104, 10, 20, 20)],
    ],
    "res": [
        [(7, 11, 10, 20, 20), (8, 100, 11, 20, 20), (9, 300, 300, 10, 10)],
        [(7, 12, 11, 20, 20)],
        [(8, 14, 10, 21, 20), (7, 105, 10, 20, 20)],
    ],
}

# two targets cross; the previous-frame match must survive a better-IoU rival
PERSISTENCE = {
    "gt": [
        [(1, 0, 0, 40, 40), (2, 30, 5, 40, 40)],
        [(1, 10, 1, 40, 40), (2, 22, 4, 40, 40)],
        [(1, 20, 2, 40, 40), (2, 14, 3, 40, 40)],
        [(1, 30, 3, 40, 40), (2, 6, 2, 40, 40)],
    ],
    "res": [
        [(11, 1, 0, 40, 41), (12, 31, 6, 39, 40)],
        [(11, 12, 2, 40, 40), (12, 21, 5, 41, 40)],
        [(11, 17, 3, 41, 40), (12, 19, 2, 40, 39)],
        [(11, 31, 3, 40, 41), (12, 7, 3, 40, 40), (13, 90, 90, 20, 20)],
    ],
}

# fragmented ids, loose localisation, a late-tracked target and stray FPs
FRAGMENTED = {
    "gt": [
        [(1, 0, 0, 50, 50), (2, 200, 0, 30, 60)],
        [(1, 5, 0, 50, 50), (2, 203, 1, 30, 60)],
        [(1, 10, 0, 50, 50), (2, 206, 2, 30, 60), (3, 400, 100, 40, 40)],
        [(1, 15, 0, 50, 50), (2, 209, 3, 30, 60), (3, 402, 101, 40, 40)],
        [(1, 20, 0, 50, 50), (2, 212, 4, 30, 60), (3, 404, 102, 40, 40)],
        [(1, 25, 0, 50, 50), (3, 406, 103, 40, 40)],
    ],
    "res": [
        [(1, 1, 1, 50, 50), (2, 208, 6, 30, 60)],
        [(1, 6, 0, 49, 51), (2, 198, 3, 33, 62), (5, 600, 50, 20, 20)],
        [(1, 12, 2, 50, 50), (2, 214, 9, 28, 55)],
        [(4, 14, 1, 52, 50), (2, 210, 3, 30, 60), (5, 610, 52, 20, 20)],
        [(4, 21, 0, 50, 48), (2, 219, 12, 30, 60), (6, 405, 103, 38, 41)],
        [(4, 30, 4, 50, 50), (6, 407, 104, 40, 40)],
    ],
}

ALL = {"three_frame": THREE_FRAME, "persistence": PERSISTENCE, "fragmented": FRAGMENTED}


def write_mot(path: Path, frames, gt: bool) -> None:
    lines = []
    for k, frame in enumerate(frames, 1):
        for tid, l, t, w, h in frame:
            tail = "1,1,1" if gt else "1.00,-1,-1,-1"
            lines.append(f"{k},{tid},{l},{t},{w},{h},{tail}")
    path.write_text("".join(line + "\n" for line in lines))


def main() -> None:
    for name, fx in ALL.items():
        d = FIXTURES / name
        d.mkdir(parents=True, exist_ok=True)
        write_mot(d / "gt.txt", fx["gt"], gt=True)
        write_mot(d / "res.txt", fx["res"], gt=False)
        gt, res = oracle.read_mot(d / "gt.txt"), oracle.read_mot(d / "res.txt")
        res += [dict() for _ in range(len(gt) - len(res))]
        values = oracle.all_metrics(gt, res)
        (d / "expected.json").write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
        print(name, {k: round(v, 6) for k, v in values.items()})


if __name__ == "__main__":
    main()
