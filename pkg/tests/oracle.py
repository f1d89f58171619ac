"""From-definition MOT metrics used as a test oracle.

Deliberately shares no code with ``cmctrack``: boxes are plain
``(left, top, width, height)`` tuples, IoU is recomputed here, and every
optimal matching is found by exhaustive enumeration rather than a
Hungarian solver.  Only suitable for small fixtures.

Sequences are ``list[dict[id, (l, t, w, h)]]``, one dict per frame.
"""
from __future__ import annotations

import itertools
import math

ALPHAS = [0.05 * i for i in range(1, 20)]
EPS = 1e-10


def box_iou(a, b) -> float:
    al, at, aw, ah = a
    bl, bt, bw, bh = b
    iw = min(al + aw, bl + bw) - max(al, bl)
    ih = min(at + ah, bt + bh) - max(at, bt)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def best_matching(n_rows: int, n_cols: int, score, allowed):
    """Partial one-to-one matching maximising the summed score over allowed pairs.

    Enumerates, for each row, every column choice (or none).  Ties are broken
    by enumeration order, so fixtures should avoid exact ties.
    """
    best, best_pairs = -math.inf, []
    options = [[None] + [j for j in range(n_cols) if allowed(i, j)] for i in range(n_rows)]
    for choice in itertools.product(*options):
        used = [j for j in choice if j is not None]
        if len(used) != len(set(used)):
            continue
        total = sum(score(i, j) for i, j in enumerate(choice) if j is not None)
        if total > best + 1e-12:
            best = total
            best_pairs = [(i, j) for i, j in enumerate(choice) if j is not None]
    return best_pairs


def clear(gt, pred, thr: float = 0.5):
    """CLEAR-MOT counts with one-frame persistence and last-match id switches."""
    tp = fp = fn = idsw = 0
    prev_frame_match: dict = {}  # gt id -> pred id matched in the previous frame only
    last_match: dict = {}  # gt id -> pred id of its most recent match
    matched_frames: dict = {}
    for g, p in zip(gt, pred):
        gids, pids = sorted(g), sorted(p)
        sim = [[box_iou(g[a], p[b]) for b in pids] for a in gids]

        def score(i, j):
            bonus = 1000.0 if prev_frame_match.get(gids[i]) == pids[j] else 0.0
            return bonus + sim[i][j]

        pairs = best_matching(len(gids), len(pids), score, lambda i, j: sim[i][j] >= thr - EPS)
        current = {}
        for i, j in pairs:
            gid, pid = gids[i], pids[j]
            if gid in last_match and last_match[gid] != pid:
                idsw += 1
            last_match[gid] = pid
            current[gid] = pid
            matched_frames[gid] = matched_frames.get(gid, 0) + 1
        prev_frame_match = current
        tp += len(pairs)
        fn += len(gids) - len(pairs)
        fp += len(pids) - len(pairs)
    n_gt = tp + fn
    mota = 1.0 - (fn + fp + idsw) / n_gt
    lengths: dict = {}
    for g in gt:
        for gid in g:
            lengths[gid] = lengths.get(gid, 0) + 1
    ratios = {gid: matched_frames.get(gid, 0) / n for gid, n in lengths.items()}
    mt = sum(r >= 0.8 for r in ratios.values())
    ml = sum(r <= 0.2 for r in ratios.values())
    return {"mota": mota, "tp": tp, "fp": fp, "fn": fn, "idsw": idsw, "mt": mt, "ml": ml}


def idf1(gt, pred, thr: float = 0.5):
    """Identity F1 with the id bijection found over all injective id maps."""
    gids = sorted({i for f in gt for i in f})
    pids = sorted({i for f in pred for i in f})
    overlap = {}
    for g, p in zip(gt, pred):
        for a in g:
            for b in p:
                if box_iou(g[a], p[b]) >= thr - EPS:
                    overlap[(a, b)] = overlap.get((a, b), 0) + 1
    n_gt = sum(len(f) for f in gt)
    n_pred = sum(len(f) for f in pred)
    best = 0
    # map each gt id to a distinct pred id (or nothing)
    k = len(gids)
    pad = pids + [None] * k
    for perm in itertools.permutations(pad, k):
        tot = sum(overlap.get((a, b), 0) for a, b in zip(gids, perm) if b is not None)
        best = max(best, tot)
    return {"idf1": 2 * best / (n_gt + n_pred), "idtp": best}


def hota(gt, pred):
    """HOTA averaged over alpha in 0.05..0.95, reference-evaluator semantics."""
    gids = sorted({i for f in gt for i in f})
    pids = sorted({i for f in pred for i in f})
    # global alignment: soft co-occurrence normalised per frame row/column sums
    pot = {(a, b): 0.0 for a in gids for b in pids}
    gcount = {a: 0 for a in gids}
    pcount = {b: 0 for b in pids}
    sims = []
    for g, p in zip(gt, pred):
        ga, pa = sorted(g), sorted(p)
        sim = [[box_iou(g[a], p[b]) for b in pa] for a in ga]
        sims.append((ga, pa, sim))
        for i, a in enumerate(ga):
            gcount[a] += 1
        for j, b in enumerate(pa):
            pcount[b] += 1
        for i, a in enumerate(ga):
            for j, b in enumerate(pa):
                denom = sum(sim[i]) + sum(sim[r][j] for r in range(len(ga))) - sim[i][j]
                if denom > EPS:
                    pot[(a, b)] += sim[i][j] / denom
    align = {
        (a, b): pot[(a, b)] / (gcount[a] + pcount[b] - pot[(a, b)]) for a in gids for b in pids
    }
    per_alpha = []
    n_gt = sum(gcount.values())
    n_pred = sum(pcount.values())
    tp = [0] * len(ALPHAS)
    loc = [0.0] * len(ALPHAS)
    counts = [dict() for _ in ALPHAS]
    for ga, pa, sim in sims:
        pairs = best_matching(
            len(ga), len(pa),
            lambda i, j: align[(ga[i], pa[j])] * sim[i][j],
            lambda i, j: align[(ga[i], pa[j])] * sim[i][j] > 0,
        )
        for k, alpha in enumerate(ALPHAS):
            for i, j in pairs:
                if sim[i][j] >= alpha - EPS:
                    tp[k] += 1
                    loc[k] += sim[i][j]
                    key = (ga[i], pa[j])
                    counts[k][key] = counts[k].get(key, 0) + 1
    for k in range(len(ALPHAS)):
        fn, fp = n_gt - tp[k], n_pred - tp[k]
        deta = tp[k] / max(1, tp[k] + fn + fp)
        ass = 0.0
        for (a, b), c in counts[k].items():
            ass += c * c / (gcount[a] + pcount[b] - c)
        assa = ass / max(1, tp[k])
        loca = loc[k] / max(1, tp[k]) if tp[k] else 1.0
        per_alpha.append((math.sqrt(deta * assa), deta, assa, loca))
    n = len(ALPHAS)
    return {
        "hota": sum(r[0] for r in per_alpha) / n,
        "deta": sum(r[1] for r in per_alpha) / n,
        "assa": sum(r[2] for r in per_alpha) / n,
        "loca": sum(r[3] for r in per_alpha) / n,
    }


def read_mot(path):
    """MOT text file -> list of per-frame dicts (frames 1..max)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                f = line.strip().split(",")
                rows.append((int(f[0]), int(f[1]), tuple(float(v) for v in f[2:6])))
    n = max(r[0] for r in rows)
    frames = [dict() for _ in range(n)]
    for fr, i, box in rows:
        frames[fr - 1][i] = box
    return frames


def all_metrics(gt, pred) -> dict:
    out = {}
    out.update(clear(gt, pred))
    out.update(idf1(gt, pred))
    out.update(hota(gt, pred))
    return out
