"""MOT scoring: CLEAR (MOTA, FP, FN, IDSW, MT, ML), identity (IDF1) and HOTA.

Matching conventions follow the MOTChallenge reference evaluator: IoU on
continuous boxes, a 0.5 threshold for CLEAR and identity metrics, and for
HOTA an alpha sweep over {0.05, 0.10, ..., 0.95}.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .association import linear_sum_assignment
from .geometry import BBox, boxes_to_array, iou_matrix

EPS = np.finfo(float).eps
HOTA_ALPHAS = np.arange(1, 20) * 0.05
MT_RATIO = 0.8
ML_RATIO = 0.2


class MetricsInputError(ValueError):
    pass


@dataclass
class TrackSequence:
    """Per-frame lists of ``(id, BBox)``; used for ground truth and predictions alike."""

    frames: list[list[tuple[int, BBox]]] = field(default_factory=list)

    def __post_init__(self):
        for k, frame in enumerate(self.frames):
            ids = [i for i, _ in frame]
            if len(ids) != len(set(ids)):
                raise MetricsInputError(f"duplicate ids in frame {k + 1}: {sorted(ids)}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def ids(self) -> set[int]:
        return {i for frame in self.frames for i, _ in frame}

    @property
    def num_boxes(self) -> int:
        return sum(len(f) for f in self.frames)

    def truncated(self, n: int) -> "TrackSequence":
        frames = list(self.frames[:n]) + [[] for _ in range(max(0, n - len(self.frames)))]
        return TrackSequence(frames)


GtSequence = TrackSequence


@dataclass
class FrameMatch:
    pairs: list[tuple[int, int]]  # (gt id, pred id)
    ious: list[float]
    num_gt: int
    num_pred: int

    @property
    def tp(self) -> int:
        return len(self.pairs)

    @property
    def fp(self) -> int:
        return self.num_pred - self.tp

    @property
    def fn(self) -> int:
        return self.num_gt - self.tp


def _frame_arrays(frame):
    ids = np.array([i for i, _ in frame], dtype=np.int64)
    return ids, boxes_to_array([b for _, b in frame])


def match_frame(gt, pred, iou_min: float = 0.5, previous: dict[int, int] | None = None) -> FrameMatch:
    """CLEAR matching for one frame.

    Pairs matched in the previous frame (``previous`` maps gt id to pred id)
    are kept whenever their IoU clears ``iou_min``; the remainder is matched
    to maximise total IoU.
    """
    if not 0.0 < iou_min < 1.0:
        raise ValueError("iou_min must lie in (0, 1)")
    for name, frame in (("gt", gt), ("pred", pred)):
        ids = [i for i, _ in frame]
        if len(ids) != len(set(ids)):
            raise MetricsInputError(f"duplicate {name} ids in frame: {sorted(ids)}")
    gt_ids, gt_boxes = _frame_arrays(gt)
    pr_ids, pr_boxes = _frame_arrays(pred)
    if len(gt_ids) == 0 or len(pr_ids) == 0:
        return FrameMatch([], [], len(gt_ids), len(pr_ids))
    sim = iou_matrix(gt_boxes, pr_boxes)
    valid = sim >= iou_min - EPS
    score = np.where(valid, sim, 0.0)
    if previous:
        prev_pr = np.array([previous.get(int(g), -(10**18)) for g in gt_ids])
        persist = (prev_pr[:, None] == pr_ids[None, :]) & valid
        score = score + 1000.0 * persist
    rows, cols = linear_sum_assignment(-score)
    keep = valid[rows, cols]
    rows, cols = rows[keep], cols[keep]
    pairs = [(int(gt_ids[r]), int(pr_ids[c])) for r, c in zip(rows, cols)]
    return FrameMatch(pairs, [float(sim[r, c]) for r, c in zip(rows, cols)], len(gt_ids), len(pr_ids))


def _check_nonempty(gt: TrackSequence):
    if gt.num_boxes == 0:
        raise MetricsInputError("ground truth contains no boxes; metrics are undefined")


def _align(gt: TrackSequence, pred: TrackSequence) -> tuple[TrackSequence, TrackSequence]:
    if len(pred) != len(gt):
        pred = pred.truncated(len(gt))
    return gt, pred


def clear_matches(gt: TrackSequence, pred: TrackSequence, iou_min: float = 0.5) -> list[FrameMatch]:
    gt, pred = _align(gt, pred)
    previous: dict[int, int] = {}
    out = []
    for g, p in zip(gt.frames, pred.frames):
        fm = match_frame(g, p, iou_min, previous)
        # persistence only looks one frame back
        previous = dict(fm.pairs)
        out.append(fm)
    return out


def compute_mota(matches: list[FrameMatch]) -> tuple[float, int, int, int]:
    """Returns ``(mota, fp, fn, id_switches)``."""
    total_gt = sum(m.num_gt for m in matches)
    if total_gt == 0:
        raise MetricsInputError("ground truth contains no boxes; MOTA is undefined")
    fp = sum(m.fp for m in matches)
    fn = sum(m.fn for m in matches)
    last: dict[int, int] = {}
    idsw = 0
    for m in matches:
        for gid, pid in m.pairs:
            if gid in last and last[gid] != pid:
                idsw += 1
            last[gid] = pid
    return 1.0 - (fn + fp + idsw) / total_gt, fp, fn, idsw


def compute_mt_ml(gt: TrackSequence, matches: list[FrameMatch]) -> tuple[int, int]:
    lifespan: dict[int, int] = {}
    for frame in gt.frames:
        for gid, _ in frame:
            lifespan[gid] = lifespan.get(gid, 0) + 1
    tracked: dict[int, int] = {}
    for m in matches:
        for gid, _ in m.pairs:
            tracked[gid] = tracked.get(gid, 0) + 1
    mt = ml = 0
    for gid, n in lifespan.items():
        ratio = tracked.get(gid, 0) / n
        if ratio >= MT_RATIO - 1e-12:
            mt += 1
        elif ratio <= ML_RATIO + 1e-12:
            ml += 1
    return mt, ml


def _id_index(seq: TrackSequence) -> dict[int, int]:
    return {i: k for k, i in enumerate(sorted(seq.ids))}


def identity_counts(gt: TrackSequence, pred: TrackSequence, iou_min: float = 0.5) -> tuple[int, int, int]:
    """Global id matching; returns ``(idtp, idfp, idfn)``."""
    gt, pred = _align(gt, pred)
    gidx, pidx = _id_index(gt), _id_index(pred)
    potential = np.zeros((len(gidx), len(pidx)))
    for g, p in zip(gt.frames, pred.frames):
        if not g or not p:
            continue
        gi, gb = _frame_arrays(g)
        pi, pb = _frame_arrays(p)
        hit = iou_matrix(gb, pb) >= iou_min - EPS
        r, c = np.nonzero(hit)
        np.add.at(potential, ([gidx[int(x)] for x in gi[r]], [pidx[int(x)] for x in pi[c]]), 1)
    idtp = 0
    if potential.size:
        rows, cols = linear_sum_assignment(-potential)
        idtp = int(potential[rows, cols].sum())
    return idtp, pred.num_boxes - idtp, gt.num_boxes - idtp


def compute_idf1(gt: TrackSequence, pred: TrackSequence, iou_min: float = 0.5) -> float:
    _check_nonempty(gt)
    idtp, idfp, idfn = identity_counts(gt, pred, iou_min)
    return 2 * idtp / (2 * idtp + idfp + idfn)


@dataclass
class HotaResult:
    hota: float
    deta: float
    assa: float
    loca: float
    per_alpha: np.ndarray  # HOTA(alpha) on HOTA_ALPHAS
    deta_alpha: np.ndarray
    assa_alpha: np.ndarray


def hota_details(gt: TrackSequence, pred: TrackSequence) -> HotaResult:
    gt, pred = _align(gt, pred)
    _check_nonempty(gt)
    gidx, pidx = _id_index(gt), _id_index(pred)
    ng, npred = len(gidx), len(pidx)
    na = len(HOTA_ALPHAS)

    frames = []
    potential = np.zeros((ng, npred))
    gt_count = np.zeros(ng)
    pr_count = np.zeros(npred)
    for g, p in zip(gt.frames, pred.frames):
        gi = np.array([gidx[i] for i, _ in g], dtype=np.intp)
        pi = np.array([pidx[i] for i, _ in p], dtype=np.intp)
        sim = iou_matrix(boxes_to_array([b for _, b in g]), boxes_to_array([b for _, b in p]))
        frames.append((gi, pi, sim))
        if len(gi) and len(pi):
            denom = sim.sum(0)[None, :] + sim.sum(1)[:, None] - sim
            ratio = np.zeros_like(sim)
            ok = denom > EPS
            ratio[ok] = sim[ok] / denom[ok]
            potential[np.ix_(gi, pi)] += ratio
        gt_count[gi] += 1
        pr_count[pi] += 1
    alignment = potential / (gt_count[:, None] + pr_count[None, :] - potential)

    tp = np.zeros(na)
    fn = np.zeros(na)
    fp = np.zeros(na)
    loc = np.zeros(na)
    match_counts = np.zeros((na, ng, npred))
    for gi, pi, sim in frames:
        if len(gi) == 0 or len(pi) == 0:
            fn += len(gi)
            fp += len(pi)
            continue
        score = alignment[np.ix_(gi, pi)] * sim
        rows, cols = linear_sum_assignment(-score)
        msim = sim[rows, cols]
        for a, alpha in enumerate(HOTA_ALPHAS):
            ok = msim >= alpha - EPS
            n_ok = int(ok.sum())
            tp[a] += n_ok
            fn[a] += len(gi) - n_ok
            fp[a] += len(pi) - n_ok
            loc[a] += msim[ok].sum()
            match_counts[a, gi[rows[ok]], pi[cols[ok]]] += 1

    assa = np.zeros(na)
    for a in range(na):
        mc = match_counts[a]
        ass = mc / np.maximum(1.0, gt_count[:, None] + pr_count[None, :] - mc)
        assa[a] = (mc * ass).sum() / max(1.0, tp[a])
    deta = tp / np.maximum(1.0, tp + fn + fp)
    per_alpha = np.sqrt(deta * assa)
    loca = np.where(tp > 0, loc / np.maximum(1.0, tp), 1.0)
    return HotaResult(
        float(per_alpha.mean()), float(deta.mean()), float(assa.mean()), float(loca.mean()),
        per_alpha, deta, assa,
    )


def compute_hota(gt: TrackSequence, pred: TrackSequence) -> float:
    return hota_details(gt, pred).hota


@dataclass
class MetricsReport:
    mota: float
    idf1: float
    hota: float
    fp: int
    fn: int
    id_switches: int
    mostly_tracked: int
    mostly_lost: int
    num_gt_boxes: int = 0
    num_gt_ids: int = 0
    deta: float = 0.0
    assa: float = 0.0
    loca: float = 0.0
    per_frame_tp: list[int] = field(default_factory=list, repr=False)
    per_frame_fp: list[int] = field(default_factory=list, repr=False)
    per_frame_fn: list[int] = field(default_factory=list, repr=False)

    KEYS = ("mota", "idf1", "hota", "fp", "fn", "id_switches", "mostly_tracked", "mostly_lost",
            "num_gt_boxes", "num_gt_ids", "deta", "assa", "loca")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.KEYS}

    def to_keyvalue(self) -> str:
        lines = []
        for k, v in self.as_dict().items():
            lines.append(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        head = ["MOTA", "IDF1", "HOTA", "FP", "FN", "IDs", "MT", "ML"]
        vals = [
            f"{100 * self.mota:.2f}", f"{100 * self.idf1:.2f}", f"{100 * self.hota:.2f}",
            str(self.fp), str(self.fn), str(self.id_switches),
            str(self.mostly_tracked), str(self.mostly_lost),
        ]
        widths = [max(len(h), len(v)) for h, v in zip(head, vals)]
        row = lambda cells: " | ".join(c.rjust(w) for c, w in zip(cells, widths))  # noqa: E731
        return "\n".join([row(head), "-+-".join("-" * w for w in widths), row(vals)]) + "\n"


def evaluate(gt: TrackSequence, pred: TrackSequence, iou_min: float = 0.5) -> MetricsReport:
    gt, pred = _align(gt, pred)
    _check_nonempty(gt)
    matches = clear_matches(gt, pred, iou_min)
    mota, fp, fn, idsw = compute_mota(matches)
    mt, ml = compute_mt_ml(gt, matches)
    h = hota_details(gt, pred)
    return MetricsReport(
        mota=mota,
        idf1=compute_idf1(gt, pred, iou_min),
        hota=h.hota,
        fp=fp,
        fn=fn,
        id_switches=idsw,
        mostly_tracked=mt,
        mostly_lost=ml,
        num_gt_boxes=gt.num_boxes,
        num_gt_ids=len(gt.ids),
        deta=h.deta,
        assa=h.assa,
        loca=h.loca,
        per_frame_tp=[m.tp for m in matches],
        per_frame_fp=[m.fp for m in matches],
        per_frame_fn=[m.fn for m in matches],
    )
