"""Delta-embedded jumping-window feature pipeline.

Canonical records are grouped per (receiver, sender) stream, time-sorted, cut
into non-overlapping chunks of 5 messages, and embedded as 4x6 delta matrices:
each row k (k = 1..4) holds

    dt     = sendTime(k) - sendTime(k-1)        (consecutive)
    dposx  = posx(k) - posx(0)                  (relative to first message)
    dposy  = posy(k) - posy(0)
    dspdx  = spdx(k) - spdx(0)
    dspdy  = spdy(k) - spdy(0)
    dacl   = acl(k)  - acl(0)

The window label is the label of the 5th (last) source message.  Class
balancing keeps every misbehavior window and down-samples regular windows to
twice the mean misbehavior class size; columns are standardized with a
population-std scaler fit on the balanced set.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

N_FEATURES = 6
ROWS_PER_WINDOW = 4
WINDOW_SIZE = 5  # messages per jumping window
FEATURE_COLUMNS = ("dt", "dposx", "dposy", "dspdx", "dspdy", "dacl")

WINDOWS_MAGIC = b"PGW1"


@dataclass
class FeatureWindow:
    rows: np.ndarray  # (4, 6) float64
    label: int
    origin: tuple  # (rx, senderPseudo, first sendTime)


@dataclass
class ScalerParams:
    mean: np.ndarray  # (6,)
    std: np.ndarray  # (6,)


@dataclass
class SplitDataset:
    train_X: np.ndarray  # (n, 4, 6)
    train_y: np.ndarray  # (n,)
    val_X: np.ndarray
    val_y: np.ndarray
    split_fraction: float
    seed: int


@dataclass
class WindowReport:
    rejected: list = field(default_factory=list)  # (origin, reason)


def group_sort_trim(records):
    """Group records by (rx, senderPseudo), sort by sendTime, trim to a multiple of 5.

    Returns a list of groups ordered by key for determinism.  Groups shorter
    than 5 messages come back empty.
    """
    groups = {}
    for rec in records:
        groups.setdefault((rec.rx, rec.sender_pseudo), []).append(rec)
    out = []
    for key in sorted(groups):
        grp = sorted(groups[key], key=lambda r: r.send_time)
        keep = len(grp) - len(grp) % WINDOW_SIZE
        out.append(grp[:keep])
    return out


def make_windows(group, report=None):
    """Cut one trimmed group into unscaled FeatureWindows.

    Chunks with a non-monotone timestamp (dt <= 0) are rejected; the rejection
    is appended to `report` when given.
    """
    windows = []
    for start in range(0, len(group), WINDOW_SIZE):
        chunk = group[start : start + WINDOW_SIZE]
        origin = (chunk[0].rx, chunk[0].sender_pseudo, chunk[0].send_time)
        rows = np.empty((ROWS_PER_WINDOW, N_FEATURES), dtype=np.float64)
        ok = True
        first = chunk[0]
        for k in range(1, WINDOW_SIZE):
            dt = chunk[k].send_time - chunk[k - 1].send_time
            if dt <= 0.0:
                ok = False
                break
            m = chunk[k]
            rows[k - 1, 0] = dt
            rows[k - 1, 1] = m.posx - first.posx
            rows[k - 1, 2] = m.posy - first.posy
            rows[k - 1, 3] = m.spdx - first.spdx
            rows[k - 1, 4] = m.spdy - first.spdy
            rows[k - 1, 5] = m.acl - first.acl
        if not ok:
            if report is not None:
                report.rejected.append((origin, "non-monotone timestamps"))
            continue
        windows.append(FeatureWindow(rows=rows, label=chunk[-1].lab, origin=origin))
    return windows


def windows_from_records(records, report=None):
    """group_sort_trim + make_windows over a whole record set."""
    windows = []
    for group in group_sort_trim(records):
        windows.extend(make_windows(group, report))
    return windows


def balance(windows, seed):
    """Down-sample regular windows to 2x the mean misbehavior class size.

    All misbehavior windows are kept untouched.  When there are fewer regular
    windows than the target, all of them are kept (no up-sampling).
    """
    regular = [w for w in windows if w.label == 0]
    misbehavior = [w for w in windows if w.label != 0]
    if not regular:
        raise ValueError("cannot balance: no regular (label 0) windows")
    if misbehavior:
        counts = {}
        for w in misbehavior:
            counts[w.label] = counts.get(w.label, 0) + 1
        target = int(round(2.0 * (len(misbehavior) / len(counts))))
    else:
        target = len(regular)
    if len(regular) > target:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(regular), size=target, replace=False)
        regular = [regular[i] for i in np.sort(idx)]
    return misbehavior + regular


def fit_scaler(windows):
    """Column mean and population std over all rows of all windows.

    Zero-variance columns get std 1 (with a warning) so scaling is always
    defined.
    """
    stacked = np.concatenate([w.rows for w in windows], axis=0)
    if stacked.shape[0] < 2:
        raise ValueError("need at least 2 rows to fit a scaler")
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)  # population std (ddof=0)
    degenerate = std == 0.0
    if degenerate.any():
        cols = [FEATURE_COLUMNS[i] for i in np.flatnonzero(degenerate)]
        warnings.warn(f"zero-variance feature column(s) {cols}; std set to 1")
        std = np.where(degenerate, 1.0, std)
    return ScalerParams(mean=mean, std=std)


def apply_scaler(rows, params):
    """Standardize a (…, 6) array of window rows."""
    return (rows - params.mean) / params.std


def split(windows, seed, fraction=0.33):
    """Seeded shuffle; first ceil(fraction*n) windows become validation."""
    n = len(windows)
    if n < 3:
        raise ValueError("need at least 3 windows to split")
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(np.ceil(fraction * n))
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    X = np.stack([w.rows for w in windows])
    y = np.array([w.label for w in windows], dtype=np.int64)
    return SplitDataset(
        train_X=X[train_idx],
        train_y=y[train_idx],
        val_X=X[val_idx],
        val_y=y[val_idx],
        split_fraction=fraction,
        seed=seed,
    )


def save_windows(path, X, y):
    """Binary tensor file: magic PGW1, uint64 dims (n,4,6), row-major float64.

    Labels go to `path + ".labels"` as one integer per line.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[1:] != (ROWS_PER_WINDOW, N_FEATURES):
        raise ValueError(f"expected (n, 4, 6) tensor, got {X.shape}")
    with open(path, "wb") as fh:
        fh.write(WINDOWS_MAGIC)
        fh.write(struct.pack("<3Q", *X.shape))
        fh.write(X.tobytes(order="C"))
    with open(str(path) + ".labels", "w") as fh:
        for lab in y:
            fh.write(f"{int(lab)}\n")


def load_windows(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != WINDOWS_MAGIC:
            raise ValueError(f"not a window tensor file (magic {magic!r})")
        dims = struct.unpack("<3Q", fh.read(24))
        X = np.frombuffer(fh.read(int(np.prod(dims)) * 8), dtype=np.float64).reshape(dims)
    y = np.loadtxt(str(path) + ".labels", dtype=np.int64, ndmin=1)
    return X.copy(), y


def save_scaler_text(path, params):
    """ScalerParams as two lines `mean[6]; std[6]` with 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("; ".join(f"{v:.17g}" for v in params.mean) + "\n")
        fh.write("; ".join(f"{v:.17g}" for v in params.std) + "\n")


def load_scaler_text(path):
    with open(path) as fh:
        mean = np.array([float(v) for v in fh.readline().split(";")])
        std = np.array([float(v) for v in fh.readline().split(";")])
    if mean.shape != (N_FEATURES,) or std.shape != (N_FEATURES,):
        raise ValueError("malformed scaler file")
    return ScalerParams(mean=mean, std=std)
