"""Shared test fixtures and independent oracles.

The windowing oracle here is a deliberate reimplementation of the feature
pipeline using plain dicts and lists (no numpy until the final comparison), so
the library and the oracle can cross-check each other.  The tiny-model helpers
give online/offline and campaign tests a real detector without the cost of
training the full one.
"""

from __future__ import annotations

import numpy as np
import pytest

from platoonguard.features import (
    FeatureWindow,
    ScalerParams,
    apply_scaler,
    fit_scaler,
    split,
)
from platoonguard.ingest import CanonicalRecord
from platoonguard.lstm import init_params
from platoonguard.model_io import DetectorModel
from platoonguard.training import TrainConfig, train


def make_record(rx=1, sender=0, t=0.0, posx=0.0, posy=0.0, spdx=0.0, spdy=0.0,
                acl=0.0, hed=0.0, lab=0):
    return CanonicalRecord(rx=rx, sender_pseudo=sender, send_time=t, posx=posx,
                           posy=posy, spdx=spdx, spdy=spdy, acl=acl, hed=hed,
                           lab=lab)


def naive_windows(records):
    """Independent windowing oracle.

    Returns (windows, n_rejected) where each window is a tuple
    (origin, rows, label): origin = (rx, sender, first sendTime), rows = a
    plain 4x6 nested list [dt, dposx, dposy, dspdx, dspdy, dacl], label = the
    5th message's label.  Chunks whose timestamps are not strictly increasing
    are rejected.
    """
    groups = {}
    for r in records:
        groups.setdefault((r.rx, r.sender_pseudo), []).append(r)
    out = []
    rejected = 0
    for key in sorted(groups):
        msgs = sorted(groups[key], key=lambda r: r.send_time)
        usable = len(msgs) - (len(msgs) % 5)
        for start in range(0, usable, 5):
            chunk = msgs[start:start + 5]
            if any(chunk[j].send_time <= chunk[j - 1].send_time for j in range(1, 5)):
                rejected += 1
                continue
            first = chunk[0]
            rows = []
            for j in range(1, 5):
                m = chunk[j]
                rows.append([
                    m.send_time - chunk[j - 1].send_time,
                    m.posx - first.posx,
                    m.posy - first.posy,
                    m.spdx - first.spdx,
                    m.spdy - first.spdy,
                    m.acl - first.acl,
                ])
            out.append(((key[0], key[1], first.send_time), rows, chunk[4].lab))
    return out, rejected


def random_record_set(rng, max_pairs=4, max_msgs=23):
    """Random canonical records over a few (rx, sender) streams.

    Timestamps are strictly increasing within a stream except for occasional
    deliberate duplicates, which both window cutters must reject the same way.
    """
    records = []
    n_pairs = int(rng.integers(1, max_pairs + 1))
    for p in range(n_pairs):
        rx = int(rng.integers(0, 3))
        sender = int(rng.integers(0, 4))
        n = int(rng.integers(0, max_msgs + 1))
        t = float(rng.uniform(0.0, 5.0))
        for _ in range(n):
            step = float(rng.uniform(0.01, 0.3))
            if rng.uniform() < 0.05:
                step = 0.0  # duplicate timestamp: the chunk containing it must be rejected
            t += step
            records.append(make_record(
                rx=rx, sender=sender, t=t,
                posx=float(rng.uniform(-1e4, 1e4)),
                posy=float(rng.uniform(-1e4, 1e4)),
                spdx=float(rng.uniform(-50, 50)),
                spdy=float(rng.uniform(-50, 50)),
                acl=float(rng.uniform(-10, 10)),
                hed=float(rng.uniform(-179, 180)),
                lab=int(rng.integers(0, 9)),
            ))
    rng.shuffle(records)
    return records


def draw_smooth_windows(rng, params, n, margin=5e-4):
    """Random windows whose dense-layer relu inputs stay `margin` away from 0.

    Central finite differences straddle the relu kink when a pre-activation
    sits within the probe step of zero, producing a bogus mismatch that says
    nothing about the analytic gradient.  Filtering keeps the probe on smooth
    ground.
    """
    from platoonguard.lstm import CellState, lstm_cell

    hidden = params.hidden_size
    out = []
    while len(out) < n:
        w = rng.normal(size=(4, 6))
        state = CellState(h=np.zeros(hidden), C=np.zeros(hidden))
        for t in range(4):
            state = lstm_cell(w[t], state, params)
        pre1 = params.dense1_W @ state.h + params.dense1_b
        if np.min(np.abs(pre1)) > margin:
            out.append(w)
    return np.stack(out)


def make_tiny_model(hidden=4, seed=7, mean=None, std=None):
    params = init_params(hidden, seed)
    if mean is None:
        mean = np.zeros(6)
    if std is None:
        std = np.ones(6)
    scaler = ScalerParams(mean=np.asarray(mean, dtype=np.float64),
                          std=np.asarray(std, dtype=np.float64))
    return DetectorModel(params=params, scaler=scaler)


def synthetic_windows(rng, n=400):
    """Separable toy corpus: label 1 windows drift right, label 0 stay put."""
    X = rng.normal(0.0, 0.05, size=(n, 4, 6))
    X[:, :, 0] = 0.1
    y = np.zeros(n, dtype=np.int64)
    y[n // 2:] = 1
    X[n // 2:, :, 1] += np.linspace(1.0, 4.0, 4)
    return X, y


def as_windows(X, y):
    return [FeatureWindow(rows=X[i], label=int(y[i]), origin=(0, 0, float(i)))
            for i in range(len(y))]


@pytest.fixture(scope="session")
def toy_trained_model():
    """A real trained detector on a tiny separable corpus (fast, deterministic)."""
    rng = np.random.default_rng(99)
    X, y = synthetic_windows(rng, n=400)
    wins = as_windows(X, y)
    scaler = fit_scaler(wins)
    scaled = [FeatureWindow(rows=apply_scaler(w.rows, scaler), label=w.label,
                            origin=w.origin) for w in wins]
    ds = split(scaled, seed=5)
    cfg = TrainConfig(hidden_size=4, max_epochs=12, batch_size=32, seed=11,
                      patience=4)
    params, _ = train(ds, cfg)
    return DetectorModel(params=params, scaler=scaler)
