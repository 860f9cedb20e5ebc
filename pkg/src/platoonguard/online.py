"""Stateful per-sender online inference.

Each (receiver, sender) stream owns an OnlineWindowState.  The first beacon of
a window is stored as the reference; beacons 2..5 are embedded as scaled delta
rows as they arrive; the 5th triggers a forward pass and clears the state, so
windows jump (no overlap).  The arithmetic — delta against the reference, then
(x - mean) / std per column — is the same operations in the same order as the
batch pipeline, which makes online and offline label sequences identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import ROWS_PER_WINDOW
from .lstm import forward

# Beacon fields consumed by the detector, in feature-column order after dt.
# (sendTime, posx, posy, spdx, spdy, acl)


@dataclass
class BeaconObs:
    send_time: float
    posx: float
    posy: float
    spdx: float
    spdy: float
    acl: float


@dataclass
class OnlineWindowState:
    reference: BeaconObs | None = None
    prev_time: float = 0.0
    rows: list = field(default_factory=list)  # scaled delta rows, up to 4

    def clear(self):
        self.reference = None
        self.rows = []


def online_observe(state, beacon, model):
    """Feed one beacon; returns a predicted label on every 5th beacon, else None.

    A time regression inside a window discards the window: the offending
    beacon becomes the reference of a fresh one.
    """
    if state.reference is None:
        state.reference = beacon
        state.prev_time = beacon.send_time
        return None
    if beacon.send_time <= state.prev_time:
        state.clear()
        state.reference = beacon
        state.prev_time = beacon.send_time
        return None
    ref = state.reference
    row = np.array(
        [
            beacon.send_time - state.prev_time,
            beacon.posx - ref.posx,
            beacon.posy - ref.posy,
            beacon.spdx - ref.spdx,
            beacon.spdy - ref.spdy,
            beacon.acl - ref.acl,
        ],
        dtype=np.float64,
    )
    state.rows.append((row - model.scaler.mean) / model.scaler.std)
    state.prev_time = beacon.send_time
    if len(state.rows) < ROWS_PER_WINDOW:
        return None
    window = np.stack(state.rows)
    state.clear()
    return int(np.argmax(forward(window, model.params)))
