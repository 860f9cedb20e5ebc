"""Transmitted-beacon falsification.

One designated vehicle rewrites its outgoing beacons from a randomized
activation time onward.  Only the transmitted bytes are touched — the vehicle
keeps driving on its true state.  Eight kinds (labels 1..8):

    constPos      position frozen at the activation-time snapshot
    randomPos     position components redrawn U{0..10000} m every beacon
    posOffset     position + a fresh integer offset pair U{-10..10} m per
                  beacon, redrawn while (0, 0)
    randomSpeed   speed components redrawn U{-200..200} m/s every beacon
    spdOffset     speed + a fresh integer offset pair U{-8..8} m/s per beacon,
                  redrawn while (0, 0)
    eventualStop  position, speed, acceleration all 0
    disruptive    kinematics of a freshly drawn cached neighbor beacon
                  (victim != self, redrawn every beacon)
    dataReplay    kinematics of one frozen target's cached beacons

Replayed fields are position, speed, acceleration, heading — never the warning
flag; sender id and sendTime always stay the attacker's own.  Draws are
integers (converted to floating meters / m/s on the beacon).
"""

from __future__ import annotations

from dataclasses import dataclass

KIND_LABELS = {
    "constPos": 1,
    "randomPos": 2,
    "posOffset": 3,
    "randomSpeed": 4,
    "spdOffset": 5,
    "eventualStop": 6,
    "disruptive": 7,
    "dataReplay": 8,
}
KIND_NAMES = {v: k for k, v in KIND_LABELS.items()}


class Beacon:
    """One transmitted platooning beacon."""

    __slots__ = ("sender", "send_time", "posx", "posy", "spdx", "spdy",
                 "acl", "hed", "desired_accel", "warning")

    def __init__(self, sender, send_time, posx, posy, spdx, spdy, acl, hed,
                 desired_accel, warning):
        self.sender = sender
        self.send_time = send_time
        self.posx = posx
        self.posy = posy
        self.spdx = spdx
        self.spdy = spdy
        self.acl = acl
        self.hed = hed
        self.desired_accel = desired_accel
        self.warning = warning


@dataclass
class MisbehaviorSpec:
    kind: int  # label 1..8
    vehicle: int
    activation: int  # s, drawn uniform-integer [15, 80]
    platoon_size: int


class Injector:
    """Per-run falsification state for one misbehaving vehicle."""

    def __init__(self, spec, rng):
        if not 1 <= spec.kind <= 8:
            raise ValueError(f"kind label must be 1..8, got {spec.kind}")
        if spec.vehicle >= spec.platoon_size - 1:
            raise ValueError("the last platoon member is never the misbehaving vehicle")
        if not 15 <= spec.activation <= 80:
            raise ValueError(f"activation time {spec.activation} outside [15, 80]")
        self.spec = spec
        self.rng = rng
        self.others = [i for i in range(spec.platoon_size) if i != spec.vehicle]
        self.frozen_pos = None  # constPos snapshot
        self.replay_target = None  # dataReplay victim index
        self.fallbacks = 0  # cache-miss steps transmitted truthfully
        self.activated = False

    def activate(self, true_beacon):
        """Freeze kind-specific context at the activation instant."""
        self.activated = True
        if self.spec.kind == 1:  # constPos
            self.frozen_pos = (true_beacon.posx, true_beacon.posy)
        elif self.spec.kind == 8:  # dataReplay: target drawn once
            self.replay_target = self.others[int(self.rng.integers(0, len(self.others)))]

    def _offset_pair(self, bound):
        """Fresh integer offset pair in [-bound, bound]^2, never (0, 0)."""
        while True:
            dx = int(self.rng.integers(-bound, bound + 1))
            dy = int(self.rng.integers(-bound, bound + 1))
            if dx != 0 or dy != 0:
                return float(dx), float(dy)

    def falsify_beacon(self, true_beacon, cache):
        """Rewrite one outgoing beacon.  `cache` maps sender -> last received Beacon."""
        b = true_beacon
        kind = self.spec.kind
        if kind == 1:  # constPos
            b.posx, b.posy = self.frozen_pos
        elif kind == 2:  # randomPos
            b.posx = float(self.rng.integers(0, 10001))
            b.posy = float(self.rng.integers(0, 10001))
        elif kind == 3:  # posOffset
            dx, dy = self._offset_pair(10)
            b.posx += dx
            b.posy += dy
        elif kind == 4:  # randomSpeed
            b.spdx = float(self.rng.integers(-200, 201))
            b.spdy = float(self.rng.integers(-200, 201))
        elif kind == 5:  # spdOffset
            dx, dy = self._offset_pair(8)
            b.spdx += dx
            b.spdy += dy
        elif kind == 6:  # eventualStop
            b.posx = b.posy = b.spdx = b.spdy = 0.0
            b.acl = 0.0
        elif kind == 7:  # disruptive: fresh victim every beacon
            victim = self.others[int(self.rng.integers(0, len(self.others)))]
            self._replay_from(b, cache.get(victim))
        else:  # dataReplay: frozen target
            self._replay_from(b, cache.get(self.replay_target))
        return b

    def _replay_from(self, b, cached):
        if cached is None:
            self.fallbacks += 1  # nothing cached yet: transmit the truth, report
            return
        b.posx = cached.posx
        b.posy = cached.posy
        b.spdx = cached.spdx
        b.spdy = cached.spdy
        b.acl = cached.acl
        b.hed = cached.hed


def draw_activation(rng):
    """Uniform-integer activation time in [15, 80] s."""
    return int(rng.integers(15, 81))
