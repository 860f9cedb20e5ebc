"""Warning-propagating defense: per-vehicle FSM and gradual gap control.

State machine per vehicle: FOLLOWING -> GAP_CONTROL -> DOWNGRADE, strictly
monotone.  Leaving FOLLOWING latches `warning` (relayed in every later beacon)
and `use_radar`, both irreversible within a run.  A vehicle leaves FOLLOWING
when its own detector predicts a non-zero label on a front beacon, or when ANY
received beacon carries the warning flag.

Gap control widens the time headway from the cooperative controller's to the
ACC fallback's before the controller switch, to avoid an abrupt braking event.
The update procedures below mirror a gap-control algorithm stated in
pseudocode; the branch order is kept literally, including the quirk that after
the headway target pins, the ramp branch still advances one step past it
(sgn(0) = +1) until the physical distance catches up.
"""

from __future__ import annotations

from dataclasses import dataclass

FOLLOWING = "FOLLOWING"
GAP_CONTROL = "GAP_CONTROL"
DOWNGRADE = "DOWNGRADE"

# Gap growth rate and update period.  0.9 m/s keeps the whole transition
# (headway ramp + physical settling, which oscillates near the boundary with
# the leader's speed wave) under 30 s for every vehicle at highway cruise.
DELTA_G = 0.9  # m/s
DELTA_T = 0.1  # s


def sgn(x):
    return 1.0 if x >= 0.0 else -1.0


@dataclass
class DefenseFsm:
    state: str = FOLLOWING
    warning: bool = False
    use_radar: bool = False


@dataclass
class GapControlState:
    head_t: float  # target time headway, s
    dt_offset: float  # fixed distance offset, m
    use_time_headway: bool = True
    delta_g: float = DELTA_G
    delta_t: float = DELTA_T
    cur_head: float = 0.0
    cur_gap: float = 0.0
    gap_t: float = 0.0
    increasing: bool = True
    active: bool = False


def start_gap_control(gc, cur_speed, cur_distance):
    """Initialize targets and ramp direction.  Zero speed falls back to the
    fixed-gap policy for this ramp."""
    gc.gap_t = gc.head_t * cur_speed + gc.dt_offset
    gc.increasing = True
    if gc.use_time_headway and cur_speed > 0.0:
        gc.cur_gap = gc.dt_offset
        gc.cur_head = (cur_distance - gc.dt_offset) / cur_speed
        if gc.head_t < gc.cur_head:
            gc.increasing = False
    else:
        gc.use_time_headway = False
        gc.cur_gap = cur_distance
        gc.cur_head = gc.head_t
    if gc.gap_t < gc.cur_gap:
        gc.increasing = False
    gc.active = True


def is_gap_control_completed(gc):
    if gc.use_time_headway:
        return gc.cur_head >= gc.head_t if gc.increasing else gc.cur_head <= gc.head_t
    return gc.cur_gap >= gc.gap_t if gc.increasing else gc.cur_gap <= gc.gap_t


def is_gap_reached(gc, cur_distance):
    return cur_distance >= gc.gap_t if gc.increasing else cur_distance <= gc.gap_t


def update_gap(gc, cur_speed, cur_distance):
    """One periodic gap update.

    Returns (controller_sets, reached): controller_sets is the list of
    (headway, gap) pairs pushed to the active controller during this update,
    in order; reached=True means the physical distance hit the target and the
    caller must run the downgrade (no reschedule).
    """
    sets = []
    delta_h = gc.delta_g / max(cur_speed, 0.01)
    gc.gap_t = gc.head_t * cur_speed + gc.dt_offset
    if is_gap_control_completed(gc):
        if gc.use_time_headway:
            gc.cur_head = gc.head_t
        else:
            gc.cur_gap = gc.gap_t
        sets.append((gc.cur_head, gc.cur_gap))
    if is_gap_reached(gc, cur_distance):
        gc.active = False
        return sets, True
    if gc.use_time_headway:
        gc.cur_head = gc.cur_head + sgn(gc.head_t - gc.cur_head) * delta_h * gc.delta_t
    else:
        gc.cur_gap = gc.cur_gap + sgn(gc.gap_t - gc.cur_gap) * gc.delta_g * gc.delta_t
    sets.append((gc.cur_head, gc.cur_gap))
    return sets, False
