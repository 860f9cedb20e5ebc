"""Deterministic single-lane platoon simulation.

One leader tracking a sinusoidal speed profile through proportional control,
followers under a cooperative spacing controller fed by 10 Hz beacons, an
optional misbehaving transmitter, the warning-propagating defense protocol,
and per-follower online misbehavior detection.

Event order at each beacon tick t = k * 0.1 s (k = 1..1200):
  1. physics advances to t (10 x 0.01 s sub-steps, compiled or pure kernel);
  2. every vehicle composes its beacon from its true state (the misbehaving
     vehicle falsifies transmitted bytes only);
  3. delivery: followers sample the cooperative controller inputs from the
     front beacon, feed the detector, and react to predictions/warnings;
  4. vehicles in gap control run their periodic update.

The spacing error is sampled at beacon arrival and held over the interval;
the error rate uses the live radar range rate, and the feed-forward term is
the front vehicle's transmitted desired acceleration.  Warnings received at
tick k are relayed in the receiver's tick k+1 beacon, so a warning crosses
one vehicle per beacon interval.

Before the beacon clock starts, the platoon settles in: physics and the
cooperative controller holds run normally for `warmup` seconds on the
negative clock, so by t = 0 every vehicle rides its periodic cruise response
to the leader's speed wave.  Nothing from the settle-in interval is beaconed
on the schedule, harvested, detected, or traced — the run observes a platoon
already cruising, not one pulling away from a standing start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .defense import (
    DOWNGRADE,
    FOLLOWING,
    GAP_CONTROL,
    DefenseFsm,
    GapControlState,
    start_gap_control,
    update_gap,
)
from .injector import KIND_NAMES, Beacon, Injector, MisbehaviorSpec, draw_activation
from .online import OnlineWindowState, online_observe

MODE_LEADER = 0
MODE_PLOEG = 1
MODE_DEGRADED = 2
MODE_ACC = 3
MODE_NAMES = {0: "LEADER_CRUISE", 1: "PLOEG", 2: "PLOEG_RADAR_DEGRADED", 3: "ACC"}

MIN_HEADWAY = 0.05  # s; keeps the spacing law well-posed in near-collision triggers

# phys constant vector indices consumed by the kernels
_P_LEN, _P_KP, _P_KD, _P_LGAIN, _P_AMIN, _P_AMAX, _P_LAMBDA, _P_VBASE, _P_VAMP, _P_OMEGA, _P_DT = range(11)


@dataclass
class RunConfig:
    size: int
    kind: int = 0  # 0 = no misbehavior, 1..8 per injector labels
    attacker: int = -1
    defense: bool = False
    rep: int = 0
    base_seed: int = 1000
    duration: float = 120.0
    radar_noise: float = 0.0
    force_defense_at: float | None = None  # trigger every follower at this time
    # physics / controller constants
    leader_speed: float = 27.778
    osc_amplitude: float = 1.389
    osc_frequency: float = 0.1
    vehicle_length: float = 4.0
    ploeg_headway: float = 0.5
    ploeg_kp: float = 0.2
    ploeg_kd: float = 0.7
    leader_gain: float = 2.0
    acc_headway: float = 1.2
    standstill: float = 2.0
    accel_min: float = -6.0
    accel_max: float = 2.5
    acc_lambda: float = 0.1
    physics_step: float = 0.01
    beacon_interval: float = 0.1
    delta_g: float = 0.9
    delta_t_gap: float = 0.1
    warmup: float = 15.0  # settle-in seconds before the beacon clock starts

    def seed_entropy(self):
        attacker_slot = self.attacker if self.attacker >= 0 else self.size
        return (self.base_seed, self.size, self.kind, attacker_slot, self.rep)

    def validate(self):
        if self.size < 2:
            raise ValueError("platoon needs at least 2 vehicles")
        if self.kind != 0:
            if not 0 <= self.attacker < self.size - 1:
                raise ValueError("misbehaving vehicle must exist and never be the last member")
        n_sub = self.beacon_interval / self.physics_step
        if abs(n_sub - round(n_sub)) > 1e-9:
            raise ValueError("beacon interval must be an integer multiple of the physics step")
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        n_warm = self.warmup / self.beacon_interval
        if abs(n_warm - round(n_warm)) > 1e-9:
            raise ValueError("warmup must be an integer multiple of the beacon interval")
        if self.force_defense_at is not None and not self.defense:
            raise ValueError("forced transition requires the defense protocol enabled")


@dataclass
class SimResult:
    config: RunConfig
    activation: int | None
    detecting: int | None
    predictions: dict  # follower -> [(t, label)]
    fsm_events: list  # (t, vehicle, from, to, cause)
    collisions: list  # (t, rear, front)
    accident: bool
    injector_fallbacks: int
    accel_bounds: tuple  # (min, max) commanded over the run
    harvest: dict = field(default_factory=dict)  # sender -> [(t, posx, posy, spdx, spdy, acl, label)]
    trace: list = field(default_factory=list)  # per tick: (t, x, v, a, modes, fsm_states)


def run_sim(cfg, model=None, harvest_senders=(), collect_trace=False):
    """Run one simulation to completion; deterministic in (config, seeds)."""
    cfg.validate()
    N = cfg.size
    L = cfg.vehicle_length
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed_entropy()))

    injector = None
    activation = None
    act_tick = None
    if cfg.kind != 0:
        activation = draw_activation(rng)
        injector = Injector(
            MisbehaviorSpec(kind=cfg.kind, vehicle=cfg.attacker,
                            activation=activation, platoon_size=N),
            rng,
        )
        act_tick = int(round(activation / cfg.beacon_interval))

    # state arrays (kernel-owned layout)
    spacing = cfg.standstill + cfg.ploeg_headway * cfg.leader_speed
    x = np.array([-i * (L + spacing) for i in range(N)], dtype=np.float64)
    v = np.full(N, cfg.leader_speed, dtype=np.float64)
    u = np.zeros(N)
    a_cmd = np.zeros(N)
    e_hold = np.zeros(N)
    uf_hold = np.zeros(N)
    head = np.full(N, cfg.ploeg_headway)
    roff = np.full(N, cfg.standstill)
    mode = np.full(N, MODE_PLOEG, dtype=np.int64)
    mode[0] = MODE_LEADER
    halted = np.zeros(N, dtype=np.uint8)
    collided = np.zeros(N, dtype=np.uint8)
    noise_d = np.zeros(N)

    phys = np.array([
        L, cfg.ploeg_kp, cfg.ploeg_kd, cfg.leader_gain,
        cfg.accel_min, cfg.accel_max, cfg.acc_lambda,
        cfg.leader_speed, cfg.osc_amplitude, 2.0 * math.pi * cfg.osc_frequency,
        cfg.physics_step,
    ])
    n_sub = int(round(cfg.beacon_interval / cfg.physics_step))
    n_beacons = int(round(cfg.duration / cfg.beacon_interval))

    fsm = [DefenseFsm() for _ in range(N)]
    gc = [None] * N
    next_gap_tick = [0] * N
    run_detectors = cfg.defense and model is not None
    det_state = [OnlineWindowState() if run_detectors and i > 0 else None for i in range(N)]
    predictions = {i: [] for i in range(1, N)} if run_detectors else {}
    detecting = cfg.attacker + 1 if cfg.kind != 0 else None

    cache = {} if injector is not None else None
    fsm_events = []
    collisions = []
    harvest = {s: [] for s in harvest_senders}
    trace = []
    a_lo, a_hi = 0.0, 0.0
    advance = _kernels.advance_interval

    def trigger(i, cause, t, k):
        fsm[i].state = GAP_CONTROL
        fsm[i].warning = True
        fsm[i].use_radar = True
        fsm_events.append((t, i, FOLLOWING, GAP_CONTROL, cause))
        mode[i] = MODE_DEGRADED
        gc[i] = GapControlState(head_t=cfg.acc_headway, dt_offset=cfg.standstill,
                                delta_g=cfg.delta_g, delta_t=cfg.delta_t_gap)
        start_gap_control(gc[i], float(v[i]), float(x[i - 1] - L - x[i] + noise_d[i]))
        gap_update(i, t)
        next_gap_tick[i] = k + 1

    def gap_update(i, t):
        sets, reached = update_gap(gc[i], float(v[i]), float(x[i - 1] - L - x[i] + noise_d[i]))
        for h_new, g_new in sets:
            head[i] = h_new if h_new > MIN_HEADWAY else MIN_HEADWAY
            roff[i] = g_new
        if reached:
            fsm[i].state = DOWNGRADE
            fsm_events.append((t, i, GAP_CONTROL, DOWNGRADE, "gap_reached"))
            mode[i] = MODE_ACC
            head[i] = cfg.acc_headway
            roff[i] = cfg.standstill

    # settle-in: run the sampled-data loop on the negative clock until the
    # platoon rides its periodic cruise response, holding the same 10 Hz
    # controller refresh it will have once the beacon schedule starts
    for w in range(int(round(cfg.warmup / cfg.beacon_interval)), 0, -1):
        t0 = -w * cfg.beacon_interval
        if cfg.radar_noise > 0.0:
            noise_d[:] = rng.normal(0.0, cfg.radar_noise, N)
        events = []
        advance(x, v, u, a_cmd, e_hold, uf_hold, head, roff,
                mode, halted, collided, noise_d, phys, n_sub, t0, events)
        for s, i in events:
            collisions.append((t0 + (s + 1) * cfg.physics_step, i, i - 1))
        for i in range(1, N):
            if mode[i] == MODE_PLOEG and not halted[i]:
                e_hold[i] = (x[i - 1] - x[i] - L) - (roff[i] + head[i] * v[i])
                uf_hold[i] = float(u[i - 1])

    for k in range(1, n_beacons + 1):
        t0 = (k - 1) * cfg.beacon_interval
        if cfg.radar_noise > 0.0:
            noise_d[:] = rng.normal(0.0, cfg.radar_noise, N)
        events = []
        advance(x, v, u, a_cmd, e_hold, uf_hold, head, roff,
                mode, halted, collided, noise_d, phys, n_sub, t0, events)
        for s, i in events:
            collisions.append((t0 + (s + 1) * cfg.physics_step, i, i - 1))
        lo = float(a_cmd.min())
        hi = float(a_cmd.max())
        if lo < a_lo:
            a_lo = lo
        if hi > a_hi:
            a_hi = hi

        t = k * cfg.beacon_interval
        # compose
        beacons = []
        for i in range(N):
            b = Beacon(i, t, float(x[i]), 0.0, float(v[i]), 0.0,
                       float(a_cmd[i]), 0.0, float(u[i]), fsm[i].warning)
            if injector is not None and i == cfg.attacker and k >= act_tick:
                if not injector.activated:
                    injector.activate(b)
                injector.falsify_beacon(b, cache)
            beacons.append(b)

        for sender in harvest:
            b = beacons[sender]
            lab = cfg.kind if (sender == cfg.attacker and k >= act_tick) else 0
            harvest[sender].append((t, b.posx, b.posy, b.spdx, b.spdy, b.acl, lab))

        # deliver
        warning_count = 0
        for b in beacons:
            if b.warning:
                warning_count += 1
        if cache is not None:
            for j in range(N):
                if j != cfg.attacker:
                    cache[j] = beacons[j]
        for i in range(N):
            if i == 0:
                if not fsm[0].warning and warning_count > 0:
                    fsm[0].warning = True  # leader relays but never leaves cruise
                continue
            front_b = beacons[i - 1]
            if mode[i] == MODE_PLOEG and not halted[i]:
                e_hold[i] = (front_b.posx - x[i] - L) - (roff[i] + head[i] * v[i])
                uf_hold[i] = front_b.desired_accel
            if fsm[i].state != FOLLOWING:
                continue
            if cfg.force_defense_at is not None and t >= cfg.force_defense_at:
                trigger(i, "forced", t, k)
                continue
            if not cfg.defense:
                continue
            label = None
            if det_state[i] is not None:
                label = online_observe(det_state[i], front_b, model)
                if label is not None:
                    predictions[i].append((t, label))
            warned = warning_count - (1 if fsm[i].warning else 0) > 0
            if (label is not None and label != 0) or warned:
                cause = "prediction" if (label is not None and label != 0) else "warning"
                trigger(i, cause, t, k)

        # periodic gap updates
        for i in range(1, N):
            if (gc[i] is not None and gc[i].active and fsm[i].state == GAP_CONTROL
                    and k >= next_gap_tick[i] and not halted[i]):
                gap_update(i, t)
                next_gap_tick[i] = k + 1

        if collect_trace:
            trace.append((t, x.copy(), v.copy(), a_cmd.copy(),
                          tuple(int(m) for m in mode), tuple(f.state for f in fsm)))

    return SimResult(
        config=cfg,
        activation=activation,
        detecting=detecting,
        predictions=predictions,
        fsm_events=fsm_events,
        collisions=collisions,
        accident=len(collisions) > 0,
        injector_fallbacks=injector.fallbacks if injector is not None else 0,
        accel_bounds=(a_lo, a_hi),
        harvest=harvest,
        trace=trace,
    )


def leader_speed_profile(t, base=27.778, amplitude=1.389, frequency=0.1):
    """Leader target speed: base + amplitude * sin(2 pi f t)."""
    return base + amplitude * math.sin(2.0 * math.pi * frequency * t)


def write_trace(path, result):
    """Per-tick table: t, vehicle, x, v, a, controller, fsm, front_distance."""
    cfg = result.config
    with open(path, "w") as fh:
        fh.write("t\tvehicle\tx\tv\ta\tcontroller\tfsm\tfront_distance\n")
        for t, xs, vs, accs, modes, states in result.trace:
            for i in range(cfg.size):
                front = "" if i == 0 else f"{xs[i - 1] - cfg.vehicle_length - xs[i]:.6f}"
                fh.write(f"{t:.1f}\t{i}\t{xs[i]:.6f}\t{vs[i]:.6f}\t{accs[i]:.6f}\t"
                         f"{MODE_NAMES[modes[i]]}\t{states[i]}\t{front}\n")
