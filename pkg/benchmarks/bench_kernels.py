#!/usr/bin/env python3
"""Compare the compiled physics kernel against the pure-Python fallback.

Two measurements, both followed by an exactness check:

* micro: the raw ``advance_interval`` kernel on a size-N platoon state with
  every controller branch represented (leader tracking, cooperative,
  degraded cooperative, radar-only ACC), timed per beacon interval;
* macro: a complete defense-off simulation through ``run_sim``, which adds
  the beaconing, injection, and bookkeeping the kernel sits inside.

The two backends mirror each other operation for operation, so agreement is
asserted bitwise (array bytes), not to a tolerance.  Exits nonzero if the
backends disagree.  Set PLATOONGUARD_PURE=1 at import time to force the pure
backend in normal use; this script addresses both explicitly and is not
affected by that switch.

Usage: python3 benchmarks/bench_kernels.py [--size N] [--duration S]
                                           [--intervals K] [--repeat R]
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import math
import struct
import sys
import time

import numpy as np

from platoonguard import _kernels
from platoonguard.campaign import sim_config
from platoonguard.config import load_config
from platoonguard.sim import run_sim

try:
    from platoonguard._kernels._core import advance_interval as compiled_advance
except ImportError:
    compiled_advance = None
pure_advance = _kernels.pure_advance_interval


def micro_state(cfg, size):
    """Platoon state exercising all four controller modes."""
    L = cfg.vehicle_length
    spacing = cfg.standstill + cfg.ploeg_headway * cfg.leader_speed
    state = {
        "x": np.array([-i * (L + spacing) for i in range(size)]),
        "v": np.full(size, cfg.leader_speed),
        "u": np.zeros(size),
        "a_cmd": np.zeros(size),
        "e_hold": np.zeros(size),
        "uf_hold": np.zeros(size),
        "head": np.full(size, cfg.ploeg_headway),
        "roff": np.full(size, cfg.standstill),
        "mode": np.full(size, 1, dtype=np.int64),
        "halted": np.zeros(size, dtype=np.uint8),
        "collided": np.zeros(size, dtype=np.uint8),
        "noise_d": np.zeros(size),
        "phys": np.array([
            L, cfg.ploeg_kp, cfg.ploeg_kd, cfg.leader_gain,
            cfg.accel_min, cfg.accel_max, cfg.acc_lambda,
            cfg.leader_speed, cfg.osc_amplitude,
            2.0 * math.pi * cfg.osc_frequency, cfg.physics_step,
        ]),
    }
    state["mode"][0] = 0                     # leader speed tracking
    state["mode"][size // 2] = 2             # degraded cooperative (radar)
    state["mode"][size - 1] = 3              # ACC fallback
    state["head"][size - 1] = cfg.acc_headway
    return state


def run_micro(advance, template, n_intervals, n_sub, interval):
    state = {k: v.copy() for k, v in template.items()}
    events = []
    start = time.perf_counter()
    for k in range(n_intervals):
        advance(state["x"], state["v"], state["u"], state["a_cmd"],
                state["e_hold"], state["uf_hold"], state["head"],
                state["roff"], state["mode"], state["halted"],
                state["collided"], state["noise_d"], state["phys"],
                n_sub, k * interval, events)
    elapsed = time.perf_counter() - start
    return elapsed, state, events


def micro_digest(state, events):
    h = hashlib.sha256()
    for key in sorted(state):
        h.update(state[key].tobytes())
    h.update(repr(events).encode())
    return h.hexdigest()


def run_macro(advance, cfg, size):
    saved = _kernels.advance_interval
    _kernels.advance_interval = advance
    try:
        rc = sim_config(cfg, size, 0, -1, False, 0)
        start = time.perf_counter()
        res = run_sim(rc, collect_trace=True)
        elapsed = time.perf_counter() - start
    finally:
        _kernels.advance_interval = saved
    return elapsed, res


def macro_digest(res):
    h = hashlib.sha256()
    for t, xs, vs, accs, modes, states in res.trace:
        h.update(struct.pack("<d", t))
        h.update(xs.tobytes())
        h.update(vs.tobytes())
        h.update(accs.tobytes())
        h.update(repr(modes).encode())
        h.update(repr(states).encode())
    h.update(repr(res.collisions).encode())
    return h.hexdigest()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=8, help="platoon size (default 8)")
    ap.add_argument("--duration", type=float, default=120.0,
                    help="macro simulation length in seconds (default 120)")
    ap.add_argument("--intervals", type=int, default=5000,
                    help="micro kernel calls (default 5000)")
    ap.add_argument("--repeat", type=int, default=3,
                    help="repetitions, best time wins (default 3)")
    args = ap.parse_args(argv)

    cfg = dataclasses.replace(load_config(None), duration=args.duration)
    n_sub = int(round(cfg.beacon_interval / cfg.physics_step))

    print(f"active backend at import: {_kernels.BACKEND}")
    if compiled_advance is None:
        print("compiled extension not available; timing the pure backend only\n")
    backends = [("pure", pure_advance)]
    if compiled_advance is not None:
        backends.append(("compiled", compiled_advance))
    ok = True

    print(f"\nkernel micro-benchmark: size {args.size}, {args.intervals} intervals "
          f"of {n_sub} x {cfg.physics_step:g} s substeps")
    template = micro_state(cfg, args.size)
    micro = {}
    for name, fn in backends:
        best = math.inf
        digest = None
        for _ in range(args.repeat):
            elapsed, state, events = run_micro(
                fn, template, args.intervals, n_sub, cfg.beacon_interval)
            best = min(best, elapsed)
            digest = micro_digest(state, events)
        micro[name] = (best, digest)
        per_call = best / args.intervals * 1e6
        print(f"  {name:<9} {best:8.3f} s   ({per_call:7.1f} us/interval)")
    if len(micro) == 2:
        print(f"  speedup   {micro['pure'][0] / micro['compiled'][0]:8.1f} x")
        same = micro["pure"][1] == micro["compiled"][1]
        print(f"  end state byte-identical: {'yes' if same else 'NO'}")
        ok = ok and same

    print(f"\nfull simulation: size {args.size}, {cfg.duration:g} s, defense off")
    macro = {}
    for name, fn in backends:
        best = math.inf
        digest = None
        for _ in range(args.repeat):
            elapsed, res = run_macro(fn, cfg, args.size)
            best = min(best, elapsed)
            digest = macro_digest(res)
        macro[name] = (best, digest)
        print(f"  {name:<9} {best:8.3f} s")
    if len(macro) == 2:
        print(f"  speedup   {macro['pure'][0] / macro['compiled'][0]:8.1f} x")
        same = macro["pure"][1] == macro["compiled"][1]
        print(f"  trajectories byte-identical: {'yes' if same else 'NO'}")
        ok = ok and same

    if not ok:
        print("\nbackend disagreement detected", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
