"""Beacon falsification: per-kind contracts, ranges, freshness, fallbacks."""

from __future__ import annotations

import numpy as np
import pytest

from platoonguard.injector import (
    KIND_LABELS,
    KIND_NAMES,
    Beacon,
    Injector,
    MisbehaviorSpec,
    draw_activation,
)


def beacon(sender=0, t=20.0, posx=500.0, posy=3.0, spdx=27.0, spdy=0.1,
           acl=0.4, hed=1.5, desired_accel=0.2, warning=False):
    return Beacon(sender, t, posx, posy, spdx, spdy, acl, hed, desired_accel,
                  warning)


def neighbor_cache(size=4, attacker=0):
    cache = {}
    for j in range(size):
        if j == attacker:
            continue
        cache[j] = beacon(sender=j, posx=100.0 * j + 7.0, posy=float(j),
                          spdx=20.0 + j, spdy=0.01 * j, acl=0.1 * j,
                          hed=2.0 + j)
    return cache


def make_injector(kind, size=4, vehicle=0, activation=20, seed=0):
    spec = MisbehaviorSpec(kind=kind, vehicle=vehicle, activation=activation,
                           platoon_size=size)
    return Injector(spec, np.random.default_rng(seed))


def falsified_stream(kind, n=40, seed=0, size=4):
    inj = make_injector(kind, size=size, seed=seed)
    cache = neighbor_cache(size=size)
    out = []
    for k in range(n):
        b = beacon(t=20.0 + 0.1 * k, posx=500.0 + 2.7 * k, spdx=27.0 + 0.01 * k)
        if not inj.activated:
            inj.activate(b)
        inj.falsify_beacon(b, cache)
        out.append(b)
    return inj, out


# ------------------------------------------------------------- validation

def test_rejects_kind_out_of_range():
    for kind in (0, 9):
        with pytest.raises(ValueError, match="kind label"):
            make_injector(kind)


def test_rejects_last_vehicle():
    with pytest.raises(ValueError, match="last platoon member"):
        make_injector(1, size=4, vehicle=3)


def test_rejects_activation_outside_window():
    for act in (14, 81):
        with pytest.raises(ValueError, match="activation"):
            make_injector(1, activation=act)


def test_kind_tables_are_consistent():
    assert set(KIND_LABELS.values()) == set(range(1, 9))
    assert set(KIND_NAMES) == set(range(1, 9))
    for name, kind in KIND_LABELS.items():
        assert KIND_NAMES[kind] == name


def test_draw_activation_is_an_integer_second_in_range():
    rng = np.random.default_rng(1)
    draws = [draw_activation(rng) for _ in range(500)]
    assert all(isinstance(d, int) for d in draws)
    assert min(draws) >= 15 and max(draws) <= 80
    assert 15 in draws and 80 in draws  # both endpoints reachable


# --------------------------------------------------------------- per kind

def test_const_pos_freezes_the_activation_snapshot():
    inj, stream = falsified_stream(KIND_LABELS["constPos"])
    assert all(b.posx == 500.0 and b.posy == 3.0 for b in stream)
    # everything else stays truthful
    assert stream[10].spdx == pytest.approx(27.0 + 0.01 * 10)


def test_random_pos_draws_integers_in_range():
    _, stream = falsified_stream(KIND_LABELS["randomPos"])
    for b in stream:
        assert 0 <= b.posx <= 10000 and b.posx == int(b.posx)
        assert 0 <= b.posy <= 10000 and b.posy == int(b.posy)
    assert len({(b.posx, b.posy) for b in stream}) > 1  # fresh draws per beacon


def test_pos_offset_is_fresh_nonzero_and_bounded():
    _, stream = falsified_stream(KIND_LABELS["posOffset"])
    offsets = set()
    for k, b in enumerate(stream):
        dx = b.posx - (500.0 + 2.7 * k)
        dy = b.posy - 3.0
        assert -10 <= dx <= 10 and dx == int(dx)
        assert -10 <= dy <= 10 and dy == int(dy)
        assert (dx, dy) != (0.0, 0.0)
        offsets.add((dx, dy))
    assert len(offsets) > 1


def test_random_speed_draws_integers_in_range():
    _, stream = falsified_stream(KIND_LABELS["randomSpeed"])
    for b in stream:
        assert -200 <= b.spdx <= 200 and b.spdx == int(b.spdx)
        assert -200 <= b.spdy <= 200 and b.spdy == int(b.spdy)
    assert len({(b.spdx, b.spdy) for b in stream}) > 1


def test_speed_offset_is_fresh_nonzero_and_bounded():
    _, stream = falsified_stream(KIND_LABELS["spdOffset"])
    for k, b in enumerate(stream):
        dx = b.spdx - (27.0 + 0.01 * k)
        dy = b.spdy - 0.1
        assert -8 <= dx <= 8 and -8 <= dy <= 8
        assert (round(dx, 9), round(dy, 9)) != (0.0, 0.0)


def test_eventual_stop_zeroes_kinematics():
    _, stream = falsified_stream(KIND_LABELS["eventualStop"])
    for b in stream:
        assert (b.posx, b.posy, b.spdx, b.spdy, b.acl) == (0, 0, 0, 0, 0)


def test_disruptive_replays_some_neighbor_each_beacon():
    inj, stream = falsified_stream(KIND_LABELS["disruptive"])
    cache = neighbor_cache()
    victims = set()
    for b in stream:
        matches = [j for j, nb in cache.items()
                   if (b.posx, b.posy, b.spdx, b.spdy, b.acl, b.hed)
                   == (nb.posx, nb.posy, nb.spdx, nb.spdy, nb.acl, nb.hed)]
        assert len(matches) == 1
        victims.add(matches[0])
    assert len(victims) > 1  # a fresh victim is drawn per beacon
    assert inj.fallbacks == 0


def test_data_replay_locks_one_victim():
    inj, stream = falsified_stream(KIND_LABELS["dataReplay"])
    cache = neighbor_cache()
    assert inj.replay_target in cache
    nb = cache[inj.replay_target]
    for b in stream:
        assert (b.posx, b.posy, b.spdx, b.spdy, b.acl, b.hed) == \
            (nb.posx, nb.posy, nb.spdx, nb.spdy, nb.acl, nb.hed)


def test_data_replay_never_targets_self():
    for seed in range(20):
        inj = make_injector(KIND_LABELS["dataReplay"], seed=seed)
        inj.activate(beacon())
        assert inj.replay_target != inj.spec.vehicle


def test_replay_kinds_fall_back_to_truth_on_empty_cache():
    for name in ("disruptive", "dataReplay"):
        inj = make_injector(KIND_LABELS[name])
        b = beacon()
        inj.activate(b)
        inj.falsify_beacon(b, {})
        assert b.posx == 500.0 and b.spdx == 27.0  # untouched
        assert inj.fallbacks == 1


# -------------------------------------------------------------- invariants

def test_sender_and_time_survive_every_kind():
    for kind in range(1, 9):
        _, stream = falsified_stream(kind)
        for k, b in enumerate(stream):
            assert b.sender == 0
            assert b.send_time == pytest.approx(20.0 + 0.1 * k, abs=1e-12)


def test_falsification_is_reproducible_under_seed():
    for kind in range(1, 9):
        _, a = falsified_stream(kind, seed=5)
        _, b = falsified_stream(kind, seed=5)
        for x, y in zip(a, b):
            assert (x.posx, x.posy, x.spdx, x.spdy, x.acl) == \
                (y.posx, y.posy, y.spdx, y.spdy, y.acl)


def test_different_seeds_diverge_for_random_kinds():
    for name in ("randomPos", "posOffset", "randomSpeed", "spdOffset"):
        _, a = falsified_stream(KIND_LABELS[name], seed=1)
        _, b = falsified_stream(KIND_LABELS[name], seed=2)
        assert any((x.posx, x.posy, x.spdx, x.spdy) != (y.posx, y.posy, y.spdx, y.spdy)
                   for x, y in zip(a, b))
