"""Run scoring and campaign metric aggregation.

All functions operate on run-result dicts (the JSON written per run), so the
report stage can be re-run from files alone.  Scoring follows the two-window
rule: only the detecting vehicle's first two predictions whose 5-message
window ends at or after the activation time count; a window straddling the
activation is window one.
"""

from __future__ import annotations

import math

N_CLASSES = 9


def post_activation_predictions(result, limit=2):
    """First `limit` predictions whose window end time >= activation."""
    act = result["activation"]
    preds = [(t, lab) for t, lab in result["predictions"] if t >= act]
    return preds[:limit]


def score_single_label(result):
    """Correct iff any of the two windows predicts any misbehavior.

    Fewer than two available predictions are evaluated as-is; zero available
    means incorrect.
    """
    preds = post_activation_predictions(result)
    return any(lab != 0 for _, lab in preds)


def first_nonzero_label(result):
    for _, lab in post_activation_predictions(result):
        if lab != 0:
            return lab
    return 0


def score_multi_label(result):
    """Correct iff the first non-zero prediction among the two windows equals
    the scenario label."""
    return first_nonzero_label(result) == result["kind_label"]


def confidence_interval(samples):
    """Mean with normal-approximation 95% bounds, clipped to [0, 1].

    n = 1 gives a degenerate interval; n = 0 gives NaNs.
    """
    n = len(samples)
    if n == 0:
        return (math.nan, math.nan, math.nan)
    mean = sum(samples) / n
    if n == 1:
        return (mean, mean, mean)
    var = sum((s - mean) ** 2 for s in samples) / (n - 1)
    half = 1.96 * math.sqrt(var) / math.sqrt(n)
    return (mean, max(0.0, mean - half), min(1.0, mean + half))


def false_positive_report(results):
    """(misbehavior predictions strictly before activation, total pre-activation
    windows) over the given defense-on runs."""
    fp = 0
    total = 0
    for r in results:
        if not r["defense"]:
            continue
        act = r["activation"]
        if act is None:
            continue
        for t, lab in r["predictions"]:
            if t < act:
                total += 1
                if lab != 0:
                    fp += 1
    return fp, total


def _pairs(results):
    """Match defense-off/on runs by (size, kind, attacker, rep)."""
    off = {}
    on = {}
    for r in results:
        key = (r["size"], r["kind_label"], r["attacker"], r["rep"])
        (on if r["defense"] else off)[key] = r
    return [(off[k], on[k]) for k in sorted(off) if k in on]


def accident_gain(results):
    """(off_fraction - on_fraction) / off_fraction over matched seed pairs.

    Returns None (undefined) when no defense-off accident occurred.
    """
    pairs = _pairs(results)
    if not pairs:
        return None
    off_acc = sum(1 for roff, _ in pairs if roff["accident"])
    on_acc = sum(1 for _, ron in pairs if ron["accident"])
    if off_acc == 0:
        return None
    n = len(pairs)
    off_frac = off_acc / n
    on_frac = on_acc / n
    return (off_frac - on_frac) / off_frac


def accident_fractions_by_kind(results):
    """kind_label -> (off_fraction, on_fraction)."""
    counts = {}
    for r in results:
        if r["kind_label"] == 0:
            continue
        k = r["kind_label"]
        cnt = counts.setdefault(k, [0, 0, 0, 0])  # off_n, off_acc, on_n, on_acc
        if r["defense"]:
            cnt[2] += 1
            cnt[3] += 1 if r["accident"] else 0
        else:
            cnt[0] += 1
            cnt[1] += 1 if r["accident"] else 0
    out = {}
    for k, (offn, offa, onn, ona) in sorted(counts.items()):
        out[k] = (offa / offn if offn else math.nan, ona / onn if onn else math.nan)
    return out


def accuracy_by_kind(results):
    """kind_label -> dict of single/multi accuracy with CI, over defense-on runs."""
    groups = {}
    for r in results:
        if r["defense"] and r["kind_label"] != 0:
            groups.setdefault(r["kind_label"], []).append(r)
    out = {}
    for k, runs in sorted(groups.items()):
        single = [1.0 if score_single_label(r) else 0.0 for r in runs]
        multi = [1.0 if score_multi_label(r) else 0.0 for r in runs]
        out[k] = {
            "n": len(runs),
            "single": confidence_interval(single),
            "multi": confidence_interval(multi),
        }
    return out


def accuracy_by_id(results):
    """(size, attacker) -> accuracy dict, pooled across kinds, defense-on runs."""
    groups = {}
    for r in results:
        if r["defense"] and r["kind_label"] != 0:
            groups.setdefault((r["size"], r["attacker"]), []).append(r)
    out = {}
    for key, runs in sorted(groups.items()):
        single = [1.0 if score_single_label(r) else 0.0 for r in runs]
        multi = [1.0 if score_multi_label(r) else 0.0 for r in runs]
        out[key] = {
            "n": len(runs),
            "single": confidence_interval(single),
            "multi": confidence_interval(multi),
        }
    return out


def confusion_matrix(results):
    """9x9 row-normalized matrix over first-non-zero predictions of defense-on
    runs; a run with no non-zero prediction lands in column 0.  Rows with no
    runs stay all-zero."""
    counts = [[0] * N_CLASSES for _ in range(N_CLASSES)]
    for r in results:
        if not r["defense"] or r["kind_label"] == 0:
            continue
        counts[r["kind_label"]][first_nonzero_label(r)] += 1
    matrix = []
    for row in counts:
        s = sum(row)
        matrix.append([c / s for c in row] if s else [0.0] * N_CLASSES)
    return matrix


def check_fsm_properties(result, beacon_interval=0.1):
    """Validate monotone FSM progression, warning latching, and platoon-wide
    propagation on one run's transition log.

    Returns a list of violation strings (empty = all properties hold).
    Propagation bound: every follower must reach GAP_CONTROL within
    size * beacon_interval + 0.2 s of the first detection transition.
    """
    problems = []
    order = {"FOLLOWING": 0, "GAP_CONTROL": 1, "DOWNGRADE": 2}
    per_vehicle = {}
    for t, veh, frm, to, cause in result["fsm_events"]:
        per_vehicle.setdefault(veh, []).append((t, frm, to, cause))
    for veh, evs in per_vehicle.items():
        evs.sort()
        prev = 0
        for t, frm, to, cause in evs:
            if order[frm] != prev or order[to] != prev + 1:
                problems.append(f"vehicle {veh}: non-monotone transition {frm}->{to} at t={t}")
            prev = order[to]
    detections = [t for t, veh, frm, to, cause in result["fsm_events"] if cause == "prediction"]
    if detections:
        t0 = min(detections)
        bound = result["size"] * beacon_interval + 0.2
        for veh in range(1, result["size"]):
            times = [t for t, v_, frm, to, _ in result["fsm_events"]
                     if v_ == veh and to == "GAP_CONTROL"]
            if not times:
                problems.append(f"vehicle {veh}: never reached GAP_CONTROL after detection")
            elif min(times) > t0 + bound + 1e-9:
                problems.append(
                    f"vehicle {veh}: GAP_CONTROL at {min(times):.1f}, detection at {t0:.1f}, "
                    f"bound {bound:.1f}")
    return problems
