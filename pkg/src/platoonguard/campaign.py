"""Campaign matrix, training-corpus generation, and report writing.

A campaign sweeps platoon sizes x misbehaving-vehicle IDs x all 8 misbehavior
kinds x defense on/off x repetitions.  The defense flag is excluded from run
seeding, so each off/on pair shares the activation time and injected values
and accident outcomes compare like-for-like.

Every run is written as one canonical-JSON file (sorted keys, compact
separators, trailing newline), so identical configuration and seeds reproduce
byte-identical result files.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict

from .features import (
    FeatureWindow,
    apply_scaler,
    balance,
    fit_scaler,
    load_windows,
    save_scaler_text,
    save_windows,
    split,
    windows_from_records,
)
from .ingest import CanonicalRecord
from .injector import KIND_LABELS, KIND_NAMES
from .model_io import DetectorModel, save_model
from .scoring import (
    accident_fractions_by_kind,
    accident_gain,
    accuracy_by_id,
    accuracy_by_kind,
    confusion_matrix,
    false_positive_report,
)
from .sim import RunConfig, run_sim
from .training import TrainConfig, train, write_history

import numpy as np


def sim_config(cfg, size, kind, attacker, defense, rep, base_seed=None,
               force_defense_at=None):
    """Build a RunConfig from the flat Config plus matrix coordinates."""
    return RunConfig(
        size=size,
        kind=kind,
        attacker=attacker,
        defense=defense,
        rep=rep,
        base_seed=cfg.campaign_seed if base_seed is None else base_seed,
        duration=cfg.duration,
        radar_noise=cfg.radar_noise,
        force_defense_at=force_defense_at,
        leader_speed=cfg.leader_speed,
        osc_amplitude=cfg.osc_amplitude,
        osc_frequency=cfg.osc_frequency,
        vehicle_length=cfg.vehicle_length,
        ploeg_headway=cfg.ploeg_headway,
        ploeg_kp=cfg.ploeg_kp,
        ploeg_kd=cfg.ploeg_kd,
        leader_gain=cfg.leader_gain,
        acc_headway=cfg.acc_headway,
        standstill=cfg.standstill,
        accel_min=cfg.accel_min,
        accel_max=cfg.accel_max,
        acc_lambda=cfg.acc_lambda,
        physics_step=cfg.physics_step,
        beacon_interval=cfg.beacon_interval,
        delta_g=cfg.delta_g,
        delta_t_gap=cfg.delta_t_gap,
    )


def result_to_dict(res):
    """JSON-serializable view of one run (detecting vehicle's predictions only)."""
    rc = res.config
    preds = res.predictions.get(res.detecting, []) if res.detecting is not None else []
    return {
        "accident": res.accident,
        "activation": res.activation,
        "attacker": rc.attacker,
        "collisions": [[t, rear, front] for t, rear, front in res.collisions],
        "defense": rc.defense,
        "detecting": res.detecting,
        "fsm_events": [[t, veh, frm, to, cause] for t, veh, frm, to, cause in res.fsm_events],
        "injector_fallbacks": res.injector_fallbacks,
        "kind": KIND_NAMES.get(rc.kind, "regular"),
        "kind_label": rc.kind,
        "predictions": [[t, lab] for t, lab in preds],
        "rep": rc.rep,
        "seed": list(rc.seed_entropy()),
        "size": rc.size,
    }


def dump_result_json(d):
    return json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n"


def result_filename(d):
    mode = "on" if d["defense"] else "off"
    return f"{d['kind']}_size{d['size']}_veh{d['attacker']}_{mode}_rep{d['rep']}.json"


def run_campaign(cfg, model, outdir, log=None):
    """Run the full matrix, writing one JSON per run plus manifest.json.

    Returns the list of run dicts.  Defense-off runs skip the detector (no
    model in the loop); defense-on runs require `model`.
    """
    if model is None:
        raise ValueError("a trained detector model is required for defense-on runs")
    os.makedirs(outdir, exist_ok=True)
    results = []
    files = []
    for size in cfg.sizes:
        for attacker in cfg.ids_for_size(size):
            for kind in sorted(KIND_NAMES):
                if log:
                    log(f"size {size} attacker {attacker} kind {KIND_NAMES[kind]}")
                for defense in (False, True):
                    for rep in range(cfg.repetitions):
                        rc = sim_config(cfg, size, kind, attacker, defense, rep)
                        res = run_sim(rc, model=model if defense else None)
                        d = result_to_dict(res)
                        name = result_filename(d)
                        with open(os.path.join(outdir, name), "w") as fh:
                            fh.write(dump_result_json(d))
                        files.append(name)
                        results.append(d)
    manifest = {
        "config": asdict(cfg),
        "files": files,
        "n_runs": len(files),
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        fh.write(dump_result_json(manifest))
    if log:
        log(f"wrote {len(files)} runs to {outdir}")
    return results


def load_results(runs_dir):
    """Read back every run listed in a campaign manifest."""
    with open(os.path.join(runs_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    results = []
    for name in manifest["files"]:
        with open(os.path.join(runs_dir, name)) as fh:
            results.append(json.load(fh))
    return results


def _harvest_to_records(harvest):
    """Harvested beacon rows -> canonical records, one stream per sender.

    The receiver is pinned to sender+1 (the vehicle behind, which is the one
    whose detector would consume the stream).  Heading plays no part in the
    window features, so it is stored as 0.
    """
    records = []
    for sender, rows in harvest.items():
        for t, posx, posy, spdx, spdy, acl, lab in rows:
            records.append(CanonicalRecord(
                rx=sender + 1, sender_pseudo=sender, send_time=t,
                posx=posx, posy=posy, spdx=spdx, spdy=spdy,
                acl=acl, hed=0.0, lab=lab,
            ))
    return records


def generate_training_corpus(cfg, out_path, log=None):
    """Simulate labeled beacon streams and save the unscaled window tensor.

    Per platoon size: regular runs harvesting every non-tail sender (label 0),
    then per kind a set of runs harvesting only the misbehaving vehicle, with
    the misbehaving ID rotated across the valid positions for geometry
    diversity.  Windows are cut per run so streams never interleave.
    """
    windows = []
    for size in cfg.sizes:
        for rep in range(cfg.gendata_regular_runs):
            rc = sim_config(cfg, size, 0, -1, False, rep, base_seed=cfg.gendata_seed)
            res = run_sim(rc, harvest_senders=tuple(range(size - 1)))
            windows.extend(windows_from_records(_harvest_to_records(res.harvest)))
        ids = cfg.ids_for_size(size)
        for kind in sorted(KIND_NAMES):
            if log:
                log(f"size {size} corpus: {KIND_NAMES[kind]}")
            for rep in range(cfg.gendata_runs_per_kind):
                attacker = ids[rep % len(ids)]
                rc = sim_config(cfg, size, kind, attacker, False, rep,
                                base_seed=cfg.gendata_seed)
                res = run_sim(rc, harvest_senders=(attacker,))
                if kind == KIND_LABELS["dataReplay"]:
                    # A replayed stream reproduces a genuine neighbor's
                    # kinematics, so windows lying fully inside it are
                    # feature-identical to that neighbor's regular windows;
                    # harvesting them as misbehavior teaches the classifier to
                    # flag ordinary driving.  Keep the stream only through the
                    # window that straddles the replay onset — the one carrying
                    # the discriminative jump.
                    act = res.activation
                    res.harvest = {
                        s: [row for row in rows if row[0] <= act + 1e-9]
                        for s, rows in res.harvest.items()
                    }
                windows.extend(windows_from_records(_harvest_to_records(res.harvest)))
    X = np.stack([w.rows for w in windows])
    y = np.array([w.label for w in windows], dtype=np.int64)
    save_windows(out_path, X, y)
    if log:
        counts = {int(k): int(n) for k, n in zip(*np.unique(y, return_counts=True))}
        log(f"saved {len(windows)} windows to {out_path} (label counts {counts})")
    return X, y


def train_detector(cfg, corpus_path, model_path, history_path=None,
                   scaler_path=None, log=None):
    """Corpus file -> balanced, scaled, split dataset -> trained model file."""
    X, y = load_windows(corpus_path)
    windows = [FeatureWindow(rows=X[i], label=int(y[i]), origin=(0, 0, float(i)))
               for i in range(len(X))]
    balanced = balance(windows, seed=cfg.train_seed)
    scaler = fit_scaler(balanced)
    scaled = [FeatureWindow(rows=apply_scaler(w.rows, scaler), label=w.label,
                            origin=w.origin) for w in balanced]
    ds = split(scaled, seed=cfg.train_seed, fraction=cfg.validation_fraction)
    tc = TrainConfig(
        hidden_size=cfg.hidden_size,
        learning_rate=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        epsilon=cfg.epsilon,
        batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs,
        min_delta=cfg.min_delta,
        patience=cfg.patience,
        seed=cfg.train_seed,
    )
    params, history = train(ds, tc)
    model = DetectorModel(params=params, scaler=scaler)
    save_model(model_path, model)
    if history_path:
        write_history(history_path, history)
    if scaler_path:
        save_scaler_text(scaler_path, scaler)
    if log:
        last = history[-1]
        best = max(h.val_acc for h in history)
        log(f"trained {len(history)} epochs (final val_acc {last.val_acc:.4f}, "
            f"best {best:.4f}); model saved to {model_path}")
    return model, history


def _fmt_ci(ci):
    mean, lo, hi = ci
    return f"{mean:.4f}\t{lo:.4f}\t{hi:.4f}"


def write_report(results, outdir, log=None):
    """Aggregate run dicts into human-readable text plus delimited tables."""
    os.makedirs(outdir, exist_ok=True)
    by_kind = accuracy_by_kind(results)
    by_id = accuracy_by_id(results)
    conf = confusion_matrix(results)
    fp, fp_total = false_positive_report(results)
    fractions = accident_fractions_by_kind(results)
    gain = accident_gain(results)

    with open(os.path.join(outdir, "accuracy_by_kind.tsv"), "w") as fh:
        fh.write("kind_label\tkind\tn\tsingle\tsingle_lo\tsingle_hi\tmulti\tmulti_lo\tmulti_hi\n")
        for k, row in by_kind.items():
            fh.write(f"{k}\t{KIND_NAMES[k]}\t{row['n']}\t"
                     f"{_fmt_ci(row['single'])}\t{_fmt_ci(row['multi'])}\n")

    with open(os.path.join(outdir, "accuracy_by_id.tsv"), "w") as fh:
        fh.write("size\tattacker\tn\tsingle\tsingle_lo\tsingle_hi\tmulti\tmulti_lo\tmulti_hi\n")
        for (size, attacker), row in by_id.items():
            fh.write(f"{size}\t{attacker}\t{row['n']}\t"
                     f"{_fmt_ci(row['single'])}\t{_fmt_ci(row['multi'])}\n")

    with open(os.path.join(outdir, "confusion.tsv"), "w") as fh:
        names = ["regular"] + [KIND_NAMES[k] for k in sorted(KIND_NAMES)]
        fh.write("true\\pred\t" + "\t".join(names) + "\n")
        for i, row in enumerate(conf):
            fh.write(names[i] + "\t" + "\t".join(f"{v:.4f}" for v in row) + "\n")

    fp_rate = fp / fp_total if fp_total else 0.0
    with open(os.path.join(outdir, "false_positives.tsv"), "w") as fh:
        fh.write("false_positives\tpre_activation_windows\trate\n")
        fh.write(f"{fp}\t{fp_total}\t{fp_rate:.6f}\n")

    with open(os.path.join(outdir, "accidents.tsv"), "w") as fh:
        fh.write("kind_label\tkind\toff_fraction\ton_fraction\n")
        for k, (off_f, on_f) in fractions.items():
            fh.write(f"{k}\t{KIND_NAMES[k]}\t{off_f:.4f}\t{on_f:.4f}\n")
        fh.write(f"\noverall_gain\t{'undefined' if gain is None else f'{gain:.4f}'}\n")

    lines = ["Campaign report", "===============", ""]
    lines.append(f"runs: {len(results)}")
    lines.append("")
    lines.append("Detection accuracy by kind (defense on; mean [95% CI]):")
    for k, row in by_kind.items():
        s, slo, shi = row["single"]
        m, mlo, mhi = row["multi"]
        lines.append(f"  {KIND_NAMES[k]:>13}: single {s:.3f} [{slo:.3f}, {shi:.3f}]  "
                     f"multi {m:.3f} [{mlo:.3f}, {mhi:.3f}]  (n={row['n']})")
    lines.append("")
    lines.append("Detection accuracy by misbehaving vehicle position:")
    for (size, attacker), row in by_id.items():
        s = row["single"][0]
        m = row["multi"][0]
        lines.append(f"  size {size} vehicle {attacker}: single {s:.3f}  multi {m:.3f}  (n={row['n']})")
    lines.append("")
    lines.append(f"False positives: {fp} of {fp_total} pre-activation windows "
                 f"(rate {fp_rate:.6f})")
    lines.append("")
    lines.append("Accident fraction by kind (off -> on):")
    for k, (off_f, on_f) in fractions.items():
        lines.append(f"  {KIND_NAMES[k]:>13}: {off_f:.3f} -> {on_f:.3f}")
    lines.append("")
    lines.append("Accident gain (paired, all kinds): "
                 + ("undefined (no defense-off accidents)" if gain is None else f"{gain:.4f}"))
    lines.append("")
    text = "\n".join(lines)
    with open(os.path.join(outdir, "report.txt"), "w") as fh:
        fh.write(text)
    if log:
        log(text)
    return text
