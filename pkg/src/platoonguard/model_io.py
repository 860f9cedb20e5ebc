"""Detector model serialization.

Versioned binary layout, little-endian:

    magic  "MDS1"                      4 bytes
    hidden_size                        uint32
    12 parameter tensors, in PARAM_FIELDS order, each as
        ndim   uint32
        dims   uint64 x ndim
        data   float64 x prod(dims), row-major
    scaler mean                        float64 x 6
    scaler std                         float64 x 6

Round trips are byte-exact: tensors are written with tobytes() and read with
frombuffer(), no decimal formatting involved.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .features import N_FEATURES, ScalerParams
from .lstm import PARAM_FIELDS, LstmParams

MODEL_MAGIC = b"MDS1"


@dataclass
class DetectorModel:
    params: LstmParams
    scaler: ScalerParams


def save_model(path, model):
    model.params.validate()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", model.params.hidden_size))
        for tensor in model.params.tensors():
            t = np.ascontiguousarray(tensor, dtype=np.float64)
            fh.write(struct.pack("<I", t.ndim))
            fh.write(struct.pack(f"<{t.ndim}Q", *t.shape))
            fh.write(t.tobytes(order="C"))
        fh.write(np.ascontiguousarray(model.scaler.mean, dtype=np.float64).tobytes())
        fh.write(np.ascontiguousarray(model.scaler.std, dtype=np.float64).tobytes())


def _read_exact(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise ValueError(f"truncated model file while reading {what}")
    return buf


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MODEL_MAGIC:
            raise ValueError(f"not a detector model file (magic {magic!r}, expected {MODEL_MAGIC!r})")
        (hidden_size,) = struct.unpack("<I", _read_exact(fh, 4, "hidden size"))
        tensors = {}
        for name in PARAM_FIELDS:
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4, f"{name} ndim"))
            if ndim not in (1, 2):
                raise ValueError(f"{name}: bad tensor rank {ndim}")
            dims = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim, f"{name} dims"))
            count = int(np.prod(dims))
            data = _read_exact(fh, 8 * count, f"{name} data")
            tensors[name] = np.frombuffer(data, dtype="<f8").reshape(dims).copy()
        mean = np.frombuffer(_read_exact(fh, 8 * N_FEATURES, "scaler mean"), dtype="<f8").copy()
        std = np.frombuffer(_read_exact(fh, 8 * N_FEATURES, "scaler std"), dtype="<f8").copy()
        extra = fh.read(1)
        if extra:
            raise ValueError("trailing bytes after model payload")
    params = LstmParams(**tensors)
    if params.hidden_size != hidden_size:
        raise ValueError(f"header hidden size {hidden_size} != tensor hidden size {params.hidden_size}")
    params.validate()
    return DetectorModel(params=params, scaler=ScalerParams(mean=mean, std=std))
