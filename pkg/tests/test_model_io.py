"""Binary model file format: byte-exact round trips and corruption errors."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from platoonguard.lstm import PARAM_FIELDS, forward, init_params
from platoonguard.model_io import MODEL_MAGIC, DetectorModel, load_model, save_model

from conftest import make_tiny_model


def test_round_trip_preserves_every_byte_of_state(tmp_path):
    model = make_tiny_model(hidden=5, seed=31, mean=np.linspace(-1, 1, 6),
                            std=np.linspace(0.5, 2.0, 6))
    path = str(tmp_path / "model.bin")
    save_model(path, model)
    back = load_model(path)
    for name in PARAM_FIELDS:
        np.testing.assert_array_equal(getattr(back.params, name),
                                      getattr(model.params, name))
    np.testing.assert_array_equal(back.scaler.mean, model.scaler.mean)
    np.testing.assert_array_equal(back.scaler.std, model.scaler.std)


def test_round_trip_forward_is_bitwise_identical(tmp_path):
    model = make_tiny_model(hidden=7, seed=32)
    path = str(tmp_path / "model.bin")
    save_model(path, model)
    back = load_model(path)
    rng = np.random.default_rng(33)
    for _ in range(10):
        w = rng.normal(size=(4, 6))
        np.testing.assert_array_equal(forward(w, back.params),
                                      forward(w, model.params))


def test_save_twice_is_deterministic(tmp_path):
    model = make_tiny_model(hidden=4, seed=34)
    a, b = str(tmp_path / "a.bin"), str(tmp_path / "b.bin")
    save_model(a, model)
    save_model(b, model)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_magic_prefix(tmp_path):
    model = make_tiny_model()
    path = tmp_path / "model.bin"
    save_model(str(path), model)
    assert path.read_bytes()[:4] == MODEL_MAGIC == b"MDS1"


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + b"\x00" * 100)
    with pytest.raises(ValueError, match="not a detector model"):
        load_model(str(path))


def test_truncated_file_rejected(tmp_path):
    model = make_tiny_model()
    path = tmp_path / "model.bin"
    save_model(str(path), model)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(ValueError, match="truncated"):
        load_model(str(path))


def test_trailing_bytes_rejected(tmp_path):
    model = make_tiny_model()
    path = tmp_path / "model.bin"
    save_model(str(path), model)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(ValueError, match="trailing"):
        load_model(str(path))


def test_header_hidden_size_cross_checked(tmp_path):
    model = make_tiny_model(hidden=4)
    path = tmp_path / "model.bin"
    save_model(str(path), model)
    data = bytearray(path.read_bytes())
    # the uint32 right after the magic declares the hidden size
    data[4:8] = struct.pack("<I", 9)
    path.write_bytes(bytes(data))
    with pytest.raises(ValueError, match="hidden size"):
        load_model(str(path))


def test_validate_rejects_inconsistent_tensors():
    model = make_tiny_model(hidden=4)
    model.params.dense1_W = np.zeros((156, 5))  # wrong hidden dimension
    with pytest.raises(ValueError):
        model.params.validate()


def test_save_requires_valid_params(tmp_path):
    model = make_tiny_model(hidden=4)
    model.params.b_f = np.zeros(3)
    with pytest.raises(ValueError):
        save_model(str(tmp_path / "m.bin"), model)
