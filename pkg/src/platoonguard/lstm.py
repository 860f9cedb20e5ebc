"""From-scratch LSTM classifier over 4x6 delta windows.

Single LSTM layer unrolled over the 4 window rows from zero state, followed by
a relu dense layer (156 units) and a softmax dense layer (9 labels).  Gates use
the concatenated form z_t = [h_{t-1}; x_t]:

    f_t = sigmoid(W_f z_t + b_f)          forget gate
    i_t = sigmoid(W_i z_t + b_i)          input gate
    g_t = tanh(W_C z_t + b_C)             candidate cell
    o_t = sigmoid(W_o z_t + b_o)          output gate
    C_t = f_t * C_{t-1} + i_t * g_t
    h_t = o_t * tanh(C_t)

The loss is sparse categorical cross-entropy (mean negative log probability of
the true label, probabilities clamped at 1e-12).  Gradients are computed by
backpropagation through time, derived by hand below; see the gradient checks in
the test suite for the finite-difference oracle.

Everything is float64.  Training uses the batched paths; online inference uses
the single-window ``forward`` so that per-beacon predictions are bitwise
reproducible regardless of batch composition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INPUT_SIZE = 6
SEQ_LEN = 4
DENSE_UNITS = 156
N_CLASSES = 9
PROB_CLAMP = 1e-12

# Serialization / iteration order of the parameter tensors.
PARAM_FIELDS = (
    "W_f", "W_i", "W_C", "W_o",
    "b_f", "b_i", "b_C", "b_o",
    "dense1_W", "dense1_b",
    "dense2_W", "dense2_b",
)


@dataclass
class LstmParams:
    W_f: np.ndarray  # (hidden, hidden+input)
    W_i: np.ndarray
    W_C: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray  # (hidden,)
    b_i: np.ndarray
    b_C: np.ndarray
    b_o: np.ndarray
    dense1_W: np.ndarray  # (156, hidden)
    dense1_b: np.ndarray  # (156,)
    dense2_W: np.ndarray  # (9, 156)
    dense2_b: np.ndarray  # (9,)

    @property
    def hidden_size(self):
        return self.W_f.shape[0]

    def tensors(self):
        return [getattr(self, name) for name in PARAM_FIELDS]

    def copy(self):
        return LstmParams(*(t.copy() for t in self.tensors()))

    def validate(self):
        h = self.hidden_size
        expected = {
            "W_f": (h, h + INPUT_SIZE), "W_i": (h, h + INPUT_SIZE),
            "W_C": (h, h + INPUT_SIZE), "W_o": (h, h + INPUT_SIZE),
            "b_f": (h,), "b_i": (h,), "b_C": (h,), "b_o": (h,),
            "dense1_W": (DENSE_UNITS, h), "dense1_b": (DENSE_UNITS,),
            "dense2_W": (N_CLASSES, DENSE_UNITS), "dense2_b": (N_CLASSES,),
        }
        for name, shape in expected.items():
            t = getattr(self, name)
            if t.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"{name}: non-finite values")


@dataclass
class CellState:
    h: np.ndarray
    C: np.ndarray


def init_params(hidden_size, seed):
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per tensor."""
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    gate_fan = hidden_size + INPUT_SIZE
    return LstmParams(
        W_f=uniform((hidden_size, gate_fan), gate_fan),
        W_i=uniform((hidden_size, gate_fan), gate_fan),
        W_C=uniform((hidden_size, gate_fan), gate_fan),
        W_o=uniform((hidden_size, gate_fan), gate_fan),
        b_f=uniform((hidden_size,), gate_fan),
        b_i=uniform((hidden_size,), gate_fan),
        b_C=uniform((hidden_size,), gate_fan),
        b_o=uniform((hidden_size,), gate_fan),
        dense1_W=uniform((DENSE_UNITS, hidden_size), hidden_size),
        dense1_b=uniform((DENSE_UNITS,), hidden_size),
        dense2_W=uniform((N_CLASSES, DENSE_UNITS), DENSE_UNITS),
        dense2_b=uniform((N_CLASSES,), DENSE_UNITS),
    )


def zero_grads(params):
    return LstmParams(*(np.zeros_like(t) for t in params.tensors()))


def _sigmoid(x):
    # Stable in both tails: exp of a non-positive argument only.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def lstm_cell(x_t, state, params):
    """One gate step.  x_t: (6,), state: CellState -> new CellState."""
    if not (np.all(np.isfinite(x_t)) and np.all(np.isfinite(state.h)) and np.all(np.isfinite(state.C))):
        raise ValueError("non-finite input to lstm_cell")
    z = np.concatenate([state.h, x_t])
    f = _sigmoid(params.W_f @ z + params.b_f)
    i = _sigmoid(params.W_i @ z + params.b_i)
    g = np.tanh(params.W_C @ z + params.b_C)
    o = _sigmoid(params.W_o @ z + params.b_o)
    C = f * state.C + i * g
    h = o * np.tanh(C)
    return CellState(h=h, C=C)


def forward(window, params):
    """Single scaled 4x6 window -> 9-vector of class probabilities."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (SEQ_LEN, INPUT_SIZE):
        raise ValueError(f"expected (4, 6) window, got {window.shape}")
    if not np.all(np.isfinite(window)):
        raise ValueError("non-finite window")
    h = params.hidden_size
    state = CellState(h=np.zeros(h), C=np.zeros(h))
    for t in range(SEQ_LEN):
        state = lstm_cell(window[t], state, params)
    pre1 = params.dense1_W @ state.h + params.dense1_b
    d1 = np.maximum(pre1, 0.0)
    logits = params.dense2_W @ d1 + params.dense2_b
    return _softmax(logits)


def predict_label(window, params):
    return int(np.argmax(forward(window, params)))


def forward_batch(X, params):
    """Batched forward used in training.  X: (B, 4, 6) -> probs (B, 9).

    Returns (probs, cache); the cache carries everything the backward pass
    needs.  Mathematically identical to ``forward`` per row, but computed with
    batched matmuls (so not guaranteed bitwise-equal to the single path).
    """
    X = np.asarray(X, dtype=np.float64)
    B = X.shape[0]
    hsz = params.hidden_size
    h = np.zeros((B, hsz))
    C = np.zeros((B, hsz))
    steps = []
    for t in range(SEQ_LEN):
        z = np.concatenate([h, X[:, t, :]], axis=1)  # (B, hidden+input)
        f = _sigmoid(z @ params.W_f.T + params.b_f)
        i = _sigmoid(z @ params.W_i.T + params.b_i)
        g = np.tanh(z @ params.W_C.T + params.b_C)
        o = _sigmoid(z @ params.W_o.T + params.b_o)
        C_prev = C
        C = f * C_prev + i * g
        tC = np.tanh(C)
        h = o * tC
        steps.append((z, f, i, g, o, C_prev, tC))
    pre1 = h @ params.dense1_W.T + params.dense1_b
    d1 = np.maximum(pre1, 0.0)
    logits = d1 @ params.dense2_W.T + params.dense2_b
    probs = _softmax(logits)
    cache = (steps, h, pre1, d1)
    return probs, cache


def loss_and_gradients(X, y, params):
    loss, grads, _ = loss_grads_probs(X, y, params)
    return loss, grads


def loss_grads_probs(X, y, params):
    """Mean sparse categorical cross-entropy and its gradients (BPTT).

    Derivation sketch (per sample, summed over the batch and divided by B):

      dlogits = p - onehot(y)
      dd1     = dense2_W^T dlogits;      da1 = dd1 * [pre1 > 0]
      dh_4    = dense1_W^T da1
      for t = 4..1:
        do   = dh_t * tanh(C_t);         da_o = do * o(1-o)
        dC_t += dh_t * o_t * (1 - tanh(C_t)^2)
        df   = dC_t * C_{t-1};           da_f = df * f(1-f)
        di   = dC_t * g_t;               da_i = di * i(1-i)
        dg   = dC_t * i_t;               da_C = dg * (1 - g^2)
        dz   = sum_gates W^T da;   dh_{t-1} = dz[:hidden]
        dC_{t-1} = dC_t * f_t

    Weight gradients accumulate da^T z over time steps and batch.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if np.any(y < 0) or np.any(y >= N_CLASSES):
        raise ValueError("labels must be in 0..8")
    B = X.shape[0]
    hsz = params.hidden_size

    probs, (steps, h_last, pre1, d1) = forward_batch(X, params)
    p_true = np.clip(probs[np.arange(B), y], PROB_CLAMP, None)
    loss = float(-np.mean(np.log(p_true)))

    grads = zero_grads(params)

    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B

    grads.dense2_W += dlogits.T @ d1
    grads.dense2_b += dlogits.sum(axis=0)
    dd1 = dlogits @ params.dense2_W
    da1 = dd1 * (pre1 > 0.0)
    grads.dense1_W += da1.T @ h_last
    grads.dense1_b += da1.sum(axis=0)

    dh = da1 @ params.dense1_W  # (B, hidden)
    dC = np.zeros((B, hsz))
    for t in range(SEQ_LEN - 1, -1, -1):
        z, f, i, g, o, C_prev, tC = steps[t]
        da_o = dh * tC * o * (1.0 - o)
        dC = dC + dh * o * (1.0 - tC * tC)
        da_f = dC * C_prev * f * (1.0 - f)
        da_i = dC * g * i * (1.0 - i)
        da_C = dC * i * (1.0 - g * g)

        grads.W_f += da_f.T @ z
        grads.W_i += da_i.T @ z
        grads.W_C += da_C.T @ z
        grads.W_o += da_o.T @ z
        grads.b_f += da_f.sum(axis=0)
        grads.b_i += da_i.sum(axis=0)
        grads.b_C += da_C.sum(axis=0)
        grads.b_o += da_o.sum(axis=0)

        dz = da_f @ params.W_f + da_i @ params.W_i + da_C @ params.W_C + da_o @ params.W_o
        dh = dz[:, :hsz]
        dC = dC * f

    if not np.isfinite(loss):
        raise FloatingPointError("non-finite training loss")
    return loss, grads, probs


def batch_loss(X, y, params):
    """Loss only (used by the finite-difference gradient oracle)."""
    probs, _ = forward_batch(X, params)
    y = np.asarray(y, dtype=np.int64)
    p_true = np.clip(probs[np.arange(len(y)), y], PROB_CLAMP, None)
    return float(-np.mean(np.log(p_true)))
