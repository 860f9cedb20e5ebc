"""platoonguard: highway platooning with V2X misbehavior detection and defense.

Pieces:
  ingest      -- VeReMi-style message log parsing into labeled canonical records
  features    -- jumping-window feature engineering, balancing, scaling
  lstm        -- from-scratch LSTM classifier (forward + backprop through time)
  optim       -- AdamW with decoupled weight decay
  training    -- training loop with early stopping
  online      -- streaming per-sender window state for live prediction
  sim         -- deterministic longitudinal platoon dynamics (CACC/ACC, radar)
  injector    -- transmitted-beacon falsification (eight misbehavior kinds)
  defense     -- per-vehicle FSM: warning relay, gradual gap control, ACC fallback
  campaign    -- experiment matrix runner, corpus builder, metrics report
"""

__version__ = "0.1.0"
