"""Analysis tooling: the top-p sweep, the multiply-accumulate report, and
the attention-over-time dump.

Reuses the checkpoint written by 03_train_and_predict.py if present,
otherwise trains one first. Output CSV/SVG files land in demos/out/.
"""

import os

from trajpred import harness
from trajpred.config import RunConfig

cfg = RunConfig({
    "model.d": 32, "model.heads": 4, "model.k": 5,
    "data.kind": "crossing",
    "data.train_scenes": 100, "data.val_scenes": 20,
    "train.epochs": 30, "train.warmup_steps": 100,
    "output.dir": "demos/out",
})
ckpt = os.path.join(cfg["output.dir"], "checkpoint.bin")
if not os.path.exists(ckpt):
    print("no checkpoint yet; training one (see 03_train_and_predict.py)...")
    harness.run_train(cfg)

# how does the error change as pruning gets more aggressive?
print("top-p sweep on the validation scenes:")
sweep = harness.run_sweep(cfg, [0.5, 0.65, 0.75, 0.85, 0.95, 1.0], ckpt)
for p, ade, fde, mean_k in sweep["rows"]:
    bar = "#" * round(mean_k * 10)
    print(f"  p={p:4g}  minADE {ade:.3f}  mean kept neighbors {mean_k:.2f} {bar}")
print(f"written: {sweep['csv']}, {sweep['svg']}")

# where does the compute go, and what does pruning save?
print("\nmultiply-accumulate report (M = 8 agents):")
macs = harness.run_macs(cfg, m=8)
for line in macs["report"].lines():
    print(" ", line)
print(f"  trainable parameters: {macs['params']:,d}")

# when does the model think the pair interacts?
print("\nattention over time for pair (0,1) of validation scene 0:")
viz = harness.run_viz_attention(cfg, ckpt, 0, (0, 1))
closest = viz["distance"].argmin()
for t, (a, d) in enumerate(zip(viz["mean_alpha"], viz["distance"])):
    marker = " <- closest approach" if t == closest else ""
    print(f"  t={t}: alpha {a:.3f}  distance {d:5.2f} m{marker}")
print(f"written: {viz['csv']}, {viz['svg']}")
