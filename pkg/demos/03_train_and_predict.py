"""Train a small predictor on synthetic crossing scenes and compare it to
straight-line extrapolation.

Uses a reduced configuration (d = 32, 100 scenes, 30 epochs, ~15 s) so the
demo stays quick; the full-size run lives in the acceptance tests.
Artifacts (checkpoint, loss curve CSV) land in demos/out/.
"""

import numpy as np

from trajpred import harness
from trajpred.config import RunConfig
from trajpred.heads import constant_velocity_baseline, min_ade_fde

cfg = RunConfig({
    "model.d": 32, "model.heads": 4, "model.k": 5,
    "data.kind": "crossing",
    "data.train_scenes": 100, "data.val_scenes": 20,
    "train.epochs": 30, "train.warmup_steps": 100,
    "output.dir": "demos/out",
})

print("training on 100 crossing scenes (30 epochs)...")
result = harness.run_train(cfg)
for epoch, train_loss, val_ade, val_fde in result["history"][::6]:
    print(f"  epoch {epoch:2d}: train loss {train_loss:.3f}  "
          f"val minADE {val_ade:.3f}  minFDE {val_fde:.3f}")
print(f"checkpoint: {result['checkpoint']}")
print(f"loss curve: {result['loss_csv']}")

# compare against the constant-velocity baseline on the validation split
model = result["model"]
val = harness.make_scenes(cfg, "val")
ade_model = ade_base = agents = 0
for scene in val:
    preds, _ = model.predict(scene)
    m = scene.num_agents
    ade_model += min_ade_fde(preds, scene.future).min_ade * m
    ade_base += min_ade_fde(constant_velocity_baseline(scene),
                            scene.future).min_ade * m
    agents += m
print(f"\nval minADE: model {ade_model / agents:.3f} m, "
      f"straight-line baseline {ade_base / agents:.3f} m")

# show one scene in detail: best-of-K candidates vs the ground truth
scene = val[0]
preds, _ = model.predict(scene)
report = min_ade_fde(preds, scene.future)
np.set_printoptions(precision=2, suppress=True)
print(f"\nscene {scene.scene_id}, agent 0, "
      f"best of {report.k_used} candidates (index {preds.best_index[0]}):")
print("predicted:", preds.positions[0, preds.best_index[0], :4])
print("actual:   ", scene.future[0, :4])
