"""Run-level operations behind the CLI: dataset assembly, training runs,
evaluation, top-p sweeps, MAC reports, and attention visualization dumps."""

from __future__ import annotations

import csv
import math
import os

import numpy as np

from .checkpoint import check_compatible, load_checkpoint, restore_parameters, save_checkpoint
from .config import RunConfig
from .data import ConfigError, Scene, generate_synthetic, load_ethucy_text, normalize
from .heads import constant_velocity_baseline, min_ade_fde
from .macs import MacReport, count_macs, parameter_count
from .model import ModelConfig, TrajectoryPredictor
from .svg import line_chart
from .training import Adam, evaluate, train_epoch, warmup_cosine
from .pruning import prune

__all__ = [
    "build_model", "make_scenes", "run_train", "run_eval",
    "run_sweep", "run_macs", "run_viz_attention",
]

# seed offsets keeping train/val synthetic streams disjoint
_VAL_SEED_OFFSET = 50_000
_SEED_STRIDE = 100_000


def build_model(cfg: RunConfig, prune_enabled: bool = True) -> TrajectoryPredictor:
    mc = ModelConfig(
        d=cfg["model.d"], heads=cfg["model.heads"], layers=cfg["model.layers"],
        k=cfg["model.k"], t_f=cfg["data.t_f"], top_p=cfg["model.p"],
        weighting=cfg["model.weighting"], prune_enabled=prune_enabled,
    )
    return TrajectoryPredictor(mc, seed=cfg["train.seed"])


def make_scenes(cfg: RunConfig, split: str) -> list[Scene]:
    source = cfg["data.source"]
    if source == "synthetic":
        count = cfg["data.train_scenes"] if split == "train" else cfg["data.val_scenes"]
        base = cfg["train.seed"] * _SEED_STRIDE + (0 if split == "train" else _VAL_SEED_OFFSET)
        return [
            generate_synthetic(cfg["data.kind"], cfg["data.m"], cfg["data.t_h"],
                               cfg["data.t_f"], seed=base + i)
            for i in range(count)
        ]
    if source == "ethucy":
        path = cfg["data.path"]
        if not path:
            raise ConfigError("data.source=ethucy requires data.path")
        t_h, t_f, stride = cfg["data.t_h"], cfg["data.t_f"], cfg["data.stride"]
        if os.path.isdir(path):
            leave_out = cfg["data.leave_out"]
            if not leave_out:
                raise ConfigError("directory data.path requires data.leave_out")
            files = sorted(f for f in os.listdir(path) if f.endswith(".txt"))
            chosen = [f for f in files if (f == leave_out) == (split == "val")]
            scenes = []
            for f in chosen:
                for s in load_ethucy_text(os.path.join(path, f), t_h, t_f, stride):
                    scenes.append(Scene(agent_ids=s.agent_ids, observed=s.observed,
                                        future=s.future, scene_id=f"{f}:{s.scene_id}"))
            return scenes
        return load_ethucy_text(path, t_h, t_f, stride)
    raise ConfigError(f"unknown data.source {source!r}")


def _ensure_outdir(cfg: RunConfig) -> str:
    out = cfg["output.dir"]
    os.makedirs(out, exist_ok=True)
    return out


def run_train(cfg: RunConfig) -> dict:
    out = _ensure_outdir(cfg)
    train_scenes = make_scenes(cfg, "train")
    val_scenes = make_scenes(cfg, "val")
    if not train_scenes or not val_scenes:
        raise ConfigError("training needs non-empty train and val splits "
                          f"(got {len(train_scenes)} / {len(val_scenes)} scenes)")
    model = build_model(cfg)
    batch = cfg["train.batch_scenes"]
    total_steps = cfg["train.epochs"] * math.ceil(len(train_scenes) / batch)
    schedule = None
    if cfg["train.lr_decay"] == "cosine":
        schedule = warmup_cosine(cfg["train.learning_rate"],
                                 cfg["train.warmup_steps"], total_steps)
    optimizer = Adam(model.parameters(), lr=cfg["train.learning_rate"],
                     clip_norm=cfg["train.clip_norm"], lr_schedule=schedule)
    shuffle_rng = np.random.default_rng(cfg["train.seed"] + 1)
    ckpt_path = os.path.join(out, "checkpoint.bin")
    loss_path = os.path.join(out, "loss.csv")
    save_checkpoint(ckpt_path, model.parameters(), cfg.as_dict())
    history = []
    with open(loss_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_minADE", "val_minFDE"])
        for epoch in range(cfg["train.epochs"]):
            train_loss = train_epoch(model, optimizer, train_scenes,
                                     cfg["train.batch_scenes"], cfg["loss.min_scope"],
                                     shuffle_rng)
            val_ade, val_fde, _ = evaluate(model, val_scenes)
            writer.writerow([epoch, f"{train_loss:.9f}", f"{val_ade:.9f}", f"{val_fde:.9f}"])
            save_checkpoint(ckpt_path, model.parameters(), cfg.as_dict())
            history.append((epoch, train_loss, val_ade, val_fde))
    return {"checkpoint": ckpt_path, "loss_csv": loss_path, "history": history,
            "model": model}


def _load_into(cfg: RunConfig, checkpoint: str, prune_enabled: bool = True) -> TrajectoryPredictor:
    saved, saved_cfg = load_checkpoint(checkpoint)
    check_compatible(cfg.as_dict(), saved_cfg)
    model = build_model(cfg, prune_enabled=prune_enabled)
    restore_parameters(model.parameters(), saved)
    return model


def run_eval(cfg: RunConfig, checkpoint: str | None) -> dict:
    out = _ensure_outdir(cfg)
    val_scenes = make_scenes(cfg, "val")
    if not val_scenes:
        raise ConfigError("evaluation needs at least one validation scene")
    if cfg["eval.baseline"]:
        rows, ade_sum, fde_sum, agents = [], 0.0, 0.0, 0
        for scene in val_scenes:
            report = min_ade_fde(constant_velocity_baseline(scene), scene.future)
            m = scene.num_agents
            rows.append((scene.scene_id, report.min_ade, report.min_fde, 1, m))
            ade_sum += report.min_ade * m
            fde_sum += report.min_fde * m
            agents += m
        ade, fde = ade_sum / agents, fde_sum / agents
    else:
        if checkpoint is None:
            raise ConfigError("eval requires --checkpoint (or eval.baseline=true)")
        model = _load_into(cfg, checkpoint)
        ade, fde, rows = evaluate(model, val_scenes)
    path = os.path.join(out, "eval.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scene_id", "min_ade", "min_fde", "k", "M"])
        for row in rows:
            writer.writerow([row[0], f"{row[1]:.9f}", f"{row[2]:.9f}", row[3], row[4]])
        writer.writerow(["aggregate", f"{ade:.9f}", f"{fde:.9f}",
                         rows[0][3] if rows else 0, sum(r[4] for r in rows)])
    return {"min_ade": ade, "min_fde": fde, "csv": path, "rows": rows}


def _evaluate_with_p(model: TrajectoryPredictor, scenes: list[Scene], p: float):
    """Metrics plus mean retained-neighbor count at pruning threshold p."""
    from .model import ModelConfig

    old = model.config
    model.config = ModelConfig(d=old.d, heads=old.heads, layers=old.layers,
                               k=old.k, t_f=old.t_f, top_p=p,
                               weighting=old.weighting, prune_enabled=old.prune_enabled)
    try:
        ade_sum = fde_sum = 0.0
        agents = 0
        k_values = []
        for scene in scenes:
            preds, result = model.predict(scene)
            report = min_ade_fde(preds, scene.future)
            m = scene.num_agents
            ade_sum += report.min_ade * m
            fde_sum += report.min_fde * m
            agents += m
            k_values.extend(result.pruned.k_star.tolist())
        return ade_sum / agents, fde_sum / agents, float(np.mean(k_values))
    finally:
        model.config = old


def run_sweep(cfg: RunConfig, p_values: list[float], checkpoint: str | None) -> dict:
    if not p_values:
        raise ConfigError("sweep requires a non-empty p list")
    out = _ensure_outdir(cfg)
    val_scenes = make_scenes(cfg, "val")
    if not val_scenes:
        raise ConfigError("sweep needs at least one validation scene")
    rows = []
    for p in p_values:
        if cfg["sweep.retrain"]:
            sub = RunConfig(cfg.as_dict())
            sub.values["model.p"] = p
            sub.values["output.dir"] = os.path.join(out, f"sweep_p{p:g}")
            model = run_train(sub)["model"]
        else:
            if checkpoint is None:
                raise ConfigError("sweep without retrain requires --checkpoint")
            model = _load_into(cfg, checkpoint)
        ade, fde, mean_k = _evaluate_with_p(model, val_scenes, p)
        rows.append((p, ade, fde, mean_k))
    path = os.path.join(out, "sweep.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "minADE", "minFDE", "mean_k_star"])
        for p, ade, fde, mean_k in rows:
            writer.writerow([f"{p:g}", f"{ade:.9f}", f"{fde:.9f}", f"{mean_k:.6f}"])
    svg_path = os.path.join(out, "sweep.svg")
    line_chart([r[0] for r in rows],
               {"minADE": [r[1] for r in rows], "minFDE": [r[2] for r in rows]},
               svg_path, title="error vs top-p threshold",
               xlabel="p", ylabel="meters")
    return {"rows": rows, "csv": path, "svg": svg_path}


def run_macs(cfg: RunConfig, m: int | None = None) -> dict:
    """Analytic MAC report at the configured sizes; mean k* measured by
    pruning the graphs of a handful of synthetic scenes."""
    m = m if m is not None else cfg["data.m"]
    model = build_model(cfg)
    k_stars = []
    for i in range(8):
        scene = generate_synthetic("crossing" if m >= 2 else "constant_velocity",
                                   m, cfg["data.t_h"], cfg["data.t_f"], seed=900_000 + i)
        norm_scene, _ = normalize(scene)
        result = model.forward(norm_scene.observed)
        k_stars.append(result.pruned.k_star)
    k_star = np.concatenate(k_stars).reshape(-1)
    mean_k = np.full(m, k_star.mean())
    report = count_macs(cfg["model.d"], cfg["model.heads"], cfg["model.layers"],
                        cfg["model.k"], m, cfg["data.t_h"], cfg["data.t_f"],
                        k_star=mean_k)
    return {"report": report, "params": parameter_count(model.parameters())}


def run_viz_attention(cfg: RunConfig, checkpoint: str | None, scene_index: int,
                      pair: tuple[int, int]) -> dict:
    out = _ensure_outdir(cfg)
    val_scenes = make_scenes(cfg, "val")
    if not (0 <= scene_index < len(val_scenes)):
        raise IndexError(f"scene index {scene_index} out of range (0..{len(val_scenes) - 1})")
    scene = val_scenes[scene_index]
    i, j = pair
    if not (0 <= i < scene.num_agents and 0 <= j < scene.num_agents):
        raise IndexError(f"agent pair {pair} out of range for M={scene.num_agents}")
    model = _load_into(cfg, checkpoint) if checkpoint else build_model(cfg)
    _, result = model.predict(scene, store_scores=True)
    scores = result.graph.per_time_scores  # (H, M, M, T_h)
    alpha = scores[:, i, j, :]             # (H, T_h)
    mean_alpha = alpha.mean(axis=0)
    distance = np.linalg.norm(scene.observed[i] - scene.observed[j], axis=-1)

    csv_path = os.path.join(out, f"attention_s{scene_index}_{i}_{j}.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["head", "t", "alpha", "distance_m"])
        for h in range(alpha.shape[0]):
            for t in range(alpha.shape[1]):
                writer.writerow([h, t, f"{alpha[h, t]:.9f}", f"{distance[t]:.9f}"])
        for t in range(alpha.shape[1]):
            writer.writerow(["mean", t, f"{mean_alpha[t]:.9f}", f"{distance[t]:.9f}"])
    svg_path = os.path.join(out, f"attention_s{scene_index}_{i}_{j}.svg")
    line_chart(list(range(alpha.shape[1])),
               {"mean attention": mean_alpha.tolist(),
                "distance (m)": distance.tolist()},
               svg_path, title=f"pair ({i},{j}) attention over time",
               xlabel="observed step", ylabel="value")
    return {"csv": csv_path, "svg": svg_path, "alpha": alpha,
            "mean_alpha": mean_alpha, "distance": distance}
