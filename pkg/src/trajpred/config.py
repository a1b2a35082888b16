"""Flat `key = value` run configuration with dotted keys.

Every key has a default, so an empty file (or no file) runs. Values are
coerced to the type of their default; unknown keys are rejected.
"""

from __future__ import annotations

from .data import ConfigError

__all__ = ["DEFAULTS", "RunConfig", "load_config", "parse_overrides"]

DEFAULTS: dict[str, object] = {
    "model.d": 64,
    "model.heads": 4,
    "model.layers": 1,
    "model.k": 20,
    "model.p": 0.75,
    "model.weighting": "temporal_attention",
    "loss.min_scope": "per_step",
    "data.source": "synthetic",          # synthetic | ethucy
    "data.kind": "constant_velocity",    # synthetic scene kind
    "data.path": "",                     # file or directory for ethucy source
    "data.leave_out": "",                # validation file under data.path
    "data.m": 4,
    "data.t_h": 8,
    "data.t_f": 12,
    "data.stride": 1,
    "data.train_scenes": 200,
    "data.val_scenes": 50,
    "train.epochs": 50,
    "train.batch_scenes": 4,
    "train.learning_rate": 3e-3,
    "train.warmup_steps": 200,
    "train.lr_decay": "cosine",          # cosine | none
    "train.clip_norm": 1.0,              # 0 disables gradient clipping
    "train.seed": 0,
    "output.dir": "out",
    "viz.store_scores": False,
    "eval.baseline": False,
    "sweep.retrain": False,
    "sweep.p_values": "0.65,0.75,0.85,0.95",
}


def _coerce(key: str, raw: str) -> object:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected integer, got {raw!r}") from None
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected float, got {raw!r}") from None
    return raw.strip()


class RunConfig:
    def __init__(self, values: dict[str, object] | None = None):
        self.values = dict(DEFAULTS)
        if values:
            for k, v in values.items():
                if k not in DEFAULTS:
                    raise ConfigError(f"unknown config key {k!r}")
                self.values[k] = v
        self._validate()

    def _validate(self):
        p = self.values["model.p"]
        if not (0.0 < p <= 1.0):
            raise ConfigError(f"model.p must lie in (0, 1], got {p}")
        if self.values["data.t_h"] < 1 or self.values["data.t_f"] < 1:
            raise ConfigError("data.t_h and data.t_f must be >= 1")
        if self.values["loss.min_scope"] not in ("per_step", "per_trajectory"):
            raise ConfigError("loss.min_scope must be per_step or per_trajectory")
        if self.values["train.lr_decay"] not in ("cosine", "none"):
            raise ConfigError("train.lr_decay must be cosine or none")

    def __getitem__(self, key: str):
        return self.values[key]

    def set(self, key: str, raw: str):
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = _coerce(key, raw)
        self._validate()

    def as_dict(self) -> dict[str, object]:
        return dict(self.values)


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            cfg.set(key.strip(), raw.strip())
    return cfg


def parse_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg.set(key.strip(), raw.strip())
    return cfg
