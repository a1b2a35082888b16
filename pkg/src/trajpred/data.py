"""Scene representation, text-format trajectory ingestion, normalization,
and synthetic scene generation.

The text format is one record per line, `frame_id agent_id x y`, whitespace
separated; ids may be stored as floats. Lines starting with `#` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Scene",
    "NormalizationState",
    "ParseError",
    "ConfigError",
    "load_ethucy_text",
    "normalize",
    "denormalize",
    "generate_synthetic",
]


class ParseError(ValueError):
    """Malformed trajectory file line."""


class ConfigError(ValueError):
    """Invalid generator or run configuration."""


@dataclass(frozen=True)
class Scene:
    """One observation window: M agents with T_h observed (and optionally T_f
    future) 2-D positions in meters. Immutable after construction."""

    agent_ids: tuple
    observed: np.ndarray            # (M, T_h, 2)
    future: np.ndarray | None = None  # (M, T_f, 2)
    frame_interval: float = 0.4
    scene_id: str = ""

    def __post_init__(self):
        obs = np.asarray(self.observed, dtype=np.float64)
        object.__setattr__(self, "observed", obs)
        if obs.ndim != 3 or obs.shape[2] != 2 or obs.shape[0] < 1:
            raise ValueError(f"observed must be (M, T_h, 2) with M >= 1, got {obs.shape}")
        if not np.all(np.isfinite(obs)):
            raise ValueError("observed positions must be finite")
        if self.future is not None:
            fut = np.asarray(self.future, dtype=np.float64)
            object.__setattr__(self, "future", fut)
            if fut.shape[0] != obs.shape[0] or fut.ndim != 3 or fut.shape[2] != 2:
                raise ValueError(
                    f"future shape {fut.shape} inconsistent with observed {obs.shape}"
                )
            if not np.all(np.isfinite(fut)):
                raise ValueError("future positions must be finite")
        obs.setflags(write=False)
        if self.future is not None:
            self.future.setflags(write=False)

    @property
    def num_agents(self) -> int:
        return self.observed.shape[0]

    @property
    def t_h(self) -> int:
        return self.observed.shape[1]

    @property
    def t_f(self) -> int:
        return 0 if self.future is None else self.future.shape[1]

    @property
    def last_observed(self) -> np.ndarray:
        """(M, 2) positions at the final observed frame."""
        return self.observed[:, -1, :]


@dataclass(frozen=True)
class NormalizationState:
    """Translation applied to a scene: centroid of agents at the last
    observed frame."""

    centroid: np.ndarray  # (2,)


def load_ethucy_text(path, observed_len: int, future_len: int, stride: int = 1) -> list[Scene]:
    """Slide windows of observed_len + future_len frames over a trajectory
    file; keep only agents present in every frame of the window, and drop
    windows that end up empty.
    """
    if observed_len < 1 or future_len < 0 or stride < 1:
        raise ConfigError("observed_len >= 1, future_len >= 0, stride >= 1 required")
    # frame -> {agent: (x, y)}
    frames: dict[int, dict[int, tuple[float, float]]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            try:
                frame = int(float(parts[0]))
                agent = int(float(parts[1]))
                x, y = float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            frames.setdefault(frame, {})[agent] = (x, y)

    frame_ids = sorted(frames)
    window = observed_len + future_len
    scenes: list[Scene] = []
    for start in range(0, len(frame_ids) - window + 1, stride):
        ids = frame_ids[start:start + window]
        present = set(frames[ids[0]])
        for f in ids[1:]:
            present &= set(frames[f])
        if not present:
            continue
        agents = sorted(present)
        traj = np.array(
            [[frames[f][a] for f in ids] for a in agents], dtype=np.float64
        )  # (M, window, 2)
        scenes.append(Scene(
            agent_ids=tuple(agents),
            observed=traj[:, :observed_len],
            future=traj[:, observed_len:] if future_len else None,
            scene_id=f"w{start}",
        ))
    return scenes


def normalize(scene: Scene) -> tuple[Scene, NormalizationState]:
    """Translate the scene so the agent centroid at the last observed frame
    sits at the origin. Pairwise geometry is untouched."""
    centroid = scene.last_observed.mean(axis=0)
    shifted = Scene(
        agent_ids=scene.agent_ids,
        observed=scene.observed - centroid,
        future=None if scene.future is None else scene.future - centroid,
        frame_interval=scene.frame_interval,
        scene_id=scene.scene_id,
    )
    return shifted, NormalizationState(centroid=centroid.copy())


def denormalize(scene: Scene, state: NormalizationState) -> Scene:
    return Scene(
        agent_ids=scene.agent_ids,
        observed=scene.observed + state.centroid,
        future=None if scene.future is None else scene.future + state.centroid,
        frame_interval=scene.frame_interval,
        scene_id=scene.scene_id,
    )


def generate_synthetic(kind: str, m: int, t_h: int, t_f: int, seed: int) -> Scene:
    """Synthetic scenes used as learnability oracles.

    constant_velocity: p(t) = p0 + v t, random p0 and v per agent.
    crossing: pairs on intersecting paths whose closest approach (< 0.5 m)
        lands inside the observed window; each agent swerves around the
        encounter and swings back across its nominal line a fixed number of
        steps later, inside the future window.
    group: one shared velocity plus small per-agent jitter (sigma 0.05 m).
    """
    if m < 1:
        raise ConfigError("m must be >= 1")
    rng = np.random.default_rng(seed)
    if kind == "constant_velocity":
        traj = _constant_velocity(rng, m, t_h + t_f)
    elif kind == "crossing":
        if m < 2:
            raise ConfigError("crossing requires m >= 2")
        traj = _crossing(rng, m, t_h, t_f)
    elif kind == "group":
        traj = _group(rng, m, t_h + t_f)
    else:
        raise ConfigError(f"unknown synthetic kind {kind!r}")
    return Scene(
        agent_ids=tuple(range(m)),
        observed=traj[:, :t_h],
        future=traj[:, t_h:] if t_f else None,
        scene_id=f"{kind}-{seed}",
    )


def _constant_velocity(rng, m: int, total: int) -> np.ndarray:
    p0 = rng.uniform(-5.0, 5.0, size=(m, 2))
    v = rng.uniform(-1.0, 1.0, size=(m, 2))
    t = np.arange(total, dtype=np.float64)
    return p0[:, None, :] + v[:, None, :] * t[None, :, None]


def _crossing(rng, m: int, t_h: int, t_f: int) -> np.ndarray:
    """Agents in pairs whose straight nominal paths intersect inside the
    observed window. Each agent swerves laterally around the encounter
    (closest approach ~0.4 m at the crossing step) and then, a fixed number
    of steps later -- inside the future window -- swings back across its
    nominal line in a larger corrective lobe. The correction's timing is
    tied to the crossing step, so predicting the future well requires
    locating the encounter in time, not just extrapolating the last
    observed velocity."""
    total = t_h + t_f
    t = np.arange(total, dtype=np.float64)
    traj = np.zeros((m, total, 2))
    for base in range(0, m - 1, 2):
        # nominal crossing point, time, and headings for this pair; the
        # window is framed so encounters sit near the scene center late in
        # the observed segment, as a tracker following the interaction would
        cross_pt = rng.uniform(-1.0, 1.0, size=2)
        # integer crossing step so the closest approach is actually sampled
        t_c = float(rng.integers(max(1, t_h - 3), t_h - 1))
        theta = rng.uniform(0.0, 2.0 * np.pi)
        dtheta = rng.uniform(np.pi / 3.0, 2.0 * np.pi / 3.0)
        speed = rng.uniform(0.6, 1.2, size=2)
        for k, ang in enumerate((theta, theta + dtheta)):
            direction = np.array([np.cos(ang), np.sin(ang)])
            lateral = np.array([-direction[1], direction[0]])
            nominal = cross_pt[None, :] + direction[None, :] * (
                speed[k] * (t - t_c)
            )[:, None]
            side = 1.0 if k == 0 else -1.0
            avoid = 0.2 * np.exp(-0.5 * ((t - t_c) / 1.5) ** 2)
            correct = 0.5 * np.exp(-0.5 * ((t - t_c - 6.0) / 1.5) ** 2)
            traj[base + k] = nominal + side * (avoid - correct)[:, None] * lateral[None, :]
    if m % 2 == 1:
        # odd agent walks straight, away from the action
        p0 = rng.uniform(5.0, 8.0, size=2)
        v = rng.uniform(-1.0, 1.0, size=2)
        traj[m - 1] = p0[None, :] + v[None, :] * t[:, None]
    return traj


def _group(rng, m: int, total: int) -> np.ndarray:
    v = rng.uniform(-1.0, 1.0, size=2)
    p0 = rng.uniform(-2.0, 2.0, size=(m, 2))
    t = np.arange(total, dtype=np.float64)
    base = p0[:, None, :] + v[None, None, :] * t[None, :, None]
    return base + rng.normal(0.0, 0.05, size=base.shape)
