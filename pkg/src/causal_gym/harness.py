"""Run management: configs, curve logging, aggregation and file formats.

Everything an experiment leaves on disk goes through this module: JSON
run configs, per-run curve CSVs, cross-seed aggregates (mean +/- SE on a
common trial grid), binary PPM frame dumps, a minimal SVG curve plot and
flat-array parameter checkpoints.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .escape import EscapeEnv, EscapeParams
from .net import LossWeights, NetConfig, ParamSet
from .tabular import Setting, TabularEnv, TabularParams
from .visual import VisualEnv, VisualParams

SMOOTH_WINDOW = 1000
GRID_STRIDE = 100

OUT_ENV_VAR = "CAUSAL_GYM_OUT"


@dataclass
class RunConfig:
    """Flat bag of every knob a run needs; defaults follow the experiment record."""

    env: str = "tabular"              # tabular | visual | escape
    setting: str | None = None        # confounded | observational | offpolicy | onpolicy

    # Tabular dynamics.
    n_steps: int = 10
    p1: float = 0.1
    p2: float = 0.01
    p3: float = 0.01
    p2_int: float = 0.1
    p3_int: float = 0.1
    p_chain: float = 0.5

    # Visual wrapper.
    blur_sigma: float = 1.0
    mix: float = 0.5

    # Escape room.
    n_obs: int = 20
    n_act: int = 10
    door_open_steps: int = 5
    reward_door: float = 10.0

    # Network.
    lstm_units: int = 48
    fc_units: int = 64

    # Loss and optimizer.
    baseline_weight: float = 0.05
    entropy_weight: float = 0.05
    discount: float = 0.9
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-7
    clip_norm: float | None = None

    # Run shape.
    trials: int = 50000
    seeds: list[int] = field(default_factory=lambda: [0])
    workers: int = 1
    out_dir: str | None = None
    trace_trials: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.env not in ("tabular", "visual", "escape"):
            raise ValueError(f"unknown env {self.env!r}")
        if self.env == "escape":
            if self.setting is not None:
                raise ValueError("setting is only meaningful for tabular/visual envs")
        else:
            if self.setting is None:
                raise ValueError(f"env {self.env!r} requires a setting")
            Setting(self.setting)  # raises on an unknown name
        if self.out_dir is None:
            self.out_dir = os.environ.get(OUT_ENV_VAR, "runs")

    @property
    def setting_enum(self) -> Setting | None:
        return None if self.setting is None else Setting(self.setting)

    def tabular_params(self) -> TabularParams:
        return TabularParams(
            p1=self.p1, p2=self.p2, p3=self.p3,
            p2_int=self.p2_int, p3_int=self.p3_int,
            n_steps=self.n_steps, p_chain=self.p_chain,
        )

    def escape_params(self) -> EscapeParams:
        return EscapeParams(
            n_obs=self.n_obs, n_act=self.n_act,
            door_open_steps=self.door_open_steps, reward_door=self.reward_door,
        )

    def make_env(self):
        if self.env == "tabular":
            return TabularEnv(self.tabular_params(), self.setting_enum)
        if self.env == "visual":
            return VisualEnv(
                self.tabular_params(), self.setting_enum,
                VisualParams(blur_sigma=self.blur_sigma, mix=self.mix),
            )
        return EscapeEnv(self.escape_params())

    def net_config(self) -> NetConfig:
        env = self.make_env()
        return NetConfig(
            obs_dim=env.obs_dim,
            n_actions=env.n_actions,
            lstm_units=self.lstm_units,
            fc_units=self.fc_units,
            use_fc=self.env in ("visual", "escape"),
        )

    def loss_weights(self) -> LossWeights:
        return LossWeights(
            baseline_weight=self.baseline_weight,
            entropy_weight=self.entropy_weight,
            discount=self.discount,
        )


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - set(_FIELD_TYPES)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**data)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    return config_from_dict(json.loads(path.read_text()))


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dataclasses.asdict(config), indent=2) + "\n")


# ---------------------------------------------------------------------------
# Curves.

def trailing_means(rewards, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Mean of the last `window` entries at every index (shorter at the start)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(rewards)])
    out = np.empty(len(rewards))
    for k in range(len(rewards)):
        lo = max(0, k + 1 - window)
        out[k] = (csum[k + 1] - csum[lo]) / (k + 1 - lo)
    return out


def write_curve_csv(path: str | Path, curve, window: int = SMOOTH_WINDOW) -> None:
    """Per-run CSV: trial,reward,trailing_mean (LF line endings, C locale)."""
    rewards = [r for _, r in curve]
    smooth = trailing_means(rewards, window)
    lines = ["trial,reward,trailing_mean"]
    for (trial, reward), tm in zip(curve, smooth):
        lines.append(f"{trial},{reward:.10g},{tm:.10g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = Path(path).read_text().strip().split("\n")[1:]
    data = np.array([[float(v) for v in row.split(",")] for row in rows])
    return data[:, 0].astype(int), data[:, 1], data[:, 2]


def aggregate_curves(
    curves: list[tuple[np.ndarray, np.ndarray]], stride: int = GRID_STRIDE
) -> list[tuple[int, float, float]]:
    """Cross-run mean and standard error on a common trial grid.

    Each curve is (trial indices, smoothed values). Values are carried to
    grid points by step-function interpolation (last value at or before
    the grid trial). Returns rows (trial, mean, se).
    """
    if not curves:
        raise ValueError("need at least one run")
    max_common = min(int(t[-1]) for t, _ in curves)
    rows = []
    for g in range(stride, max_common + 1, stride):
        vals = []
        for trials, smooth in curves:
            k = int(np.searchsorted(trials, g, side="right")) - 1
            vals.append(smooth[k])
        vals = np.asarray(vals)
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rows.append((g, mean, se))
    return rows


def write_aggregate_csv(path: str | Path, rows) -> None:
    lines = ["trial,mean,se"]
    for trial, mean, se in rows:
        lines.append(f"{trial},{mean:.10g},{se:.10g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_curve_svg(path: str | Path, rows, title: str = "") -> None:
    """Single-file SVG of the aggregate mean with a +/- SE band."""
    width, height, margin = 640, 400, 50
    xs = [r[0] for r in rows]
    means = [r[1] for r in rows]
    ses = [r[2] for r in rows]
    if not xs:
        raise ValueError("nothing to plot")
    lo = min(m - s for m, s in zip(means, ses))
    hi = max(m + s for m, s in zip(means, ses))
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = xs[0], xs[-1] if xs[-1] > xs[0] else xs[0] + 1

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - lo) / (hi - lo) * (height - 2 * margin)

    band = [f"{sx(x):.1f},{sy(m + s):.1f}" for x, m, s in rows]
    band += [f"{sx(x):.1f},{sy(m - s):.1f}" for x, m, s in reversed(rows)]
    line = " ".join(f"{sx(x):.1f},{sy(m):.1f}" for x, m, _ in rows)
    svg = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polygon points="{" ".join(band)}" fill="#9ecae1" opacity="0.6"/>',
        f'<polyline points="{line}" fill="none" stroke="#08519c" stroke-width="1.5"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{margin}" y="{height - margin + 20}" font-size="11">{x0}</text>',
        f'<text x="{width - margin}" y="{height - margin + 20}" text-anchor="end" font-size="11">{x1}</text>',
        f'<text x="{margin - 5}" y="{sy(lo):.0f}" text-anchor="end" font-size="11">{lo:.2f}</text>',
        f'<text x="{margin - 5}" y="{sy(hi):.0f}" text-anchor="end" font-size="11">{hi:.2f}</text>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(svg) + "\n")


# ---------------------------------------------------------------------------
# PPM frames.

def frame_to_ppm_bytes(frame: np.ndarray) -> bytes:
    """Binary P6 with 8-bit quantization by rounding."""
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("expected an HxWx3 frame")
    h, w, _ = frame.shape
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    body = np.rint(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8).tobytes()
    return header + body


def write_ppm(path: str | Path, frame: np.ndarray) -> None:
    Path(path).write_bytes(frame_to_ppm_bytes(frame))


# ---------------------------------------------------------------------------
# Checkpoints: flat little-endian float64 array plus a JSON shape manifest.

def save_checkpoint(params: ParamSet, path: str | Path) -> None:
    path = Path(path)
    names = sorted(params)
    flat = np.concatenate([params[n].ravel() for n in names])
    path.write_bytes(flat.astype("<f8").tobytes())
    manifest = {n: list(params[n].shape) for n in names}
    path.with_suffix(".json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_checkpoint(path: str | Path) -> ParamSet:
    path = Path(path)
    manifest = json.loads(path.with_suffix(".json").read_text())
    flat = np.frombuffer(path.read_bytes(), dtype="<f8")
    params: ParamSet = {}
    offset = 0
    for name in sorted(manifest):
        shape = tuple(manifest[name])
        size = int(np.prod(shape)) if shape else 1
        params[name] = flat[offset : offset + size].reshape(shape).copy()
        offset += size
    if offset != flat.size:
        raise ValueError("checkpoint size does not match its manifest")
    return params


# ---------------------------------------------------------------------------
# Trace recording.

class TraceRecordingEnv:
    """Wraps an env and dumps selected trials' steps to .npz files.

    Only meaningful with a single worker (episode index must equal the
    global trial index).
    """

    def __init__(self, env, trial_indices, out_dir: str | Path):
        self._env = env
        self._record = set(trial_indices)
        self._dir = Path(out_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._episode = -1
        self.n_actions = env.n_actions
        self.obs_dim = env.obs_dim

    @property
    def episode_len(self):
        return self._env.episode_len

    def reset(self, rng):
        self._flush()
        self._episode += 1
        obs = self._env.reset(rng)
        self._obs, self._actions, self._rewards = [obs], [], []
        return obs

    def step(self, action):
        obs, reward, done = self._env.step(action)
        if self._episode in self._record:
            self._obs.append(obs)
            self._actions.append(action)
            self._rewards.append(reward)
        if done:
            self._flush()
        return obs, reward, done

    def _flush(self):
        if getattr(self, "_obs", None) and self._episode in self._record:
            np.savez(
                self._dir / f"trial_{self._episode}.npz",
                observations=np.asarray(self._obs),
                actions=np.asarray(self._actions),
                rewards=np.asarray(self._rewards),
            )
            self._obs = []


def render_trace(run_dir: str | Path, trial: int, out_dir: str | Path | None = None) -> list[Path]:
    """Expand a recorded trial into numbered PPM frames plus a text summary.

    Vector (tabular) traces get only the text table; frame traces get one
    PPM per step. Returns the paths written.
    """
    run_dir = Path(run_dir)
    trace_path = run_dir / "traces" / f"trial_{trial}.npz"
    if not trace_path.exists():
        raise FileNotFoundError(
            f"no recorded trace for trial {trial}; was trace recording enabled?"
        )
    out_dir = Path(out_dir) if out_dir is not None else run_dir / f"trace_{trial}"
    out_dir.mkdir(parents=True, exist_ok=True)
    data = np.load(trace_path)
    obs, actions, rewards = data["observations"], data["actions"], data["rewards"]

    written = []
    lines = [f"trial {trial}: {len(actions)} steps, total reward {rewards.sum():g}"]
    for t in range(len(obs)):
        if obs.ndim == 4:  # frames
            p = out_dir / f"step_{t:03d}.ppm"
            write_ppm(p, obs[t])
            written.append(p)
            desc = f"frame {obs.shape[1]}x{obs.shape[2]}"
        else:
            desc = "obs " + " ".join(f"{v:g}" for v in obs[t])
        act = f" action {actions[t - 1]} reward {rewards[t - 1]:g}" if t > 0 else ""
        lines.append(f"t={t:3d} {desc}{act}")
    summary = out_dir / "summary.txt"
    summary.write_text("\n".join(lines) + "\n")
    written.append(summary)
    return written
