"""Pixel-space wrapper for the tabular environment.

Each causal variable owns a pixel in an 8x8 RGB frame: active variables
are drawn white, observed perturbation flags are drawn into the red
channel at the same locations. The sharp frame is Gaussian-blurred and
then mixed 50-50 with the previously emitted frame, so activity smears
in both space and time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tabular import (
    ExogenousDraw,
    Setting,
    TabularEnv,
    TabularParams,
    TabularState,
)


@dataclass(frozen=True)
class VisualParams:
    node_coords: tuple = ((1, 1), (4, 4), (6, 1))
    blur_sigma: float = 1.0
    mix: float = 0.5
    size: int = 8

    def __post_init__(self) -> None:
        if len(set(self.node_coords)) != len(self.node_coords):
            raise ValueError("node coordinates must be distinct")
        for r, c in self.node_coords:
            if not (0 <= r < self.size and 0 <= c < self.size):
                raise ValueError(f"node coordinate ({r}, {c}) out of bounds")
        if not 0.0 <= self.mix <= 1.0:
            raise ValueError("mix must be in [0, 1]")
        if self.blur_sigma <= 0:
            raise ValueError("blur_sigma must be positive")


GO_CUE_PIXEL = (0, 0)  # green channel, shown at the response step


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian, truncated at radius ceil(3*sigma)."""
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(frame: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with mirrored (half-sample symmetric) edges.

    This reflection duplicates the edge sample, which is what keeps the
    total channel mass exactly preserved for a normalized kernel.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    k = gaussian_kernel(sigma)
    r = (len(k) - 1) // 2
    out = np.asarray(frame, dtype=np.float64)
    for axis in (0, 1):
        pad = [(0, 0)] * out.ndim
        pad[axis] = (r, r)
        padded = np.pad(out, pad, mode="symmetric")
        out = np.apply_along_axis(
            lambda v: np.convolve(v, k, mode="valid"), axis, padded
        )
    return np.clip(out, 0.0, 1.0)


def temporal_mix(prev: np.ndarray, cur: np.ndarray, mix: float) -> np.ndarray:
    if prev.shape != cur.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {cur.shape}")
    return mix * prev + (1.0 - mix) * cur


def render_sharp(
    state: TabularState,
    exo: ExogenousDraw,
    setting: Setting,
    params: VisualParams,
    go: bool = False,
) -> np.ndarray:
    """Draw the un-blurred frame for the current step.

    Only the off-policy setting shows the perturbation flags; the
    on-policy agent already knows its own interventions.
    """
    frame = np.zeros((params.size, params.size, 3))
    for i, (r, c) in enumerate(params.node_coords):
        if state.s[i]:
            frame[r, c, :] = 1.0
    if setting is Setting.OFFPOLICY:
        # Flags are additive: an intervened node always fires, so its pixel
        # reads red=2 against white=1 — that excess is the visible flag.
        for i, zi in enumerate(exo.z):
            if zi:
                r, c = params.node_coords[i + 1]
                frame[r, c, 0] += 1.0
    if go:
        frame[GO_CUE_PIXEL[0], GO_CUE_PIXEL[1], 1] = 1.0
    return frame


class VisualEnv:
    """Tabular episode protocol with blurred, temporally mixed pixel output.

    Blur is linear, so the blurred sharp frame is composed from
    precomputed blurred point templates instead of re-convolving every
    step; the result is identical to gaussian_blur(render_sharp(...)).
    """

    def __init__(
        self,
        params: TabularParams,
        setting: Setting,
        visual: VisualParams | None = None,
    ):
        self.visual = visual if visual is not None else VisualParams()
        self._tab = TabularEnv(params, setting)
        self.params = params
        self.setting = setting
        self.n_actions = self._tab.n_actions
        self.obs_dim = self.visual.size * self.visual.size * 3
        self._templates = self._build_templates()

    @property
    def episode_len(self) -> int:
        return self._tab.episode_len

    @property
    def model(self):
        return self._tab.model

    def _build_templates(self) -> dict:
        size, sigma = self.visual.size, self.visual.blur_sigma

        def blob(r, c):
            impulse = np.zeros((size, size))
            impulse[r, c] = 1.0
            return gaussian_blur(impulse, sigma)

        templates = {
            "node": [blob(r, c) for r, c in self.visual.node_coords],
            "go": blob(*GO_CUE_PIXEL),
        }
        return templates

    def _blurred_frame(self) -> np.ndarray:
        state = self._tab._state
        exo = self._tab._last_exo
        go = (
            self.setting is Setting.ONPOLICY
            and self._tab._step_idx == self.params.n_steps + 1
        )
        frame = np.zeros((self.visual.size, self.visual.size, 3))
        for i, blob in enumerate(self._templates["node"]):
            if state.s[i]:
                frame += blob[:, :, None]
            if self.setting is Setting.OFFPOLICY and i >= 1 and exo.z[i - 1]:
                frame[:, :, 0] += blob
        if go:
            frame[:, :, 1] += self._templates["go"]
        return np.clip(frame, 0.0, 1.0)

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._tab.reset(rng)
        blurred = self._blurred_frame()
        self._frame = temporal_mix(np.zeros_like(blurred), blurred, self.visual.mix)
        return self._frame

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        _, reward, done = self._tab.step(action)
        blurred = self._blurred_frame()
        self._frame = temporal_mix(self._frame, blurred, self.visual.mix)
        return self._frame, reward, done
