"""Episode collection, ADAM updates and the asynchronous training loop.

Workers snapshot the shared parameters, collect one episode, compute the
full-episode gradient, and hand it to a serialized update path. With one
worker the whole loop is exactly deterministic per seed.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field

import numpy as np

from .net import (
    EpisodeRollout,
    GradSet,
    HiddenState,
    LossWeights,
    NetConfig,
    ParamSet,
    backward_episode,
    encode_input,
    forward_step,
    init_params,
    sample_action,
    softmax,
)

log = logging.getLogger(__name__)


def compute_returns(rewards, discount: float) -> np.ndarray:
    """Discounted suffix sums, no bootstrap past the terminal step."""
    out = np.zeros(len(rewards))
    acc = 0.0
    for t in reversed(range(len(rewards))):
        acc = rewards[t] + discount * acc
        out[t] = acc
    return out


def collect_episode(
    env, params: ParamSet, config: NetConfig, rng: np.random.Generator,
    discount: float,
) -> EpisodeRollout:
    """Run the policy through one episode, recording everything backprop needs.

    The recurrent state starts at zero each trial: within-trial adaptation
    lives in the hidden state, cross-trial learning only in the weights.
    """
    rollout = EpisodeRollout()
    hidden = HiddenState.zeros(config.lstm_units)
    obs = env.reset(rng)
    prev_action: int | None = None
    prev_reward = 0.0
    done = False
    while not done:
        x, fc_input, fc_pre = encode_input(params, config, obs, prev_action, prev_reward)
        logits, value, hidden, cache = forward_step(params, config, x, hidden)
        cache.fc_input, cache.fc_pre = fc_input, fc_pre
        action, logp, probs = sample_action(logits, rng)

        rollout.observations.append(obs)
        rollout.prev_actions.append(prev_action)
        rollout.prev_rewards.append(prev_reward)
        rollout.actions.append(action)
        rollout.log_probs.append(logp)
        rollout.dists.append(probs)
        rollout.values.append(value)
        rollout.caches.append(cache)

        obs, reward, done = env.step(action)
        rollout.rewards.append(reward)
        prev_action, prev_reward = action, reward

    rollout.returns = compute_returns(rollout.rewards, discount)
    rollout.frozen_adv = rollout.returns - np.asarray(rollout.values)
    return rollout


@dataclass
class AdamState:
    m: GradSet
    v: GradSet
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ParamSet) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_update(
    params: ParamSet,
    grads: GradSet,
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-7,
) -> bool:
    """Bias-corrected ADAM step in place; returns False on non-finite grads.

    A non-finite gradient skips the update entirely (counter untouched)
    and logs a diagnostic instead of corrupting the parameters.
    """
    for k in params:
        if not np.all(np.isfinite(grads[k])):
            log.warning("non-finite gradient in %s; update skipped", k)
            return False
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for k in params:
        g = grads[k]
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        params[k] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return True


def clip_grads(grads: GradSet, max_norm: float) -> GradSet:
    """Global-norm clipping, used only when a config asks for it."""
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        return {k: g * scale for k, g in grads.items()}
    return grads


@dataclass
class TrainResult:
    params: ParamSet
    curve: list = field(default_factory=list)  # (trial index, episode reward)
    config: NetConfig | None = None


def train(
    env_factory,
    config: NetConfig,
    weights: LossWeights,
    n_trials: int,
    seed: int,
    n_workers: int = 1,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-7,
    clip_norm: float | None = None,
    curve_callback=None,
) -> TrainResult:
    """A3C-style training: shared parameters, per-episode gradient updates.

    env_factory(worker_index) builds a fresh environment per worker. Each
    worker owns its own RNG stream; gradients are applied under a lock so
    parameter updates are never torn. One worker is bit-deterministic.
    """
    root = np.random.default_rng(seed)
    params = init_params(root, config)
    adam = AdamState.zeros_like(params)
    lock = threading.Lock()
    curve: list = []
    trial_counter = [0]
    errors: list = []

    def worker(widx: int) -> None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(widx,)))
        env = env_factory(widx)
        try:
            while True:
                with lock:
                    if trial_counter[0] >= n_trials:
                        return
                    snapshot = {k: v.copy() for k, v in params.items()}
                rollout = collect_episode(env, snapshot, config, rng, weights.discount)
                grads = backward_episode(snapshot, config, rollout, weights)
                if clip_norm is not None:
                    grads = clip_grads(grads, clip_norm)
                with lock:
                    if trial_counter[0] >= n_trials:
                        return
                    adam_update(params, grads, adam, lr, beta1, beta2, eps)
                    idx = trial_counter[0]
                    trial_counter[0] += 1
                    record = (idx, rollout.total_reward)
                    curve.append(record)
                    if curve_callback is not None:
                        curve_callback(record)
        except Exception as exc:  # pragma: no cover - surfaced to the caller
            errors.append(exc)

    if n_workers == 1:
        worker(0)
    else:
        threads = [threading.Thread(target=worker, args=(w,)) for w in range(n_workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
    if errors:
        raise RuntimeError(f"worker failed after {len(curve)} trials") from errors[0]
    return TrainResult(params=params, curve=curve, config=config)


def evaluate(
    env_factory,
    params: ParamSet,
    config: NetConfig,
    n_trials: int,
    rng: np.random.Generator,
    mode: str = "sample",
) -> tuple[float, float]:
    """Frozen-parameter evaluation; returns (mean episode reward, SE)."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if mode not in ("sample", "argmax"):
        raise ValueError(f"unknown mode {mode!r}")
    env = env_factory(0)
    totals = np.zeros(n_trials)
    for k in range(n_trials):
        hidden = HiddenState.zeros(config.lstm_units)
        obs = env.reset(rng)
        prev_action: int | None = None
        prev_reward = 0.0
        done = False
        total = 0.0
        while not done:
            x, _, _ = encode_input(params, config, obs, prev_action, prev_reward)
            logits, _, hidden, _ = forward_step(params, config, x, hidden)
            if mode == "argmax":
                action = int(np.argmax(logits))
            else:
                action, _, _ = sample_action(logits, rng)
            obs, reward, done = env.step(action)
            total += reward
            prev_action, prev_reward = action, reward
        totals[k] = total
    mean = float(totals.mean())
    se = float(totals.std(ddof=1) / np.sqrt(n_trials)) if n_trials > 1 else 0.0
    return mean, se
