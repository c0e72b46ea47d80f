"""Recurrent policy/value network with hand-derived gradients.

Architecture: (optional FC+ReLU image encoder) -> LSTM -> linear logits
head + linear scalar baseline head. The input at each step is the
observation (or its encoding) concatenated with a one-hot of the previous
action and the previous reward.

No autodiff anywhere: the backward pass is written out for exactly this
architecture and verified against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ParamSet = dict[str, np.ndarray]
GradSet = dict[str, np.ndarray]


@dataclass(frozen=True)
class NetConfig:
    obs_dim: int
    n_actions: int
    lstm_units: int = 48
    fc_units: int = 64
    use_fc: bool = False

    @property
    def encoded_dim(self) -> int:
        return self.fc_units if self.use_fc else self.obs_dim

    @property
    def input_dim(self) -> int:
        return self.encoded_dim + self.n_actions + 1


@dataclass(frozen=True)
class LossWeights:
    baseline_weight: float = 0.05
    entropy_weight: float = 0.05
    discount: float = 0.9


@dataclass
class HiddenState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, n_units: int) -> "HiddenState":
        return cls(h=np.zeros(n_units), c=np.zeros(n_units))


@dataclass
class StepCache:
    """Intermediates of one forward step, enough for exact backprop."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray
    fc_input: np.ndarray | None = None   # flattened image, when use_fc
    fc_pre: np.ndarray | None = None     # FC pre-activation, when use_fc


@dataclass
class EpisodeRollout:
    """Everything recorded while running the policy through one episode."""

    observations: list = field(default_factory=list)  # raw obs (vector or frame)
    prev_actions: list = field(default_factory=list)  # int or None at t=0
    prev_rewards: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    log_probs: list = field(default_factory=list)
    dists: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    values: list = field(default_factory=list)
    caches: list = field(default_factory=list)
    returns: np.ndarray | None = None
    frozen_adv: np.ndarray | None = None  # advantages treated as constants

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))


def init_params(rng: np.random.Generator, config: NetConfig) -> ParamSet:
    """Uniform fan-in-scaled weights, zero biases, forget-gate bias 1."""
    H, D = config.lstm_units, config.input_dim

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    params: ParamSet = {
        "w_x": uniform((4 * H, D), D),
        "w_h": uniform((4 * H, H), H),
        "b": np.zeros(4 * H),
        "w_pi": uniform((config.n_actions, H), H),
        "b_pi": np.zeros(config.n_actions),
        "w_v": uniform((1, H), H),
        "b_v": np.zeros(1),
    }
    params["b"][H : 2 * H] = 1.0
    if config.use_fc:
        params["w_fc"] = uniform((config.fc_units, config.obs_dim), config.obs_dim)
        params["b_fc"] = np.zeros(config.fc_units)
    return params


def zero_grads(params: ParamSet) -> GradSet:
    return {k: np.zeros_like(v) for k, v in params.items()}


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def encode_input(
    params: ParamSet,
    config: NetConfig,
    obs: np.ndarray,
    prev_action: int | None,
    prev_reward: float,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Build the LSTM input vector; returns (x, fc_input, fc_pre).

    At the first step of a trial there is no previous action or reward:
    the one-hot block is all zeros and the reward slot is 0.
    """
    flat = np.asarray(obs, dtype=np.float64).ravel()
    fc_input = fc_pre = None
    if config.use_fc:
        if flat.shape[0] != config.obs_dim:
            raise ValueError(f"expected flattened obs of length {config.obs_dim}")
        fc_input = flat
        fc_pre = params["w_fc"] @ flat + params["b_fc"]
        encoded = np.maximum(fc_pre, 0.0)
    else:
        if flat.shape[0] != config.obs_dim:
            raise ValueError(f"expected obs of length {config.obs_dim}")
        encoded = flat

    one_hot = np.zeros(config.n_actions)
    if prev_action is not None:
        one_hot[prev_action] = 1.0
    x = np.concatenate([encoded, one_hot, [prev_reward]])
    return x, fc_input, fc_pre


def forward_step(
    params: ParamSet, config: NetConfig, x: np.ndarray, hidden: HiddenState
) -> tuple[np.ndarray, float, HiddenState, StepCache]:
    """One LSTM step plus both heads. Returns (logits, baseline, hidden', cache)."""
    H = config.lstm_units
    z = params["w_x"] @ x + params["w_h"] @ hidden.h + params["b"]
    i = _sigmoid(z[0:H])
    f = _sigmoid(z[H : 2 * H])
    g = np.tanh(z[2 * H : 3 * H])
    o = _sigmoid(z[3 * H : 4 * H])
    c = f * hidden.c + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c

    logits = params["w_pi"] @ h + params["b_pi"]
    baseline = (params["w_v"] @ h + params["b_v"])[0]  # numpy scalar, keeps dtype
    cache = StepCache(
        x=x, h_prev=hidden.h, c_prev=hidden.c,
        i=i, f=f, g=g, o=o, c=c, tanh_c=tanh_c, h=h,
    )
    return logits, baseline, HiddenState(h=h, c=c), cache


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / e.sum()


def sample_action(
    logits: np.ndarray, rng: np.random.Generator
) -> tuple[int, float, np.ndarray]:
    """Categorical sample from softmax(logits); also returns the distribution."""
    probs = softmax(logits)
    a = int(rng.choice(len(probs), p=probs / probs.sum()))
    return a, float(np.log(probs[a])), probs


def policy_entropy(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    return -(p * np.log(p)).sum()


def episode_loss(
    params: ParamSet,
    config: NetConfig,
    rollout: EpisodeRollout,
    weights: LossWeights,
) -> float:
    """Scalar training loss, recomputed from raw inputs.

    sum_t [ -log pi(a_t) * adv_t - beta_e * H(pi_t) ]
      + w_b * sum_t (R_t - V_t)^2

    The policy-term advantages are the frozen constants stored on the
    rollout (the baseline is not differentiated through the policy term),
    which makes this a smooth function of the parameters suitable for
    finite differencing.
    """
    if rollout.frozen_adv is None or rollout.returns is None:
        raise ValueError("rollout must carry returns and frozen advantages")
    hidden = HiddenState.zeros(config.lstm_units)
    loss = 0.0
    for t in range(len(rollout)):
        x, _, _ = encode_input(
            params, config, rollout.observations[t],
            rollout.prev_actions[t], rollout.prev_rewards[t],
        )
        logits, value, hidden, _ = forward_step(params, config, x, hidden)
        probs = softmax(logits)
        a = rollout.actions[t]
        loss += -np.log(probs[a]) * rollout.frozen_adv[t]
        loss -= weights.entropy_weight * policy_entropy(probs)
        loss += weights.baseline_weight * (rollout.returns[t] - value) ** 2
    # Native numpy scalar: finite differencing may run this in extended
    # precision, and a float() here would throw that precision away.
    return loss


def backward_episode(
    params: ParamSet,
    config: NetConfig,
    rollout: EpisodeRollout,
    weights: LossWeights,
) -> GradSet:
    """Exact gradient of episode_loss via BPTT over the stored caches."""
    if rollout.returns is None or rollout.frozen_adv is None:
        raise ValueError("rollout must carry returns and frozen advantages")
    if len(rollout.caches) != len(rollout):
        raise ValueError("rollout is missing step caches")

    H = config.lstm_units
    grads = zero_grads(params)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)

    for t in reversed(range(len(rollout))):
        cache: StepCache = rollout.caches[t]
        probs = rollout.dists[t]
        a = rollout.actions[t]

        # Heads.
        dlogits = rollout.frozen_adv[t] * probs.copy()
        dlogits[a] -= rollout.frozen_adv[t]
        if weights.entropy_weight != 0.0:
            ent = policy_entropy(probs)
            with np.errstate(divide="ignore", invalid="ignore"):
                logp = np.where(probs > 0, np.log(np.maximum(probs, 1e-300)), 0.0)
            dlogits += weights.entropy_weight * probs * (logp + ent)
        dvalue = -2.0 * weights.baseline_weight * (rollout.returns[t] - rollout.values[t])

        grads["w_pi"] += np.outer(dlogits, cache.h)
        grads["b_pi"] += dlogits
        grads["w_v"] += dvalue * cache.h[None, :]
        grads["b_v"] += dvalue

        dh = params["w_pi"].T @ dlogits + dvalue * params["w_v"][0] + dh_next
        dc = dc_next + dh * cache.o * (1.0 - cache.tanh_c**2)

        do = dh * cache.tanh_c
        di = dc * cache.g
        dg = dc * cache.i
        df = dc * cache.c_prev
        dc_next = dc * cache.f

        dz = np.empty(4 * H)
        dz[0:H] = di * cache.i * (1.0 - cache.i)
        dz[H : 2 * H] = df * cache.f * (1.0 - cache.f)
        dz[2 * H : 3 * H] = dg * (1.0 - cache.g**2)
        dz[3 * H : 4 * H] = do * cache.o * (1.0 - cache.o)

        grads["w_x"] += np.outer(dz, cache.x)
        grads["w_h"] += np.outer(dz, cache.h_prev)
        grads["b"] += dz
        dh_next = params["w_h"].T @ dz

        if config.use_fc:
            dx = params["w_x"].T @ dz
            d_enc = dx[: config.fc_units]
            dpre = d_enc * (cache.fc_pre > 0)
            grads["w_fc"] += np.outer(dpre, cache.fc_input)
            grads["b_fc"] += dpre

    return grads


def grad_check(
    params: ParamSet,
    config: NetConfig,
    rollout: EpisodeRollout,
    weights: LossWeights,
    epsilon: float = 1e-5,
    n_samples: int = 200,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error of backward_episode vs central finite differences.

    Checks a random subsample of parameters (all of them if the network
    is small enough).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    analytic = backward_episode(params, config, rollout, weights)

    coords = []
    for name, arr in params.items():
        for idx in np.ndindex(arr.shape):
            coords.append((name, idx))
    if len(coords) > n_samples:
        picks = rng.choice(len(coords), size=n_samples, replace=False)
        coords = [coords[int(k)] for k in picks]

    # Extended precision for the loss evaluations: the difference quotient
    # cancels ~16 double digits, which would drown the tiny gradients.
    hp = {k: v.astype(np.longdouble) for k, v in params.items()}
    eps = np.longdouble(epsilon)

    max_err = 0.0
    for name, idx in coords:
        orig = hp[name][idx]
        hp[name][idx] = orig + eps
        lp = episode_loss(hp, config, rollout, weights)
        hp[name][idx] = orig - eps
        lm = episode_loss(hp, config, rollout, weights)
        hp[name][idx] = orig
        numeric = float((lp - lm) / (2.0 * eps))
        g = analytic[name][idx]
        err = abs(g - numeric) / max(abs(g), abs(numeric), 1e-8)
        max_err = max(max_err, err)
    return max_err
