"""
B-GRPO Loss
============

The batch objective, its exact gradient, the supervised warmup loss, and a
central-difference gradient checker.

For a batch of B samples with frozen action o_i, old-policy probability
p_old, reference probability p_ref and advantage Â_i:

    t_i = π_θ(o_i|q_i) / p_old          (importance ratio)
    u_i = p_ref / π_θ(o_i|q_i)          (reference ratio)
    J_i = min(t_i·Â_i, clip(t_i, 1−ε, 1+ε)·Â_i) − β·(u_i − ln u_i − 1)
    loss = −(1/B) Σ J_i

Â, p_old and p_ref are constants; gradients flow only through π_θ. Where the
clipped branch is selected outside [1−ε, 1+ε] the term is flat.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from bgrpo.config import BGRPOConfig
from bgrpo.errors import DimensionError, LabelError
from bgrpo.models.policy import ForwardCache, PolicyParams, forward_batch, init_params, log_softmax

logger = logging.getLogger(__name__)

LossKind = Literal["ce", "bgrpo"]

_TINY = np.finfo(np.float64).tiny


# ── Types ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SampleRollout:
    """Everything frozen about one sample at rollout time."""
    sample_id: str
    action: int
    p_old: float
    p_ref: float
    advantage: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p_old <= 1.0 and 0.0 < self.p_ref <= 1.0):
            raise ValueError(
                f"Rollout {self.sample_id!r}: probabilities must be in (0, 1], "
                f"got p_old={self.p_old}, p_ref={self.p_ref}"
            )
        if self.action < 0:
            raise ValueError(f"Rollout {self.sample_id!r}: negative action {self.action}")


@dataclass(eq=False)
class GradientSet:
    dW1: NDArray[np.float64]
    db1: NDArray[np.float64]
    dW2: NDArray[np.float64]
    db2: NDArray[np.float64]

    @property
    def arrays(self) -> tuple[NDArray[np.float64], ...]:
        return (self.dW1, self.db1, self.dW2, self.db2)

    def is_zero(self) -> bool:
        return all(not np.any(a) for a in self.arrays)


# ── Scalar pieces ────────────────────────────────────────────────────────

def kl_penalty(u: float | NDArray[np.float64]) -> float | NDArray[np.float64]:
    """u − ln u − 1, the per-sample estimate of KL(π_θ ‖ π_ref) with u = π_ref/π_θ."""
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr <= 0):
        raise ValueError("KL penalty needs u > 0")
    out = u_arr - np.log(u_arr) - 1.0
    return float(out) if out.ndim == 0 else out


def _objective_terms(
    p_cur: NDArray[np.float64],
    p_old: NDArray[np.float64],
    p_ref: NDArray[np.float64],
    adv: NDArray[np.float64],
    epsilon: float,
    beta: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Per-sample J_i and dJ_i/d ln π_θ(o_i|q_i)."""
    t = p_cur / p_old
    u = p_ref / p_cur
    unclipped = t * adv
    clipped = np.clip(t, 1.0 - epsilon, 1.0 + epsilon) * adv
    objective = np.minimum(unclipped, clipped) - beta * kl_penalty(u)

    flat = ((adv > 0) & (t > 1.0 + epsilon)) | ((adv < 0) & (t < 1.0 - epsilon))
    d_logp = np.where(flat, 0.0, t * adv) + beta * (u - 1.0)
    return objective, d_logp


def per_sample_objective(p_cur: float, rollout: SampleRollout, cfg: BGRPOConfig) -> float:
    if not 0.0 < p_cur <= 1.0:
        raise ValueError(f"π_θ(o|q) must be in (0, 1], got {p_cur}")
    objective, _ = _objective_terms(
        np.array([p_cur]),
        np.array([rollout.p_old]),
        np.array([rollout.p_ref]),
        np.array([rollout.advantage]),
        cfg.epsilon,
        cfg.beta,
    )
    return float(objective[0])


# ── Batch loss and gradients ─────────────────────────────────────────────

def _rollout_arrays(rollouts: Sequence[SampleRollout], n: int, num_classes: int):
    if len(rollouts) != n:
        raise DimensionError(f"{len(rollouts)} rollouts for a batch of {n} samples")
    actions = np.array([r.action for r in rollouts], dtype=np.int64)
    if np.any(actions >= num_classes):
        raise DimensionError(f"Rollout action outside 0..{num_classes - 1}")
    p_old = np.array([r.p_old for r in rollouts], dtype=np.float64)
    p_ref = np.array([r.p_ref for r in rollouts], dtype=np.float64)
    adv = np.array([r.advantage for r in rollouts], dtype=np.float64)
    return actions, p_old, p_ref, adv


def _backprop(params: PolicyParams, X: NDArray[np.float64], cache: ForwardCache, d_logits: NDArray[np.float64]) -> GradientSet:
    dW2 = cache.hidden.T @ d_logits
    db2 = d_logits.sum(axis=0)
    d_hidden = d_logits @ params.W2.T
    d_pre = d_hidden * (cache.pre > 0)
    dW1 = X.T @ d_pre
    db1 = d_pre.sum(axis=0)
    return GradientSet(dW1=dW1, db1=db1, dW2=dW2, db2=db2)


def bgrpo_loss_and_grads(
    params: PolicyParams,
    X: NDArray[np.float64],
    rollouts: Sequence[SampleRollout],
    cfg: BGRPOConfig,
) -> tuple[float, GradientSet]:
    """Loss and exact gradient in one forward/backward pass."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    N = params.dims[2]
    actions, p_old, p_ref, adv = _rollout_arrays(rollouts, n, N)
    cache = forward_batch(params, X)
    rows = np.arange(n)
    p_cur = np.maximum(cache.probs[rows, actions], _TINY)

    objective, d_logp = _objective_terms(p_cur, p_old, p_ref, adv, cfg.epsilon, cfg.beta)
    loss = -float(np.mean(objective))

    # d ln p_a / d z = onehot(a) − p
    onehot = np.zeros_like(cache.probs)
    onehot[rows, actions] = 1.0
    d_logits = (-d_logp / n)[:, None] * (onehot - cache.probs)
    return loss, _backprop(params, X, cache, d_logits)


def batch_loss(params: PolicyParams, X: NDArray[np.float64], rollouts: Sequence[SampleRollout], cfg: BGRPOConfig) -> float:
    return bgrpo_loss_and_grads(params, X, rollouts, cfg)[0]


def batch_gradients(params: PolicyParams, X: NDArray[np.float64], rollouts: Sequence[SampleRollout], cfg: BGRPOConfig) -> GradientSet:
    return bgrpo_loss_and_grads(params, X, rollouts, cfg)[1]


def ce_loss_and_grads(
    params: PolicyParams,
    X: NDArray[np.float64],
    labels: NDArray[np.int64] | Sequence[int | None],
) -> tuple[float, GradientSet]:
    """Mean negative log-likelihood of the gold labels and its gradient."""
    if any(label is None for label in labels):
        raise LabelError("Supervised batch contains an unlabeled sample")
    y = np.asarray(labels, dtype=np.int64)
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if y.shape != (n,):
        raise DimensionError(f"{y.shape[0]} labels for a batch of {n} samples")
    cache = forward_batch(params, X)
    rows = np.arange(n)
    loss = -float(np.mean(log_softmax(cache.logits)[rows, y]))
    d_logits = cache.probs.copy()
    d_logits[rows, y] -= 1.0
    d_logits /= n
    return loss, _backprop(params, X, cache, d_logits)


# ── Gradient checking ────────────────────────────────────────────────────

@dataclass(frozen=True)
class GradCheckInstance:
    """Shape and seed of a random gradient-check problem."""
    D: int = 8
    H: int = 4
    N: int = 6
    B: int = 5
    seed: int = 0
    epsilon: float = 0.2
    beta: float = 0.1


@dataclass(frozen=True)
class GradCheckReport:
    kind: LossKind
    max_rel_error: float
    passed: bool
    num_coordinates: int


def _random_problem(kind: LossKind, inst: GradCheckInstance, h: float):
    """Build params, inputs and a loss closure for one random instance."""
    rng = np.random.default_rng([inst.seed, 0x67])
    params = init_params(inst.D, inst.H, inst.N, seed=inst.seed)
    params.b1[:] = rng.normal(0.0, 0.1, size=inst.H)
    params.b2[:] = rng.normal(0.0, 0.1, size=inst.N)
    X = rng.normal(0.0, 1.0, size=(inst.B, inst.D))

    if kind == "ce":
        y = rng.integers(0, inst.N, size=inst.B)
        return params, lambda p: ce_loss_and_grads(p, X, y)

    cfg = BGRPOConfig(epsilon=inst.epsilon, beta=inst.beta, batch_size=max(inst.B, 2))
    probs = forward_batch(params, X).probs
    actions = rng.integers(0, inst.N, size=inst.B)
    kinks = (1.0 - inst.epsilon, 1.0 + inst.epsilon)
    rollouts = []
    for i, a in enumerate(actions):
        p_cur = float(probs[i, a])
        # sample 0 sits in the flat clipped region, sample 1 at t = 1, the rest anywhere
        if i == 0:
            t, adv = 1.0 + 2.5 * inst.epsilon, abs(rng.normal()) + 0.5
        elif i == 1:
            t, adv = 1.0, rng.normal()
        else:
            adv = rng.normal()
            while True:
                t = rng.uniform(max(0.4, p_cur + 1e-3), 1.8)
                if min(abs(t - k) for k in kinks) >= 10 * h:
                    break
        p_ref = float(min(1.0, p_cur * np.exp(rng.normal(0.0, 0.5))))
        rollouts.append(SampleRollout(str(i), int(a), p_cur / t, p_ref, float(adv)))
    return params, lambda p: bgrpo_loss_and_grads(p, X, rollouts, cfg)


def finite_difference_check(
    fn: Callable[[PolicyParams], tuple[float, GradientSet]],
    params: PolicyParams,
    h: float = 1e-5,
) -> tuple[float, int]:
    """Max relative error between analytic and central-difference gradients.

    Relative error per coordinate is |g_a − g_n| / max(1, |g_a|, |g_n|).
    """
    _, analytic = fn(params)
    worst = 0.0
    count = 0
    shifted = params.copy()
    for arr, grad in zip(shifted.arrays, analytic.arrays):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            f_plus, _ = fn(shifted)
            flat[j] = orig - h
            f_minus, _ = fn(shifted)
            flat[j] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            err = abs(gflat[j] - numeric) / max(1.0, abs(gflat[j]), abs(numeric))
            worst = max(worst, err)
            count += 1
    return worst, count


def grad_check(
    kind: LossKind,
    instance: GradCheckInstance | None = None,
    h: float = 1e-5,
    tol: float = 1e-4,
) -> GradCheckReport:
    inst = instance or GradCheckInstance()
    params, fn = _random_problem(kind, inst, h)
    worst, count = finite_difference_check(fn, params, h)
    passed = worst < tol
    logger.debug("grad_check %s seed=%d: max rel error %.3e over %d coords", kind, inst.seed, worst, count)
    return GradCheckReport(kind=kind, max_rel_error=worst, passed=passed, num_coordinates=count)
