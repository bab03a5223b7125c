"""
Policy Model
=============

The classifier π_θ: linear(D→H) → ReLU → linear(H→N) → softmax.

Parameters are plain float64 numpy arrays. Snapshots (π_θ_old, π_ref) are
deep, read-only copies. Checkpoints use a small self-describing binary
format so identical parameters always produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
from numpy.typing import NDArray

from bgrpo.errors import CheckpointError, DimensionError

logger = logging.getLogger(__name__)

DEFAULT_HIDDEN = 128

CHECKPOINT_MAGIC = b"BGRPO-CKPT\n"
CHECKPOINT_VERSION = 1

ProbDistribution = NDArray[np.float64]
"""Length-N probability vector (or an (n, N) stack of them)."""

SnapshotRole = Literal["old", "reference"]


# ── Parameters ───────────────────────────────────────────────────────────

@dataclass(eq=False)
class PolicyParams:
    """Weights θ of the policy. W1 is D×H, W2 is H×N."""
    W1: NDArray[np.float64]
    b1: NDArray[np.float64]
    W2: NDArray[np.float64]
    b2: NDArray[np.float64]

    def __post_init__(self) -> None:
        d, h = self.W1.shape
        h2, n = self.W2.shape
        if h2 != h or self.b1.shape != (h,) or self.b2.shape != (n,):
            raise DimensionError(
                f"Inconsistent parameter shapes: W1 {self.W1.shape}, b1 {self.b1.shape}, "
                f"W2 {self.W2.shape}, b2 {self.b2.shape}"
            )

    @property
    def dims(self) -> tuple[int, int, int]:
        """(D, H, N)"""
        return self.W1.shape[0], self.W1.shape[1], self.W2.shape[1]

    @property
    def arrays(self) -> tuple[NDArray[np.float64], ...]:
        return (self.W1, self.b1, self.W2, self.b2)

    def copy(self) -> PolicyParams:
        return PolicyParams(*(np.array(a, dtype=np.float64, copy=True) for a in self.arrays))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays)

    def digest(self) -> str:
        """SHA-256 over dims and raw parameter bytes."""
        h = hashlib.sha256(np.array(self.dims, dtype=np.int64).tobytes())
        for a in self.arrays:
            h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class PolicySnapshot:
    """A frozen copy of the policy playing the old or reference role."""
    params: PolicyParams
    role: SnapshotRole


def init_params(D: int, H: int, N: int, seed: int) -> PolicyParams:
    """Uniform fan-based init: U(−s, s), s = sqrt(6 / (fan_in + fan_out)); zero biases."""
    if min(D, H, N) < 1:
        raise ValueError(f"Dimensions must be >= 1, got D={D}, H={H}, N={N}")
    rng = np.random.default_rng(seed)
    s1 = np.sqrt(6.0 / (D + H))
    s2 = np.sqrt(6.0 / (H + N))
    return PolicyParams(
        W1=rng.uniform(-s1, s1, size=(D, H)),
        b1=np.zeros(H),
        W2=rng.uniform(-s2, s2, size=(H, N)),
        b2=np.zeros(N),
    )


def snapshot(params: PolicyParams, role: SnapshotRole) -> PolicySnapshot:
    frozen = params.copy()
    for a in frozen.arrays:
        a.setflags(write=False)
    return PolicySnapshot(params=frozen, role=role)


# ── Forward pass ─────────────────────────────────────────────────────────

class ForwardCache(NamedTuple):
    """Intermediates kept for backpropagation."""
    pre: NDArray[np.float64]      # (B, H) pre-activation
    hidden: NDArray[np.float64]   # (B, H) after ReLU
    logits: NDArray[np.float64]   # (B, N)
    probs: NDArray[np.float64]    # (B, N)


def softmax(logits: NDArray[np.float64]) -> NDArray[np.float64]:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits: NDArray[np.float64]) -> NDArray[np.float64]:
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def forward_batch(params: PolicyParams, X: NDArray[np.float64]) -> ForwardCache:
    """Forward pass over an (n, D) feature matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.dims[0]:
        raise DimensionError(f"Expected features of shape (n, {params.dims[0]}), got {X.shape}")
    pre = X @ params.W1 + params.b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ params.W2 + params.b2
    return ForwardCache(pre=pre, hidden=hidden, logits=logits, probs=softmax(logits))


def forward(params: PolicyParams, features: NDArray[np.float64]) -> tuple[NDArray[np.float64], ProbDistribution]:
    """Single-sample forward pass: (logits, p_p(·|q_i))."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (params.dims[0],):
        raise DimensionError(f"Expected {params.dims[0]} features, got shape {x.shape}")
    cache = forward_batch(params, x[None, :])
    return cache.logits[0], cache.probs[0]


def predict(params: PolicyParams, features: NDArray[np.float64]) -> int:
    """argmax of the policy distribution; ties go to the lowest index."""
    _, dist = forward(params, features)
    return int(np.argmax(dist))


# ── Checkpoints ──────────────────────────────────────────────────────────

def save_checkpoint(params: PolicyParams, path: str | Path) -> Path:
    """Write params as magic + JSON header line + little-endian float64 payload."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    D, H, N = params.dims
    header = json.dumps(
        {"format_version": CHECKPOINT_VERSION, "D": D, "H": H, "N": N, "dtype": "<f8",
         "arrays": ["W1", "b1", "W2", "b2"]},
        sort_keys=True,
    ).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in params.arrays)
    path.write_bytes(CHECKPOINT_MAGIC + header + b"\n" + payload)
    logger.debug("Checkpoint written: %s (D=%d H=%d N=%d)", path, D, H, N)
    return path


def is_checkpoint(path: str | Path) -> bool:
    with open(path, "rb") as f:
        return f.read(len(CHECKPOINT_MAGIC)) == CHECKPOINT_MAGIC


def load_checkpoint(path: str | Path) -> PolicyParams:
    path = Path(path)
    blob = path.read_bytes()
    if not blob.startswith(CHECKPOINT_MAGIC):
        raise CheckpointError(f"{path}: not a policy checkpoint")
    rest = blob[len(CHECKPOINT_MAGIC):]
    newline = rest.find(b"\n")
    if newline < 0:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(rest[:newline].decode("utf-8"))
    except ValueError as e:
        raise CheckpointError(f"{path}: bad header: {e}") from None
    if not isinstance(header, dict):
        raise CheckpointError(f"{path}: header is not a JSON object")
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported format_version {header.get('format_version')!r}")

    try:
        D, H, N = (int(header[k]) for k in ("D", "H", "N"))
    except KeyError as e:
        raise CheckpointError(f"{path}: header missing {e.args[0]}") from None
    except (TypeError, ValueError):
        raise CheckpointError(f"{path}: header sizes must be integers") from None
    if min(D, H, N) < 1:
        raise CheckpointError(f"{path}: header sizes must be >= 1, got D={D} H={H} N={N}")
    shapes = [(D, H), (H,), (H, N), (N,)]
    payload = rest[newline + 1:]
    expected = 8 * sum(int(np.prod(s)) for s in shapes)
    if len(payload) != expected:
        raise CheckpointError(f"{path}: payload is {len(payload)} bytes, expected {expected}")

    flat = np.frombuffer(payload, dtype="<f8")
    arrays = []
    offset = 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(flat[offset:offset + size].reshape(shape).astype(np.float64))
        offset += size
    params = PolicyParams(*arrays)
    if not params.is_finite():
        raise CheckpointError(f"{path}: non-finite parameters")
    return params
