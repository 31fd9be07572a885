"""Symmetric supervised autoencoder with a softmax head on the latent layer.

Encoder ``d -> h -> ReLU -> k``, decoder ``k -> h -> ReLU -> d``; the
latent dimension ``k`` equals the number of classes, so ``softmax(z)``
is the per-class confidence score. The FCNN baseline is the encoder
alone (``ModelParams`` with no decoder blocks).
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

from .errors import ContractError
from .numerics import Rng

HUBER_DELTA = 1.0

ENCODER_BLOCKS = ("w1", "b1", "w2", "b2")
DECODER_BLOCKS = ("w3", "b3", "w4", "b4")


@dataclass
class ModelParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray | None = None
    b3: np.ndarray | None = None
    w4: np.ndarray | None = None
    b4: np.ndarray | None = None

    @property
    def has_decoder(self) -> bool:
        return self.w4 is not None

    @property
    def shape(self) -> tuple[int, int, int]:
        d, h = self.w1.shape
        return d, h, self.w2.shape[1]

    def names(self) -> tuple[str, ...]:
        return ENCODER_BLOCKS + DECODER_BLOCKS if self.has_decoder else ENCODER_BLOCKS

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in self.names():
            yield name, getattr(self, name)

    def copy(self) -> "ModelParams":
        return ModelParams(**{f.name: None if getattr(self, f.name) is None
                              else getattr(self, f.name).copy() for f in fields(self)})

    def zeros_like(self) -> "ModelParams":
        return ModelParams(**{f.name: None if getattr(self, f.name) is None
                              else np.zeros_like(getattr(self, f.name)) for f in fields(self)})

    def encoder(self) -> "ModelParams":
        """View of the encoder blocks only (arrays are shared, not copied)."""
        return ModelParams(self.w1, self.b1, self.w2, self.b2)


# gradients carry exactly the same blocks as the parameters
Gradients = ModelParams


@dataclass
class ForwardPass:
    h1_pre: np.ndarray
    h1: np.ndarray
    z: np.ndarray
    scores: np.ndarray
    h2_pre: np.ndarray | None = None
    h2: np.ndarray | None = None
    x_hat: np.ndarray | None = None


def _uniform(rng: Rng, fan_in: int, fan_out: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform((fan_in, fan_out), -bound, bound)


def init_params(d: int, h: int, k: int, rng: Rng, decoder: bool = True) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.

    The encoder blocks are drawn first, so an encoder-only model shares
    its initial weights with the full autoencoder of the same seed.
    """
    if min(d, h, k) < 1:
        raise ContractError(f"layer sizes must be >= 1, got d={d}, h={h}, k={k}")
    p = ModelParams(
        w1=_uniform(rng, d, h), b1=np.zeros(h),
        w2=_uniform(rng, h, k), b2=np.zeros(k),
    )
    if decoder:
        p.w3, p.b3 = _uniform(rng, k, h), np.zeros(h)
        p.w4, p.b4 = _uniform(rng, h, d), np.zeros(d)
    return p


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def forward(p: ModelParams, x) -> ForwardPass:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.w1.shape[0]:
        raise ContractError(f"input shape {x.shape} does not match d={p.w1.shape[0]}")
    h1_pre = x @ p.w1 + p.b1
    h1 = np.maximum(h1_pre, 0.0)
    z = h1 @ p.w2 + p.b2
    out = ForwardPass(h1_pre=h1_pre, h1=h1, z=z, scores=softmax(z))
    if p.has_decoder:
        out.h2_pre = z @ p.w3 + p.b3
        out.h2 = np.maximum(out.h2_pre, 0.0)
        out.x_hat = out.h2 @ p.w4 + p.b4
    return out


def fcnn_forward(p: ModelParams, x) -> ForwardPass:
    return forward(p.encoder(), x)


def _check_labels(y, n: int, k: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if y.size != n:
        raise ContractError(f"{y.size} labels for {n} samples")
    if y.size and (y.min() < 0 or y.max() >= k):
        raise ContractError(f"labels must lie in 0..{k - 1}")
    return y


def cross_entropy_loss(z, y) -> tuple[float, np.ndarray]:
    """Mean cross entropy of ``softmax(z)`` against integer labels, and dL/dz."""
    z = np.asarray(z, dtype=np.float64)
    n, k = z.shape
    y = _check_labels(y, n, k)
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = float(np.mean(log_norm - shifted[rows, y]))
    dz = np.exp(shifted - log_norm[:, None])
    dz[rows, y] -= 1.0
    return loss, dz / n


def smooth_l1_loss(x_hat, x, delta: float = HUBER_DELTA) -> tuple[float, np.ndarray]:
    """Element-averaged Huber loss and its gradient with respect to ``x_hat``."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x_hat.shape != x.shape:
        raise ContractError(f"shape mismatch {x_hat.shape} vs {x.shape}")
    e = x_hat - x
    a = np.abs(e)
    per = np.where(a < delta, 0.5 * e * e, delta * (a - 0.5 * delta))
    return float(per.mean()), np.clip(e, -delta, delta) / e.size


def _encoder_backward(p: ModelParams, x, fp: ForwardPass, dz, g: Gradients):
    g.w2 = fp.h1.T @ dz
    g.b2 = dz.sum(axis=0)
    dh1 = (dz @ p.w2.T) * (fp.h1_pre > 0)
    g.w1 = x.T @ dh1
    g.b1 = dh1.sum(axis=0)


def total_loss(p: ModelParams, x, y, lam: float = 1.0) -> tuple[float, Gradients]:
    """Classification plus ``lam``-weighted reconstruction loss, with gradients.

    The latent layer receives the cross-entropy gradient plus whatever
    flows back through the decoder.
    """
    if lam < 0:
        raise ContractError(f"lambda must be >= 0, got {lam}")
    if not p.has_decoder:
        raise ContractError("total_loss needs decoder blocks; use fcnn_loss")
    x = np.asarray(x, dtype=np.float64)
    fp = forward(p, x)
    ce, dz = cross_entropy_loss(fp.z, y)
    rec, dx_hat = smooth_l1_loss(fp.x_hat, x)
    dx_hat *= lam

    g = p.zeros_like()
    g.w4 = fp.h2.T @ dx_hat
    g.b4 = dx_hat.sum(axis=0)
    dh2 = (dx_hat @ p.w4.T) * (fp.h2_pre > 0)
    g.w3 = fp.z.T @ dh2
    g.b3 = dh2.sum(axis=0)
    dz = dz + dh2 @ p.w3.T
    _encoder_backward(p, x, fp, dz, g)
    return ce + lam * rec, g


def fcnn_loss(p: ModelParams, x, y) -> tuple[float, Gradients]:
    """Cross entropy of the encoder alone, with encoder gradients."""
    enc = p.encoder()
    x = np.asarray(x, dtype=np.float64)
    fp = forward(enc, x)
    loss, dz = cross_entropy_loss(fp.z, y)
    g = enc.zeros_like()
    _encoder_backward(enc, x, fp, dz, g)
    return loss, g


def predict(p: ModelParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Argmax labels (ties resolved to the lowest class id) and softmax scores."""
    scores = forward(p.encoder(), x).scores
    return np.argmax(scores, axis=1), scores


def latent(p: ModelParams, x) -> np.ndarray:
    return forward(p.encoder(), x).z
