"""Adam, sparsity masks and the train / project / rewind / retrain loop."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ConfigError, ContractError
from .network import ModelParams, fcnn_loss, init_params, total_loss
from .numerics import Rng, permutation
from .projection import project_l11

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class TrainConfig:
    lam: float = 1.0
    eta: float = 10.0
    gamma: float = 1e-3
    epochs: int = 30
    batch_size: int = 8
    hidden: int = 100
    seed: int = 0
    scheduler: str = "constant"  # "constant" | "step"
    step_factor: float = 0.1
    step_every: int = 20
    project_every_epoch: bool = False

    def validate(self, n_labeled: int | None = None) -> None:
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.eta < 0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.gamma <= 0:
            raise ConfigError(f"learning rate must be > 0, got {self.gamma}")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden < 1:
            raise ConfigError("epochs, batch size and hidden width must be >= 1")
        if self.scheduler not in ("constant", "step"):
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")
        if self.scheduler == "step" and (self.step_every < 1 or self.step_factor <= 0):
            raise ConfigError("step scheduler needs step_every >= 1 and step_factor > 0")
        if n_labeled is not None:
            if n_labeled == 0:
                raise ConfigError("no labeled samples to train on")
            if self.batch_size > n_labeled:
                raise ConfigError(
                    f"batch size {self.batch_size} exceeds {n_labeled} labeled samples")

    def learning_rate(self, epoch: int) -> float:
        if self.scheduler == "step":
            return self.gamma * self.step_factor ** (epoch // self.step_every)
        return self.gamma


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = EPS
    _buf: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(m={n: np.zeros_like(a) for n, a in params.items()},
                   v={n: np.zeros_like(a) for n, a in params.items()})


@numba.njit(cache=True)
def _fused_adam(theta, g, m, v, beta1, beta2, eps, lr_over_c1, inv_c2):
    t = theta.reshape(-1)
    gg = g.reshape(-1)
    mm = m.reshape(-1)
    vv = v.reshape(-1)
    for i in range(t.size):
        gi = gg[i]
        mi = beta1 * mm[i] + (1.0 - beta1) * gi
        vi = beta2 * vv[i] + (1.0 - beta2) * (gi * gi)
        mm[i] = mi
        vv[i] = vi
        t[i] -= lr_over_c1 * mi / (np.sqrt(vi * inv_c2) + eps)


def adam_step(state: AdamState, params: ModelParams, grads: ModelParams,
              gamma: float) -> ModelParams:
    """One bias-corrected Adam update, applied to ``params`` in place.

    theta <- theta - gamma * m_hat / (sqrt(v_hat) + eps), with
    m_hat = m / (1 - beta1^t) and v_hat = v / (1 - beta2^t).
    """
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for name, g in grads.items():
        theta = getattr(params, name)
        if theta.shape != g.shape:
            raise ContractError(f"gradient {name} has shape {g.shape}, expected {theta.shape}")
        m = state.m[name]
        v = state.v[name]
        if all(a.flags.c_contiguous for a in (theta, g, m, v)):
            _fused_adam(theta, np.ascontiguousarray(g, dtype=np.float64), m, v,
                        state.beta1, state.beta2, state.eps, gamma / c1, 1.0 / c2)
            continue
        buf = state._buf.get(name)
        if buf is None:
            buf = state._buf[name] = np.empty_like(theta)
        # in-place to avoid allocating several d*h temporaries per step
        m *= state.beta1
        np.multiply(g, 1.0 - state.beta1, out=buf)
        m += buf
        v *= state.beta2
        np.multiply(g, g, out=buf)
        buf *= 1.0 - state.beta2
        v += buf
        np.divide(v, c2, out=buf)
        np.sqrt(buf, out=buf)
        buf += state.eps
        np.divide(m, buf, out=buf)
        buf *= gamma / c1
        theta -= buf
    return params


@dataclass
class SparsityMask:
    m0: np.ndarray

    @property
    def density(self) -> float:
        return float(self.m0.mean()) if self.m0.size else 0.0

    def kept_rows(self) -> np.ndarray:
        return np.flatnonzero(self.m0.any(axis=1))


def compute_mask(w1_projected) -> SparsityMask:
    w = np.asarray(w1_projected, dtype=np.float64)
    return SparsityMask((w != 0).astype(np.float64))


def _loss_and_grads(params: ModelParams, x, y, lam: float):
    if params.has_decoder:
        return total_loss(params, x, y, lam)
    return fcnn_loss(params, x, y)


def train_one_descent(params: ModelParams, x, y, cfg: TrainConfig, rng: Rng,
                      mask: SparsityMask | None = None, project_eta: float | None = None):
    """Mini-batch Adam for ``cfg.epochs`` epochs; mutates and returns ``params``.

    With a mask, ``w1`` and its gradient are multiplied by ``m0`` so frozen
    entries stay exactly zero. ``project_eta`` re-projects ``w1`` after each
    epoch (projected-gradient variant). Returns ``(params, history)`` where
    ``history[e]`` is the full-batch loss after ``e`` epochs.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    cfg.validate(n)
    state = AdamState.for_params(params)
    if mask is not None:
        params.w1 *= mask.m0
    history = [_loss_and_grads(params, x, y, cfg.lam)[0]]
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate(epoch)
        order = permutation(rng, n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, grads = _loss_and_grads(params, x[idx], y[idx], cfg.lam)
            if mask is not None:
                grads.w1 *= mask.m0
            adam_step(state, params, grads, lr)
            if mask is not None:
                params.w1 *= mask.m0
        if project_eta is not None:
            params.w1 = project_l11(params.w1, project_eta)
        history.append(_loss_and_grads(params, x, y, cfg.lam)[0])
    return params, history


@dataclass
class DoubleDescentResult:
    params: ModelParams
    mask: SparsityMask
    w_init: ModelParams
    rewound: ModelParams
    w1_projected: np.ndarray
    history_first: list[float] = field(default_factory=list)
    history_second: list[float] = field(default_factory=list)


def double_descent(cfg: TrainConfig, x, y, k: int, rng: Rng | None = None,
                   decoder: bool = True) -> DoubleDescentResult:
    """Train, project ``w1`` with the l1,1 budget, rewind survivors, retrain.

    Only ``w1`` is projected and masked; all other blocks are rewound to
    their initial values and trained densely. Adam moments start fresh for
    the second descent.
    """
    x = np.asarray(x, dtype=np.float64)
    cfg.validate(x.shape[0])
    rng = rng if rng is not None else Rng(cfg.seed)
    w_init = init_params(x.shape[1], cfg.hidden, k, rng.child(0), decoder=decoder)

    params = w_init.copy()
    eta_inner = cfg.eta if cfg.project_every_epoch else None
    params, hist1 = train_one_descent(params, x, y, cfg, rng.child(1), project_eta=eta_inner)

    w1_projected = project_l11(params.w1, cfg.eta)
    mask = compute_mask(w1_projected)

    rewound = w_init.copy()
    rewound.w1 *= mask.m0
    params = rewound.copy()
    params, hist2 = train_one_descent(params, x, y, cfg, rng.child(2), mask=mask)
    return DoubleDescentResult(params=params, mask=mask, w_init=w_init, rewound=rewound,
                               w1_projected=w1_projected,
                               history_first=hist1, history_second=hist2)


def train_fcnn(cfg: TrainConfig, x, y, k: int, rng: Rng | None = None):
    """Encoder-only baseline: one dense descent of ``cfg.epochs`` epochs."""
    x = np.asarray(x, dtype=np.float64)
    rng = rng if rng is not None else Rng(cfg.seed)
    params = init_params(x.shape[1], cfg.hidden, k, rng.child(0), decoder=False)
    return train_one_descent(params, x, y, cfg, rng.child(1))
