"""Parametric scorers f_theta, the logistic link and the regularized
cross-entropy they are fit with.

Parameters live in one flat vector; `Architecture.shapes()` fixes how the
vector is cut into layers. Gradients are written out by hand for the two
architectures, so no autodiff is involved.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from loanbandit.config import Architecture, TrainConfig
from loanbandit.exceptions import ConfigError, DimensionMismatchError, ParameterError

PROB_CLAMP = 1e-12


def link(z):
    """Logistic function, stable for large |z|. Returns a float for scalar input."""
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True, eq=False)
class ScorerParams:
    arch: Architecture
    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.size != self.arch.n_params:
            raise ParameterError(
                f"{self.arch.kind} architecture needs {self.arch.n_params} parameters, got {theta.size}"
            )
        if not np.all(np.isfinite(theta)):
            raise ParameterError("parameter vector has non-finite entries")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zeros(cls, arch: Architecture) -> "ScorerParams":
        return cls(arch, np.zeros(arch.n_params))

    @classmethod
    def init(cls, arch: Architecture, rng: np.random.Generator) -> "ScorerParams":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer; biases use the
        fan-in of the layer they belong to."""
        fan_in = {
            "w": arch.input_dim,
            "b": arch.input_dim,
            "W1": arch.input_dim,
            "b1": arch.input_dim,
            "W2": arch.hidden[0],
            "b2": arch.hidden[0],
            "w3": arch.hidden[1],
            "b3": arch.hidden[1],
        }
        chunks = []
        for name, shape in arch.shapes():
            bound = 1.0 / np.sqrt(fan_in[name])
            chunks.append(rng.uniform(-bound, bound, size=int(np.prod(shape))))
        return cls(arch, np.concatenate(chunks))

    def with_theta(self, theta: np.ndarray) -> "ScorerParams":
        return ScorerParams(self.arch, np.array(theta, dtype=float))

    def clone(self) -> "ScorerParams":
        return self.with_theta(self.theta.copy())

    def unpack(self) -> dict[str, np.ndarray]:
        out = {}
        offset = 0
        for name, shape in self.arch.shapes():
            size = int(np.prod(shape))
            out[name] = self.theta[offset : offset + size].reshape(shape)
            offset += size
        return out

    def snapshot(self) -> "ParamsSnapshot":
        return ParamsSnapshot(arch=self.arch, theta=self.theta.tolist())

    def save(self, path: Path) -> None:
        Path(path).write_text(self.snapshot().model_dump_json())

    @classmethod
    def load(cls, path: Path) -> "ScorerParams":
        snapshot = ParamsSnapshot.model_validate(json.loads(Path(path).read_text()))
        return snapshot.restore()


class ParamsSnapshot(BaseModel):
    arch: Architecture
    theta: list[float]

    def restore(self) -> ScorerParams:
        return ScorerParams(self.arch, np.asarray(self.theta, dtype=float))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Rows of (x, y, weight). Weights default to 1; pseudo-labeled rows
    carry the pseudo-label weight W."""

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        if features.ndim != 2:
            raise ParameterError("features must be a 2-d array")
        labels = np.asarray(self.labels, dtype=float).reshape(-1)
        if labels.size != features.shape[0]:
            raise ParameterError("one label per feature row is required")
        if self.weights is None:
            weights = np.ones(labels.size)
        else:
            weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.size != labels.size:
            raise ParameterError("one weight per feature row is required")
        if np.any(weights < 0):
            raise ParameterError("weights must be non-negative")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empty(cls, dim: int) -> "LabeledDataset":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0))

    @classmethod
    def pseudo(cls, points: np.ndarray, weight: float) -> "LabeledDataset":
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        return cls(points, np.ones(n), np.full(n, float(weight)))

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        return LabeledDataset(
            np.vstack([self.features, other.features]),
            np.concatenate([self.labels, other.labels]),
            np.concatenate([self.weights, other.weights]),
        )

    def subset(self, index: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(self.features[index], self.labels[index], self.weights[index])


def _as_batch(params: ScorerParams, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = x.reshape(1, -1) if single else x
    if batch.shape[1] != params.arch.input_dim:
        raise DimensionMismatchError(params.arch.input_dim, batch.shape[1])
    return batch, single


def _forward(params: ScorerParams, X: np.ndarray):
    p = params.unpack()
    if params.arch.kind == "linear":
        z = X @ p["w"]
        if params.arch.bias:
            z = z + p["b"][0]
        return z, None
    a1 = np.tanh(X @ p["W1"].T + p["b1"])
    a2 = np.tanh(a1 @ p["W2"].T + p["b2"])
    z = a2 @ p["w3"] + p["b3"][0]
    return z, (a1, a2)


def score(params: ScorerParams, x):
    """f_theta(x) for one point (returns a float) or a 2-d batch (returns an array)."""
    batch, single = _as_batch(params, x)
    z, _ = _forward(params, batch)
    return float(z[0]) if single else z


def _backward(params: ScorerParams, X: np.ndarray, cache, dz: np.ndarray) -> np.ndarray:
    """Gradient of sum_i dz_i * f(x_i) with respect to theta, as a flat vector."""
    p = params.unpack()
    if params.arch.kind == "linear":
        parts = [X.T @ dz]
        if params.arch.bias:
            parts.append(np.array([dz.sum()]))
        return np.concatenate(parts)
    a1, a2 = cache
    d_w3 = a2.T @ dz
    d_b3 = np.array([dz.sum()])
    d_z2 = np.outer(dz, p["w3"]) * (1.0 - a2**2)
    d_W2 = d_z2.T @ a1
    d_b2 = d_z2.sum(axis=0)
    d_z1 = (d_z2 @ p["W2"]) * (1.0 - a1**2)
    d_W1 = d_z1.T @ X
    d_b1 = d_z1.sum(axis=0)
    return np.concatenate(
        [d_W1.ravel(), d_b1, d_W2.ravel(), d_b2, d_w3, d_b3]
    )


def score_gradients(params: ScorerParams, X: np.ndarray) -> np.ndarray:
    """Per-point gradient features: row i is grad_theta f_theta(x_i)."""
    X, _ = _as_batch(params, X)
    n = X.shape[0]
    if params.arch.kind == "linear":
        cols = [X]
        if params.arch.bias:
            cols.append(np.ones((n, 1)))
        return np.hstack(cols)
    p = params.unpack()
    _, (a1, a2) = _forward(params, X)
    d_z2 = p["w3"][None, :] * (1.0 - a2**2)
    d_z1 = (d_z2 @ p["W2"]) * (1.0 - a1**2)
    d_W1 = np.einsum("ni,nj->nij", d_z1, X).reshape(n, -1)
    d_W2 = np.einsum("ni,nj->nij", d_z2, a1).reshape(n, -1)
    return np.hstack([d_W1, d_z1, d_W2, d_z2, a2, np.ones((n, 1))])


def loss(params: ScorerParams, data: LabeledDataset, l2: float) -> float:
    theta = params.theta
    reg = 0.5 * l2 * float(np.dot(theta, theta))
    if len(data) == 0:
        return reg
    z, _ = _forward(params, data.features)
    prob = np.clip(link(z), PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = data.labels
    cross_entropy = -(y * np.log(prob) + (1.0 - y) * np.log(1.0 - prob))
    return float(np.dot(data.weights, cross_entropy)) + reg


def grad(params: ScorerParams, data: LabeledDataset, l2: float) -> np.ndarray:
    g = l2 * params.theta
    if len(data) == 0:
        return g
    z, cache = _forward(params, data.features)
    dz = data.weights * (link(z) - data.labels)
    return g + _backward(params, data.features, cache, dz)


def accuracy(params: ScorerParams, data: LabeledDataset) -> float:
    if len(data) == 0:
        return float("nan")
    predicted = score(params, data.features) >= 0
    return float(np.mean(predicted == (data.labels == 1)))


def train(
    params: ScorerParams,
    data: LabeledDataset,
    cfg: TrainConfig,
    rng: np.random.Generator | None = None,
) -> ScorerParams:
    """Run `cfg.steps` optimizer iterations on the regularized loss and
    return new parameters; the input is left untouched."""
    if cfg.steps == 0:
        return params
    if cfg.optimizer == "newton":
        return _train_newton(params, data, cfg)
    rng = rng if rng is not None else np.random.default_rng(0)
    theta = params.theta.copy()
    n = len(data)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    for step in range(1, cfg.steps + 1):
        batch = data
        if cfg.minibatch is not None and n > cfg.minibatch:
            batch = data.subset(rng.choice(n, size=cfg.minibatch, replace=False))
        g = grad(params.with_theta(theta), batch, cfg.l2_lambda)
        if cfg.optimizer == "sgd":
            theta -= cfg.learning_rate * g / max(float(batch.weights.sum()), 1.0)
            continue
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g**2
        m_hat = m / (1 - beta1**step)
        v_hat = v / (1 - beta2**step)
        theta -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + adam_eps)
    return params.with_theta(theta)


def _design(arch: Architecture, X: np.ndarray) -> np.ndarray:
    if arch.bias:
        return np.hstack([X, np.ones((X.shape[0], 1))])
    return X


def _newton_objective(theta, design, data: LabeledDataset, l2: float) -> float:
    z = design @ theta
    # -y log mu(z) - (1-y) log(1-mu(z)) == softplus(z) - y z
    nll = np.logaddexp(0.0, z) - data.labels * z
    return float(np.dot(data.weights, nll)) + 0.5 * l2 * float(np.dot(theta, theta))


def _train_newton(params: ScorerParams, data: LabeledDataset, cfg: TrainConfig) -> ScorerParams:
    """Damped Newton (IRLS) with Armijo backtracking; linear scorers only."""
    if params.arch.kind != "linear":
        raise ConfigError("the newton optimizer only supports the linear architecture")
    theta = params.theta.copy()
    design = _design(params.arch, data.features)
    ridge = max(cfg.l2_lambda, 1e-10)
    eye = np.eye(theta.size)
    for _ in range(cfg.steps):
        z = design @ theta
        prob = link(z)
        g = design.T @ (data.weights * (prob - data.labels)) + cfg.l2_lambda * theta
        if np.linalg.norm(g) < cfg.tolerance:
            break
        curvature = data.weights * prob * (1.0 - prob)
        hessian = design.T @ (design * curvature[:, None]) + ridge * eye
        try:
            direction = np.linalg.solve(hessian, g)
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(hessian, g, rcond=None)[0]
        current = _newton_objective(theta, design, data, cfg.l2_lambda)
        slope = float(np.dot(g, direction))
        t = 1.0
        while t > 1e-12:
            candidate = theta - t * direction
            if _newton_objective(candidate, design, data, cfg.l2_lambda) <= current - 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        theta = candidate
    return params.with_theta(theta)
