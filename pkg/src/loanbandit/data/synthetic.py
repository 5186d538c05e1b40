"""Synthetic context generators: XOR Gaussian clusters and the separable
logistic-linear stream."""

from dataclasses import dataclass

import numpy as np

from loanbandit.config import Architecture
from loanbandit.env import LabeledSampleStream, OracleStream
from loanbandit.exceptions import GenerationError, ParameterError
from loanbandit.scorer import LabeledDataset, ScorerParams, score

XOR_CENTERS = ((0.0, 5.0), (0.0, 0.0), (5.0, -2.0), (5.0, 5.0))
XOR_VARIANCE = 0.5
MAX_ATTEMPTS = 1_000_000


@dataclass(frozen=True)
class XorClusters:
    """Equal-weight mixture of four isotropic Gaussians; the clusters listed in
    `positive_centers` carry label 1."""

    positive_centers: tuple[tuple[float, float], ...] = ((0.0, 0.0), (5.0, 5.0))
    centers: tuple[tuple[float, float], ...] = XOR_CENTERS
    variance: float = XOR_VARIANCE

    def __post_init__(self) -> None:
        unknown = set(map(tuple, self.positive_centers)) - set(map(tuple, self.centers))
        if unknown:
            raise ParameterError(f"positive centers {sorted(unknown)} are not cluster centers")

    @property
    def cluster_labels(self) -> np.ndarray:
        positive = set(map(tuple, self.positive_centers))
        return np.array([1.0 if tuple(c) in positive else 0.0 for c in self.centers])

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        centers = np.asarray(self.centers, dtype=float)
        cluster = rng.integers(0, len(centers), size=n)
        noise = np.sqrt(self.variance) * rng.standard_normal((n, centers.shape[1]))
        return centers[cluster] + noise, self.cluster_labels[cluster]

    def label_at(self, x) -> int:
        """Label of the cluster whose center is nearest to x."""
        centers = np.asarray(self.centers, dtype=float)
        nearest = int(np.argmin(np.linalg.norm(centers - np.asarray(x, dtype=float), axis=1)))
        return int(self.cluster_labels[nearest])

    def dataset(self, n: int, rng: np.random.Generator) -> LabeledDataset:
        X, y = self.sample(n, rng)
        return LabeledDataset(X, y)


def gen_xor(
    seed: int, positive_centers: tuple[tuple[float, float], ...] = ((0.0, 0.0), (5.0, 5.0))
) -> LabeledSampleStream:
    clusters = XorClusters(positive_centers=positive_centers)
    return LabeledSampleStream(clusters.sample, 2, np.random.default_rng(seed))


def uniform_ball(n: int, d: int, bound: float, rng: np.random.Generator) -> np.ndarray:
    directions = rng.standard_normal((n, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = bound * rng.random(n) ** (1.0 / d)
    return directions * radii[:, None]


@dataclass(frozen=True, eq=False)
class LogisticScenario:
    """Contexts uniform in the ball of radius `bound`, with the band
    |f*(x)| < tau rejected."""

    theta_star: ScorerParams
    tau: float
    bound: float = 1.0

    def sample_contexts(self, n: int, rng: np.random.Generator) -> np.ndarray:
        d = self.theta_star.arch.input_dim
        kept = []
        have = 0
        attempts = 0
        while have < n:
            if attempts >= MAX_ATTEMPTS:
                raise GenerationError(
                    f"rejection sampling kept {have} of {n} contexts after {attempts} attempts"
                    f" (tau={self.tau}, bound={self.bound})"
                )
            chunk = min(max(2 * (n - have), 64), MAX_ATTEMPTS - attempts)
            candidates = uniform_ball(chunk, d, self.bound, rng)
            attempts += chunk
            accepted = candidates[np.abs(score(self.theta_star, candidates)) >= self.tau]
            kept.append(accepted)
            have += len(accepted)
        return np.vstack(kept)[:n]


def make_theta_star(d: int, lipschitz: float, rng: np.random.Generator) -> ScorerParams:
    """Linear, bias-free f*(x) = theta^T x with ||theta|| = lipschitz."""
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    return ScorerParams(Architecture.linear(d, bias=False), lipschitz * direction)


def gen_synthetic_logistic(
    d: int,
    tau: float,
    lipschitz: float,
    seed: int,
    *,
    bound: float = 1.0,
    theta_seed: int = 0,
) -> tuple[OracleStream, ScorerParams]:
    """Oracle stream of gap-`tau` contexts. theta* comes from `theta_seed`, so
    runs with different `seed`s share the same label model."""
    if not 0 < tau < 1:
        raise ParameterError("tau must lie in (0, 1)")
    theta_star = make_theta_star(d, lipschitz, np.random.default_rng(theta_seed))
    scenario = LogisticScenario(theta_star, tau, bound)
    stream = OracleStream(scenario.sample_contexts, theta_star, np.random.default_rng(seed))
    return stream, theta_star
