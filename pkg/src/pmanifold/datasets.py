"""Seeded generators for the benchmark datasets.

All generators are deterministic functions of their parameters and the
seed; noise-free outputs lie exactly on the generating surface/curve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .geometry import PointCloud


@dataclass
class GeneratorSpec:
    """Parameter record for one dataset generation run."""

    kind: str                       # paraboloid | swiss_roll | predator_mobbing
    seed: int
    n: int = 0                      # point count (surface datasets)
    noise: float = 0.0
    agents: int = 20                # collective-motion parameters
    steps: int = 2000
    rho: float = 14.0

    def __post_init__(self):
        if self.kind not in ("paraboloid", "swiss_roll", "predator_mobbing"):
            raise DataFormatError(f"unknown dataset kind {self.kind!r}")
        if self.noise < 0:
            raise DataFormatError("noise must be nonnegative")
        if self.kind == "predator_mobbing":
            if self.agents < 1 or self.steps < 1:
                raise DataFormatError("agents and steps must be at least 1")
        elif self.n < 0:
            raise DataFormatError("n must be nonnegative")


def paraboloid(n: int = 2000, noise: float = 0.05, seed: int = 0) -> PointCloud:
    """Noisy paraboloid patch y3 = y1^2 + y2^2 + eps.

    y1, y2 are uniform on [-2, 2] and eps is uniform on [-noise, noise].
    """
    if n < 0:
        raise DataFormatError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    y1 = rng.uniform(-2.0, 2.0, n)
    y2 = rng.uniform(-2.0, 2.0, n)
    eps = rng.uniform(-noise, noise, n)
    return PointCloud(np.column_stack([y1, y2, y1 ** 2 + y2 ** 2 + eps]))


def noisy_swiss_roll(n: int = 2500, noise: float = 0.4, seed: int = 0) -> PointCloud:
    """Swiss roll (theta^0.8 cos/sin spiral, height phi) with additive noise.

    theta is uniform on [0.25 pi, 2.5 pi], phi uniform on [-2, 2]; an
    independent eps ~ U(-noise, noise) is added per coordinate.
    """
    if n < 0:
        raise DataFormatError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.25 * np.pi, 2.5 * np.pi, n)
    phi = rng.uniform(-2.0, 2.0, n)
    eps = rng.uniform(-noise, noise, (n, 3))
    radius = theta ** 0.8
    return PointCloud(np.column_stack([
        radius * np.cos(theta) + eps[:, 0],
        radius * np.sin(theta) + eps[:, 1],
        phi + eps[:, 2],
    ]))


def predator_mobbing(
    agents: int = 20,
    steps: int = 2000,
    rho: float = 14.0,
    noise_sd: float = 0.01,
    seed: int = 0,
) -> tuple[PointCloud, np.ndarray]:
    """Agents revolving on a translating circle around a moving predator.

    Agent i at time step k sits at
        r_i[k] = 3 * (cos(2 pi rho k / steps + pi i / N),
                      sin(2 pi rho k / steps + pi i / N)) + k * v_p + eps,
    with predator velocity v_p = (1, 1)/80 and per-coordinate Gaussian
    noise of standard deviation ``noise_sd``.

    Returns
    -------
    cloud : PointCloud
        One row per time step with 2 * agents coordinates ordered
        (y1, y2, ..., y_{2N}), agent-major.
    truth : (steps, 2) array
        First-agent track rotated clockwise by pi/4, the descriptive
        ground-truth observable.
    """
    if agents < 1 or steps < 1:
        raise DataFormatError("agents and steps must be at least 1")
    if noise_sd < 0:
        raise DataFormatError("noise_sd must be nonnegative")
    rng = np.random.default_rng(seed)
    k = np.arange(steps, dtype=float)
    i = np.arange(agents, dtype=float)
    phase = 2.0 * np.pi * rho * k[:, None] / steps + np.pi * i[None, :] / agents
    speed = 3.0
    vp = np.array([1.0, 1.0]) / 80.0
    positions = np.empty((steps, agents, 2))
    positions[:, :, 0] = speed * np.cos(phase)
    positions[:, :, 1] = speed * np.sin(phase)
    positions += k[:, None, None] * vp[None, None, :]
    positions += rng.normal(0.0, noise_sd, (steps, agents, 2))
    rot = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)
    truth = positions[:, 0, :] @ rot.T
    return PointCloud(positions.reshape(steps, 2 * agents)), truth


def generate(spec: GeneratorSpec) -> tuple[PointCloud, np.ndarray | None]:
    """Dispatch a GeneratorSpec; ground truth is None except for mobbing."""
    if spec.kind == "paraboloid":
        return paraboloid(spec.n, spec.noise, spec.seed), None
    if spec.kind == "swiss_roll":
        return noisy_swiss_roll(spec.n, spec.noise, spec.seed), None
    cloud, truth = predator_mobbing(spec.agents, spec.steps, spec.rho, spec.noise, spec.seed)
    return cloud, truth
