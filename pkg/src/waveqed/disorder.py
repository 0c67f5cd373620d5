"""Reproducible disorder configurations and deterministic averaging.

Every configuration is a pure function of (seed, index): the generator for
configuration i is keyed by SeedSequence((seed, i)), so streams never
depend on evaluation order or worker count.  Averages accumulate in a
fixed reduction order (numpy pairwise sums inside fixed-size chunks taken
in index order, chunk partials added sequentially), which makes the mean
bitwise-stable for a given (seed, n_configs) regardless of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .physics import BETA_DEFAULT, EnsembleSpec

PHASE_LAWS = ("uniform", "bragg")
CHUNK_SIZE = 64  # configurations per reduction chunk; fixed for determinism


@dataclass(frozen=True)
class DisorderModel:
    """Random ensemble family: coupling fluctuations and positional phases.

    phase_law "uniform" draws theta_n i.i.d. on [0, 2pi); "bragg" pins all
    phases to bragg_phase.  beta_spread is the fractional standard
    deviation of the per-atom coupling (0 keeps beta fixed); samples are
    clipped into (0, 0.5].
    """

    n_atoms: int
    beta_mean: float = BETA_DEFAULT
    beta_spread: float = 0.0
    phase_law: str = "uniform"
    bragg_phase: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be positive, got {self.n_atoms}")
        if not 0.0 < self.beta_mean <= 0.5:
            raise ValueError("beta_mean must lie in (0, 0.5]")
        if self.beta_spread < 0:
            raise ValueError("beta_spread must be non-negative")
        if self.phase_law not in PHASE_LAWS:
            raise ValueError(f"phase_law must be one of {PHASE_LAWS}, got {self.phase_law!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def sample_configuration(model: DisorderModel, index: int) -> EnsembleSpec:
    """Deterministic configuration number ``index`` of the disorder model."""
    index = int(index)
    if index < 0:
        raise ValueError(f"configuration index must be non-negative, got {index}")
    rng = np.random.default_rng(np.random.SeedSequence((model.seed, index)))
    if model.beta_spread > 0:
        beta = model.beta_mean * (1.0 + model.beta_spread * rng.standard_normal(model.n_atoms))
        beta = np.clip(beta, 1e-12, 0.5)
    else:
        beta = np.full(model.n_atoms, model.beta_mean)
    if model.phase_law == "uniform":
        phase = rng.uniform(0.0, 2.0 * math.pi, model.n_atoms)
    else:
        phase = np.full(model.n_atoms, model.bragg_phase % (2.0 * math.pi))
    return EnsembleSpec(beta=beta, phase=phase, shift=np.zeros(model.n_atoms))


def _chunk_sums(model, observable, start, stop, shape, dtype):
    block = np.empty((stop - start,) + shape, dtype=dtype)
    for k, index in enumerate(range(start, stop)):
        value = np.asarray(observable(sample_configuration(model, index)))
        if value.shape != shape:
            raise ValueError(
                f"observable shape changed: configuration {index} returned {value.shape}, "
                f"expected {shape}"
            )
        block[k] = value
    return np.sum(block, axis=0), np.sum(np.abs(block) ** 2, axis=0)


def average_observable(model: DisorderModel, n_configs: int, observable,
                       n_workers: int = 1, chunk_size: int = None):
    """Mean and standard error of an array-valued observable over disorder.

    observable maps an EnsembleSpec to an array of fixed shape.  Results
    are independent of n_workers and of evaluation order by construction:
    the chunk layout depends only on n_configs.
    """
    n_configs = int(n_configs)
    if n_configs < 1:
        raise ValueError("n_configs must be positive")
    if chunk_size is None:
        chunk_size = max(1, min(CHUNK_SIZE, -(-n_configs // 32)))
    first = np.asarray(observable(sample_configuration(model, 0)))
    shape, dtype = first.shape, first.dtype

    bounds = [(s, min(s + chunk_size, n_configs)) for s in range(0, n_configs, chunk_size)]

    def run(bound):
        return _chunk_sums(model, observable, bound[0], bound[1], shape, dtype)

    if n_workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=int(n_workers)) as pool:
            partials = list(pool.map(run, bounds))
    else:
        partials = [run(b) for b in bounds]

    total = np.zeros(shape, dtype=partials[0][0].dtype)
    total_sq = np.zeros(shape)
    for part_sum, part_sq in partials:  # sequential, fixed chunk order
        total = total + part_sum
        total_sq = total_sq + part_sq

    mean = total / n_configs
    if n_configs > 1:
        var = (total_sq - n_configs * np.abs(mean) ** 2) / (n_configs - 1)
        stderr = np.sqrt(np.clip(var, 0.0, None) / n_configs)
    else:
        stderr = np.zeros(shape)
    return mean, stderr
