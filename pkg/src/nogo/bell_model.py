"""Bell's hidden-variable model for a single qubit.

A pure state is the +1 eigenvector of ``n . sigma`` for a unit vector
``n``. Its hidden variable is a unit vector ``m`` drawn uniformly from the
sphere; given ``m``, every observable ``a0*I + a . sigma`` has the definite
value ``a0 + |a|`` when ``(m + n) . a >= 0`` and ``a0 - |a|`` otherwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .operator_core import IDENTITY2, PAULI, is_effect, joint_spectrum

UNIT_TOL = 1e-9


def _unit(v, name="vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    if abs(np.linalg.norm(v) - 1) > UNIT_TOL:
        raise ValueError(f"{name} must have unit length, got norm {np.linalg.norm(v):.6g}")
    return v


@dataclass(frozen=True)
class BellConfig:
    """State direction ``n`` and hidden label ``m``, both unit 3-vectors."""

    n: tuple
    m: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(_unit(self.n, "n")))
        object.__setattr__(self, "m", tuple(_unit(self.m, "m")))


@dataclass(frozen=True)
class Observable2D:
    """The qubit observable ``a0*I + a . sigma``."""

    a0: float
    a: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if len(a) != 3:
            raise ValueError("a must be a 3-vector")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a0", float(self.a0))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return self.a0 - self.norm, self.a0 + self.norm

    def operator(self) -> np.ndarray:
        return self.a0 * IDENTITY2 + sum(c * s for c, s in zip(self.a, PAULI))


def assign_value(cfg: BellConfig, obs: Observable2D) -> float:
    """Value of ``obs`` in the sub-ensemble labelled by ``cfg.m``; ties go to the + branch."""
    s = float(np.dot(np.add(cfg.m, cfg.n), obs.a))
    return obs.a0 + obs.norm if s >= 0 else obs.a0 - obs.norm


def expectation_exact(n, obs: Observable2D) -> float:
    """Quantum expectation ``a0 + a . n``."""
    return obs.a0 + float(np.dot(_unit(n, "n"), obs.a))


def plus_probability(n, obs: Observable2D) -> float:
    """Probability of the upper eigenvalue, ``(1 + a_hat . n) / 2``."""
    if obs.norm == 0:
        return 1.0
    return (1 + float(np.dot(_unit(n, "n"), obs.a)) / obs.norm) / 2


def sample_sphere(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` points uniform on the unit sphere (normalized Gaussians)."""
    g = rng.standard_normal((size, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _values(n: np.ndarray, m: np.ndarray, obs: Observable2D) -> np.ndarray:
    s = (m + n) @ np.asarray(obs.a)
    return np.where(s >= 0, obs.a0 + obs.norm, obs.a0 - obs.norm)


def monte_carlo(n, obs: Observable2D, samples: int, seed: int = 0, chunk: int = 1 << 18) -> dict:
    """Sample statistics of the assigned value over uniform hidden labels.

    Returns the mean and its standard error, plus the frequency of the upper
    eigenvalue and that frequency's standard error. Chunks draw from one
    generator in sequence, so results depend only on ``seed``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n = _unit(n, "n")
    rng = np.random.default_rng(seed)
    total = total_sq = plus = 0.0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        vals = _values(n, sample_sphere(rng, k), obs)
        total += vals.sum()
        total_sq += np.square(vals).sum()
        plus += np.count_nonzero(vals == obs.a0 + obs.norm) if obs.norm > 0 else k
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    freq = plus / samples
    return {
        "mean": mean,
        "std_error": np.sqrt(var / samples),
        "plus_frequency": freq,
        "plus_std_error": np.sqrt(freq * (1 - freq) / samples),
        "samples": samples,
    }


def expectation_monte_carlo(n, obs: Observable2D, samples: int, seed: int = 0) -> tuple[float, float]:
    """``(mean, std_error)`` of the assigned value; deterministic given ``seed``."""
    r = monte_carlo(n, obs, samples, seed)
    return r["mean"], r["std_error"]


def commuting(obs1: Observable2D, obs2: Observable2D, tol: float = 1e-10) -> bool:
    """Qubit observables commute iff their vector parts are parallel, antiparallel or zero."""
    return float(np.linalg.norm(np.cross(obs1.a, obs2.a))) <= tol * max(1.0, obs1.norm * obs2.norm)


def check_value_map_property(cfg: BellConfig, obs1: Observable2D, obs2: Observable2D) -> bool:
    """Whether the pair of assigned values lies in the joint spectrum of the two operators."""
    if not commuting(obs1, obs2):
        raise ValueError("observables do not commute")
    js = joint_spectrum([obs1.operator(), obs2.operator()])
    return (assign_value(cfg, obs1), assign_value(cfg, obs2)) in js


def second_moment_matrix(mixture) -> np.ndarray:
    """Closed form of ``E[(n + m)(n + m)^T]`` with ``n`` from the mixture and ``m`` uniform.

    ``mixture`` is a sequence of ``(weight, unit 3-vector)``; since
    ``E[m] = 0`` and ``E[m m^T] = I/3`` this is ``sum_i w_i n_i n_i^T + I/3``.
    """
    weights, dirs = _check_mixture(mixture)
    return np.einsum("k,ki,kj->ij", weights, dirs, dirs) + np.eye(3) / 3


def sample_sphere_qmc(size: int, seed: int = 0) -> np.ndarray:
    """Scrambled Sobol points mapped to the unit sphere.

    Uses the area-preserving map ``z = 2u - 1``, ``phi = 2 pi v``: the
    height of a uniform point on the sphere is uniform on [-1, 1].
    """
    with warnings.catch_warnings():
        # balance is only exact at powers of two; other sizes are still unbiased
        warnings.simplefilter("ignore", UserWarning)
        u = qmc.Sobol(d=2, scramble=True, seed=seed).random(size)
    z = 2 * u[:, 0] - 1
    phi = 2 * np.pi * u[:, 1]
    r = np.sqrt(np.clip(1 - z * z, 0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def second_moment_monte_carlo(mixture, samples: int, seed: int = 0, sampler: str = "qmc") -> np.ndarray:
    """Sampled estimate of :func:`second_moment_matrix`.

    ``sampler="iid"`` draws the mixture component and ``m`` independently;
    ``sampler="qmc"`` allocates samples to components in proportion to the
    weights and uses :func:`sample_sphere_qmc` for ``m``.
    """
    weights, dirs = _check_mixture(mixture)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if sampler == "iid":
        rng = np.random.default_rng(seed)
        which = rng.choice(len(weights), size=samples, p=weights)
        lam = dirs[which] + sample_sphere(rng, samples)
        return lam.T @ lam / samples
    if sampler != "qmc":
        raise ValueError(f"unknown sampler {sampler!r}")
    out = np.zeros((3, 3))
    m = sample_sphere_qmc(samples, seed)
    for w, n in zip(weights, dirs):
        lam = n + m
        out += w * (lam.T @ lam) / samples
    return out


def _check_mixture(mixture):
    weights = np.array([w for w, _ in mixture], dtype=float)
    if weights.size == 0 or (weights < 0).any() or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    dirs = np.array([_unit(n, "mixture direction") for _, n in mixture])
    return weights, dirs


def mixture_state(mixture) -> np.ndarray:
    """Density matrix ``sum_i w_i (I + n_i . sigma)/2`` of a mixture."""
    weights, dirs = _check_mixture(mixture)
    bloch = weights @ dirs
    return (IDENTITY2 + sum(c * s for c, s in zip(bloch, PAULI))) / 2


def trivial_state_model(E, psi) -> float:
    """Response ``<psi|E|psi>`` of the model whose hidden variable is the state itself."""
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > UNIT_TOL:
        raise ValueError("psi must be a unit vector")
    if not is_effect(E):
        raise ValueError("E is not an effect")
    return float(np.vdot(psi, np.asarray(E, dtype=complex) @ psi).real)
