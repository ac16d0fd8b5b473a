"""Reproducible sampling of random feature matrices.

Two feature families are supported:

* Gaussian features with covariance equal to a kernel Gram matrix, realized
  as ``(1/sqrt(P)) * Kbar^{1/2} W^T`` for a standard normal ``W``;
* random Fourier features ``sqrt(2/P) * cos(x^T w + b)`` whose expected Gram
  is the RBF kernel.

Randomness contract
-------------------
Every draw is a pure function of a :class:`SeedPolicy`.  The per-trial stream
seed is the ``(trial_index + 1)``-th output of the SplitMix64 generator seeded
with ``base_seed``; that seed keys a Philox4x64 counter-based generator, and
uniforms/normals are produced from its raw 64-bit outputs by ``(r >> 11) *
2^-53`` and the Box-Muller transform.  All three pieces are published, fixed
algorithms, so identical seeds give bit-identical matrices on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood 2014)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_stream_seed(base_seed: int, trial_index: int) -> int:
    """64-bit stream seed for one trial: SplitMix64 output #``trial_index`` of ``base_seed``."""
    if trial_index < 0:
        raise InvalidInputError("trial_index must be nonnegative")
    state = (base_seed + (trial_index + 1) * _SPLITMIX_GAMMA) & _MASK64
    return _mix64(state)


@dataclass(frozen=True)
class SeedPolicy:
    """Base seed plus trial index; the unit of reproducibility.

    Distinct trial indices give independent streams; the same pair is
    bit-reproducible.  Multi-trial drivers shift ``trial_index`` by the trial
    number, so a policy also acts as an offset into a family of streams.
    """

    base_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not (0 <= self.base_seed <= _MASK64):
            raise InvalidInputError("base_seed must fit in 64 unsigned bits")
        if self.trial_index < 0:
            raise InvalidInputError("trial_index must be nonnegative")

    def shifted(self, offset: int) -> "SeedPolicy":
        return SeedPolicy(self.base_seed, self.trial_index + offset)

    def stream_seed(self) -> int:
        return derive_stream_seed(self.base_seed, self.trial_index)


class StreamSampler:
    """Uniform and normal variates from a Philox stream keyed by a SeedPolicy."""

    def __init__(self, policy: SeedPolicy):
        seed = policy.stream_seed()
        # Philox4x64 takes a 128-bit key; the upper word is a mix of the lower.
        key = np.array([seed, _mix64(seed)], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def uniform(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1), each from the top 53 bits of one raw draw."""
        raw = self._bitgen.random_raw(n)
        return (raw >> np.uint64(11)) * (2.0 ** -53)

    def normal(self, shape) -> np.ndarray:
        """Standard normals via Box-Muller on consecutive uniform pairs."""
        n = int(np.prod(shape))
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1, u2 = u[:pairs], u[pairs:]
        # 1 - u1 lies in (0, 1], so the log is finite.
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return z.reshape(shape)


@dataclass(frozen=True)
class FeatureMatrix:
    """Sampled feature values on train and test points, already ``1/sqrt(P)`` scaled.

    ``entries[i, j]`` is the j-th feature at point i divided by ``sqrt(P)``,
    so the train block ``F`` satisfies ``E[F F^T] = K(X, X)``.
    """

    entries: np.ndarray
    n_train: int
    seed: int

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise InvalidInputError("feature matrix must be 2-D")
        if not (0 <= self.n_train <= self.entries.shape[0]):
            raise InvalidInputError("n_train out of range")

    @property
    def n_features(self) -> int:
        return self.entries.shape[1]

    @property
    def train(self) -> np.ndarray:
        return self.entries[: self.n_train]

    @property
    def test(self) -> np.ndarray:
        return self.entries[self.n_train :]


def sample_gaussian_features(
    joint_sqrt: np.ndarray, P: int, n_train: int, policy: SeedPolicy
) -> FeatureMatrix:
    """Draw ``(1/sqrt(P)) * joint_sqrt @ W^T`` with ``W`` standard normal of shape (P, M).

    ``joint_sqrt`` is the symmetric PSD square root of the Gram matrix over all
    train and test points jointly, computed once per experiment and reused
    across trials.
    """
    if P < 1:
        raise InvalidInputError("need at least one feature")
    joint_sqrt = np.asarray(joint_sqrt, dtype=float)
    M = joint_sqrt.shape[0]
    if joint_sqrt.shape != (M, M):
        raise InvalidInputError("joint_sqrt must be square")
    if not (0 <= n_train <= M):
        raise InvalidInputError("n_train exceeds the point count")
    W = StreamSampler(policy).normal((P, M))
    entries = (joint_sqrt @ W.T) / np.sqrt(P)
    return FeatureMatrix(entries=entries, n_train=n_train, seed=policy.stream_seed())


def sample_fourier_features(
    X_all: np.ndarray, lengthscale: float, P: int, policy: SeedPolicy, n_train: int | None = None
) -> FeatureMatrix:
    """Random Fourier features for the RBF kernel with the given lengthscale.

    Frequencies ``w`` have i.i.d. centered normal coordinates with standard
    deviation ``sqrt(2 / lengthscale)``; phases ``b`` are uniform on
    ``[0, 2*pi)``; entries are ``sqrt(2/P) * cos(x^T w + b)``.  The sqrt(2/P)
    scaling is the whole normalization (it plays the role of the generic
    ``1/sqrt(P)`` with features ``sqrt(2) cos(...)``), which makes the
    expected Gram exactly the RBF kernel.

    Stream order: all P*d frequency normals first, then the P phase uniforms.
    ``n_train`` marks how many leading rows of ``X_all`` are training points;
    by default all of them are.
    """
    if P < 1:
        raise InvalidInputError("need at least one feature")
    if not np.isfinite(lengthscale) or lengthscale <= 0:
        raise InvalidInputError("lengthscale must be positive")
    X_all = np.atleast_2d(np.asarray(X_all, dtype=float))
    M, d = X_all.shape
    sampler = StreamSampler(policy)
    w = sampler.normal((P, d)) * np.sqrt(2.0 / lengthscale)
    b = sampler.uniform(P) * (2.0 * np.pi)
    entries = np.sqrt(2.0 / P) * np.cos(X_all @ w.T + b)
    return FeatureMatrix(entries=entries, n_train=M if n_train is None else n_train, seed=policy.stream_seed())


def empirical_kernel(F: FeatureMatrix) -> np.ndarray:
    """Kernel estimate ``(1/P) sum_j phi_j(x) phi_j(x')``, i.e. ``Fbar @ Fbar^T``."""
    E = F.entries
    G = E @ E.T
    return 0.5 * (G + G.T)
