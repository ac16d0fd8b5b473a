"""Stieltjes transforms of the sample covariance of random features.

For a feature matrix ``F`` with ``E[F F^T] = K``, the matrix ``F^T F`` is a
generalized Wishart matrix ``(1/P) W K W^T``.  Its empirical Stieltjes
transform ``m_P(z) = (1/P) Tr (F^T F - z I)^{-1}`` concentrates, as ``P``
grows, around the deterministic ``m_tilde(z)`` solving

    gamma = mean_i( d_i * m / (1 + d_i * m) ) - gamma * z * m,

the unique solution inside the cone spanned by ``1`` and ``-1/z`` for
``Re(z) < 0``.  On the negative real axis it is the reciprocal of the
effective ridge: ``m_tilde(-lambda) = 1 / lambda_tilde(lambda, gamma)``.

The module also compares the averaged hat matrix
``A = F (F^T F + lambda I)^{-1} F^T`` against its deterministic limit
``K (K + lambda_tilde I)^{-1}`` through the eigenvalues of both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericError
from .features import SeedPolicy, StreamSampler, sample_gaussian_features
from .kernels import GramSpectrum, sqrt_gram
from .effective_ridge import SpectrumInput, solve_effective_ridge

FIXED_POINT_TOL = 1e-10
MAX_FP_ITERS = 100_000


@dataclass(frozen=True)
class WishartSample:
    """Eigenvalues of one draw of ``F^T F`` plus the stream seed that produced it."""

    eigenvalues: np.ndarray
    seed: int

    def __post_init__(self):
        d = np.asarray(self.eigenvalues, dtype=float).ravel()
        object.__setattr__(self, "eigenvalues", d)
        dmax = float(np.max(d)) if d.size else 0.0
        if np.any(d < -1e-10 * max(dmax, 1.0)):
            raise InvalidInputError("Wishart eigenvalues must be nonnegative")

    @property
    def n_features(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class StieltjesSolution:
    """Fixed point of the deterministic Stieltjes equation at one complex point.

    ``in_cone`` records membership in the cone spanned by ``1`` and ``-1/z``
    where the fixed point is unique; ``residual`` is ``|m - f_z(m)|``.
    """

    z: complex
    m_tilde: complex
    residual: float
    iterations: int
    in_cone: bool


def sample_wishart(kernel_eigenvalues: np.ndarray, P: int, policy: SeedPolicy) -> WishartSample:
    """Draw ``F^T F = (1/P) W diag(d) W^T`` and return its full spectrum.

    Only the kernel eigenvalues matter (Gaussian invariance under rotation),
    so sampling happens in the eigenbasis: the nonzero spectrum of the P x P
    matrix equals that of the small ``N x N`` Gram of ``(1/sqrt(P)) W sqrt(d)``,
    padded with ``P - N`` zeros when overparameterized.
    """
    d = np.asarray(kernel_eigenvalues, dtype=float).ravel()
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidInputError("kernel eigenvalues must be finite and nonnegative")
    if P < 1:
        raise InvalidInputError("need at least one feature")
    N = d.size
    W = StreamSampler(policy).normal((P, N))
    Y = W * np.sqrt(d / P)
    S = Y.T @ Y
    evals = np.linalg.eigvalsh(0.5 * (S + S.T))[::-1]
    evals = np.maximum(evals, 0.0)
    if P >= N:
        out = np.concatenate([evals, np.zeros(P - N)])
    else:
        out = evals[:P]
    return WishartSample(eigenvalues=out, seed=policy.stream_seed())


def empirical_stieltjes(sample: WishartSample, z: complex) -> complex:
    """``m_P(z) = (1/P) sum_p 1 / (lambda_p - z)`` for one sampled spectrum."""
    z = complex(z)
    if abs(z.imag) <= 1e-12 and z.real >= -1e-12:
        raise InvalidInputError("z must stay off the nonnegative real axis")
    return complex(np.mean(1.0 / (sample.eigenvalues - z)))


def _cone_membership(m: complex, z: complex) -> bool:
    """Whether m = u * 1 + v * (-1/z) with u, v >= 0 (up to rounding slack)."""
    w = -1.0 / z
    tol = 1e-9 * max(abs(m), 1e-300)
    if w.imag == 0.0:
        # Real negative z: the cone degenerates to the nonnegative real axis.
        return abs(m.imag) <= tol and m.real >= -tol
    v = m.imag / w.imag
    u = m.real - v * w.real
    slack = 1e-9 * (abs(m) + abs(v) * abs(w) + abs(u)) + 1e-300
    return u >= -slack and v * abs(w) >= -slack


def theoretical_stieltjes(
    kernel_eigenvalues: np.ndarray, gamma: float, z: complex
) -> StieltjesSolution:
    """Solve the deterministic fixed point for ``m_tilde(z)`` with ``Re(z) < 0``.

    On the real ray ``z = -lambda`` the real effective-ridge solver is used
    and reciprocated, which is exact to machine precision.  Off the axis the
    solution branch is tracked by continuation: starting from the known real
    solution at ``Re(z)``, the imaginary part is switched on in adaptive steps
    and a damped Newton iteration re-solves at every step.  Since the cone
    solution depends holomorphically on ``z``, path-following keeps the
    iterate on that branch; plain damped fixed-point iteration, in contrast,
    can stall or converge to a fixed point outside the cone for gamma < 1.
    Points with ``Re(z) >= 0`` are rejected.
    """
    d = np.asarray(kernel_eigenvalues, dtype=float).ravel()
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidInputError("kernel eigenvalues must be finite and nonnegative")
    if not np.isfinite(gamma) or gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    z = complex(z)
    if not z.real < 0:
        raise InvalidInputError("the fixed point is solved on Re(z) < 0 only")

    def f_at(zz, m):
        return -(1.0 / zz) * (1.0 - np.mean(d * m / (1.0 + d * m)) / gamma)

    def f_prime_at(zz, m):
        return (1.0 / (zz * gamma)) * np.mean(d / (1.0 + d * m) ** 2)

    lam = -z.real
    eff = solve_effective_ridge(SpectrumInput(eigenvalues=d, gamma=gamma, lam=lam))
    m = complex(1.0 / eff.lambda_tilde)
    if z.imag == 0.0:
        residual = abs(m - f_at(z, m))
        return StieltjesSolution(
            z=z, m_tilde=m, residual=float(residual), iterations=0, in_cone=_cone_membership(m, z)
        )

    def newton(zz, m0, max_iter=80):
        """Damped Newton on psi(m) = f(m) - m; returns (root, iterations) or None."""
        m = m0
        res = abs(f_at(zz, m) - m)
        for it in range(1, max_iter + 1):
            psi = f_at(zz, m) - m
            dpsi = f_prime_at(zz, m) - 1.0
            if dpsi == 0:
                return None
            step = -psi / dpsi
            scale = 1.0
            for _ in range(40):
                cand = m + scale * step
                cand_res = abs(f_at(zz, cand) - cand)
                if cand_res < res:
                    break
                scale *= 0.5
            else:
                return (m, it) if res <= 1e-13 * max(abs(m), 1.0) else None
            m, res = cand, cand_res
            if res <= np.finfo(float).eps * 4 * max(abs(m), 1.0):
                return m, it
        return (m, max_iter) if res <= 1e-13 * max(abs(m), 1.0) else None

    iterations = 0
    s = 0.0
    step = 1.0
    total_steps = 0
    while s < 1.0:
        if total_steps > MAX_FP_ITERS:
            raise NumericError(f"Stieltjes continuation did not reach z={z}")
        s_next = min(1.0, s + step)
        result = newton(complex(z.real, s_next * z.imag), m)
        if result is None:
            step *= 0.5
            if step < 1e-12:
                raise NumericError(f"Stieltjes continuation stalled at z={z}")
            total_steps += 1
            continue
        m, its = result
        iterations += its
        s = s_next
        step = min(1.0, step * 2.0)
        total_steps += 1

    residual = abs(m - f_at(z, m))
    if residual >= FIXED_POINT_TOL * max(abs(m), 1.0):
        raise NumericError(
            f"Stieltjes fixed point did not converge at z={z}: residual {residual:.3e}"
        )
    return StieltjesSolution(
        z=z,
        m_tilde=complex(m),
        residual=float(residual),
        iterations=iterations,
        in_cone=_cone_membership(complex(m), z),
    )


def expected_A_theoretical(kernel_eigenvalues: np.ndarray, lambda_tilde: float) -> np.ndarray:
    """Eigenvalues ``d_i / (d_i + lambda_tilde)`` of ``K (K + lambda_tilde I)^{-1}``, descending."""
    d = np.sort(np.asarray(kernel_eigenvalues, dtype=float).ravel())[::-1]
    if lambda_tilde <= 0:
        raise InvalidInputError("lambda_tilde must be positive")
    return d / (d + lambda_tilde)


def empirical_expected_A(
    spec: GramSpectrum, P: int, lam: float, trials: int, policy: SeedPolicy
) -> np.ndarray:
    """Monte Carlo eigenvalues of the averaged hat matrix ``E[F (F^T F + lam I)^{-1} F^T]``.

    Trials use consecutive stream seeds starting at ``policy``; the average is
    accumulated in trial order, symmetrized, and eigendecomposed.  The primal
    and dual forms of the hat matrix coincide; the ``N x N`` dual form
    ``G (G + lam I)^{-1}`` with ``G = F F^T`` is used when ``P > N``.
    """
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    if lam <= 0:
        raise InvalidInputError("ridge must be positive")
    N = spec.n
    root = sqrt_gram(spec)
    acc = np.zeros((N, N))
    for t in range(trials):
        F = sample_gaussian_features(root, P, N, policy.shifted(t)).train
        if P > N:
            G = F @ F.T
            A = np.linalg.solve(G + lam * np.eye(N), G).T
        else:
            inner = np.linalg.solve(F.T @ F + lam * np.eye(P), F.T)
            A = F @ inner
        acc += A
    acc /= trials
    acc = 0.5 * (acc + acc.T)
    return np.linalg.eigvalsh(acc)[::-1]


def stieltjes_moments(
    kernel_eigenvalues: np.ndarray,
    P: int,
    z: complex,
    trials: int,
    policy: SeedPolicy,
) -> tuple[complex, float]:
    """Mean and variance of ``m_P(z)`` over independent Wishart draws.

    Variance is the scalar sample variance of the complex values,
    ``mean(|m - mean|^2)`` with the ``1/(trials-1)`` normalization.
    """
    if trials < 2:
        raise InvalidInputError("need at least two trials for a variance")
    vals = np.empty(trials, dtype=complex)
    for t in range(trials):
        sample = sample_wishart(kernel_eigenvalues, P, policy.shifted(t))
        vals[t] = empirical_stieltjes(sample, z)
    mean = complex(np.mean(vals))
    var = float(np.sum(np.abs(vals - mean) ** 2) / (trials - 1))
    return mean, var
