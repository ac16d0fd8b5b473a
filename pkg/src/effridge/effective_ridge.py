"""Effective ridge of random-feature regression.

Drawing ``P = gamma * N`` random features instead of using the full kernel
implicitly increases the ridge: the average random-feature predictor with
ridge ``lambda`` behaves like kernel ridge regression with the larger
*effective ridge* ``lambda_tilde``, the unique positive root of

    t = lambda + (t / gamma) * (1/N) * sum_i d_i / (t + d_i)

where ``d_i`` are the Gram eigenvalues.  This module solves that fixed point,
differentiates it in ``lambda``, evaluates the associated effective dimension,
handles the ridgeless limits on both sides of ``gamma = 1``, inverts the map
(ridge calibration), and assembles the leading variance term built from these
quantities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtThresholdError, InfeasibleTargetError, InvalidInputError, NumericError
from .kernels import GramSpectrum

MAX_NEWTON_ITERS = 200
# Contractual residual bound on the defining equation; the solver actually
# polishes to machine precision.
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class SpectrumInput:
    """Gram eigenvalues together with the ratio gamma = P/N and the ridge."""

    eigenvalues: np.ndarray
    gamma: float
    lam: float

    def __post_init__(self):
        d = np.asarray(self.eigenvalues, dtype=float).ravel()
        object.__setattr__(self, "eigenvalues", d)
        if d.size < 1 or not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InvalidInputError("eigenvalues must be finite and nonnegative")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidInputError("gamma must be positive")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise InvalidInputError("ridge must be nonnegative")

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def trace_mean(self) -> float:
        return float(np.mean(self.eigenvalues))


@dataclass(frozen=True)
class EffectiveRidge:
    """Solved effective ridge and the derived quantities used everywhere else.

    ``residual`` is the defining-equation residual at the returned root;
    ``effective_dimension`` equals ``sum_i d_i / (lambda_tilde + d_i)``, which
    coincides with ``P (1 - lambda / lambda_tilde)``.
    """

    lambda_tilde: float
    d_lambda_tilde: float
    effective_dimension: float
    residual: float
    gamma: float
    lam: float


def _fixed_point_residual(t: float, d: np.ndarray, gamma: float, lam: float) -> float:
    """g(t) = t - lam - (t/gamma) * mean(d / (t + d)); the root is the effective ridge."""
    return t - lam - (t / gamma) * float(np.mean(d / (t + d)))


def _fixed_point_slope(t: float, d: np.ndarray, gamma: float) -> float:
    # g'(t) = 1 - (1/gamma) * mean(d/(t+d)) + (t/gamma) * mean(d/(t+d)^2)
    s1 = float(np.mean(d / (t + d)))
    s2 = float(np.mean(d / (t + d) ** 2))
    return 1.0 - s1 / gamma + t * s2 / gamma


def _safeguarded_newton(func, slope, lo: float, hi: float) -> float:
    """Root of a monotone-crossing function on [lo, hi]: Newton with bisection fallback.

    Iterates until the step stalls at machine precision so downstream
    identities (derivative, effective dimension, calibration round trips)
    inherit full accuracy.
    """
    flo = func(lo)
    fhi = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0 or fhi < 0:
        raise NumericError("root bracket is invalid; no sign change")
    t = 0.5 * (lo + hi)
    for _ in range(MAX_NEWTON_ITERS):
        f = func(t)
        if f > 0:
            hi = t
        elif f < 0:
            lo = t
        else:
            return t
        df = slope(t)
        step_ok = df > 0
        if step_ok:
            t_new = t - f / df
            step_ok = lo < t_new < hi
        if not step_ok:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= 4.0 * np.finfo(float).eps * max(abs(t), abs(t_new)):
            return t_new
        t = t_new
    return t


def solve_effective_ridge(inp: SpectrumInput) -> EffectiveRidge:
    """Solve the defining fixed point for the effective ridge.

    For ``lam > 0`` the root is bracketed in ``[lam, lam + T/gamma]`` with
    ``T`` the mean eigenvalue.  For ``lam = 0`` the ridgeless limits apply:
    zero in the overparameterized regime (gamma > 1), the positive root of
    ``gamma = mean(d / (t + d))`` in the underparameterized regime
    (gamma < 1), and no finite answer exactly at gamma = 1.
    """
    d = inp.eigenvalues
    gamma, lam = inp.gamma, inp.lam
    T = inp.trace_mean

    if lam == 0.0:
        lt = ridgeless_limit(d, gamma)
        if lt == 0.0:
            # Overparameterized ridgeless: the defining equation is satisfied
            # identically at t = 0, with derivative gamma / (gamma - 1).
            return EffectiveRidge(
                lambda_tilde=0.0,
                d_lambda_tilde=gamma / (gamma - 1.0),
                effective_dimension=effective_dimension(d, 0.0),
                residual=0.0,
                gamma=gamma,
                lam=0.0,
            )
        lambda_tilde = lt
    elif T == 0.0:
        # All-zero spectrum collapses the equation to t = lam.
        lambda_tilde = lam
    else:
        lambda_tilde = _safeguarded_newton(
            lambda t: _fixed_point_residual(t, d, gamma, lam),
            lambda t: _fixed_point_slope(t, d, gamma),
            lam,
            lam + T / gamma,
        )

    residual = _fixed_point_residual(lambda_tilde, d, gamma, lam) if lambda_tilde > 0 else 0.0
    if abs(residual) >= RESIDUAL_TOL * max(lambda_tilde, 1.0):
        raise NumericError(
            f"effective-ridge solve did not converge: residual {residual:.3e} at {lambda_tilde:.6e}"
        )
    return EffectiveRidge(
        lambda_tilde=float(lambda_tilde),
        d_lambda_tilde=effective_ridge_derivative(inp, lambda_tilde),
        effective_dimension=effective_dimension(d, lambda_tilde),
        residual=float(residual),
        gamma=gamma,
        lam=lam,
    )


def effective_ridge_derivative(inp: SpectrumInput, lambda_tilde: float) -> float:
    """Closed-form derivative of the effective ridge with respect to the ridge.

    Differentiating the defining equation gives

        d(lambda_tilde)/d(lambda)
            = 1 / (1 - (1/gamma) mean(d/(t+d)) + (t/gamma) mean(d/(t+d)^2))

    at ``t = lambda_tilde``.  The denominator is positive whenever ``t``
    solves the equation, so a nonpositive value signals an inconsistent input.
    """
    d = inp.eigenvalues
    gamma = inp.gamma
    if lambda_tilde < 0:
        raise InvalidInputError("lambda_tilde must be nonnegative")
    if lambda_tilde == 0.0:
        positive = d > 0
        s1 = float(np.mean(positive.astype(float)))
        denom = 1.0 - s1 / gamma
    else:
        denom = _fixed_point_slope(lambda_tilde, d, gamma)
    if denom <= 0:
        raise NumericError("derivative denominator is nonpositive; lambda_tilde does not solve the fixed point")
    return 1.0 / denom


def effective_dimension(eigenvalues: np.ndarray, lambda_tilde: float) -> float:
    """Effective dimension ``sum_i d_i / (lambda_tilde + d_i)``.

    Zero eigenvalues contribute nothing, including in the ridgeless limit
    ``lambda_tilde = 0`` where each positive eigenvalue contributes one.
    """
    d = np.asarray(eigenvalues, dtype=float).ravel()
    if lambda_tilde < 0:
        raise InvalidInputError("lambda_tilde must be nonnegative")
    positive = d > 0
    out = np.zeros_like(d)
    out[positive] = d[positive] / (lambda_tilde + d[positive])
    return float(np.sum(out))


def ridgeless_limit(eigenvalues: np.ndarray, gamma: float) -> float:
    """Limit of the effective ridge as the explicit ridge vanishes.

    Overparameterized (gamma > 1): 0.  Underparameterized (gamma < 1): the
    unique positive root of ``gamma = mean(d / (t + d))``, which requires a
    strictly positive spectrum.  gamma = 1 sits at the interpolation
    threshold, where no finite limit exists.
    """
    d = np.asarray(eigenvalues, dtype=float).ravel()
    if not np.isfinite(gamma) or gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    if gamma == 1.0:
        raise AtThresholdError("ridgeless effective ridge is degenerate at gamma = 1")
    if gamma > 1.0:
        return 0.0
    if d.size < 1 or np.any(d <= 0):
        raise InvalidInputError("underparameterized ridgeless limit needs a strictly positive spectrum")
    T = float(np.mean(d))
    dmin = float(np.min(d))
    # Analytic lower bound dmin * (1 - sqrt(gamma)) / sqrt(gamma), shrunk
    # slightly so the bracket endpoint sits strictly below the root; halve
    # further if rounding still leaves the residual nonnegative there.
    lo = dmin * (1.0 - np.sqrt(gamma)) / np.sqrt(gamma) * (1.0 - 1e-9)
    func = lambda t: gamma - float(np.mean(d / (t + d)))
    while lo > 0 and func(lo) >= 0:
        lo *= 0.5
    if lo <= 0:
        lo = np.finfo(float).tiny
    hi = T / gamma
    slope = lambda t: float(np.mean(d / (t + d) ** 2))
    return float(_safeguarded_newton(func, slope, lo, hi))


def calibrate_ridge(eigenvalues: np.ndarray, gamma: float, lambda_star: float) -> float:
    """Explicit ridge whose effective ridge equals the target ``lambda_star``.

    Inverts the defining equation directly:

        lambda = lambda_star - (lambda_star / gamma) * mean(d / (lambda_star + d)).

    A nonpositive result means the target sits at or below the ridgeless
    effective ridge for this gamma and cannot be reached.
    """
    d = np.asarray(eigenvalues, dtype=float).ravel()
    if not np.isfinite(gamma) or gamma <= 0:
        raise InvalidInputError("gamma must be positive")
    if not np.isfinite(lambda_star) or lambda_star <= 0:
        raise InvalidInputError("target effective ridge must be positive")
    lam = lambda_star - (lambda_star / gamma) * float(np.mean(d / (lambda_star + d)))
    if lam <= 0:
        raise InfeasibleTargetError(
            f"target {lambda_star:.6g} is below the ridgeless effective ridge for gamma={gamma:.6g}"
        )
    return float(lam)


def theoretical_variance_term(
    spec: GramSpectrum,
    y: np.ndarray,
    inp: SpectrumInput,
    k_tilde_xx: float,
    P: int,
) -> float:
    """Leading term of the predictor-variance lower bound at one test point.

    Evaluates ``d(lambda_tilde)/d(lambda) * (y^T M y / P) * Ktilde(x, x)``
    with ``M = K (K + lambda_tilde I)^{-2}``, all in the Gram eigenbasis.
    """
    if k_tilde_xx < 0:
        raise InvalidInputError("posterior variance must be nonnegative")
    eff = solve_effective_ridge(inp)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != spec.n:
        raise InvalidInputError("label vector length does not match the spectrum")
    w = spec.eigenvectors.T @ y
    d = spec.eigenvalues
    m_quad = float(np.sum(d * w * w / (eff.lambda_tilde + d) ** 2))
    return eff.d_lambda_tilde * m_quad / P * k_tilde_xx


def theta_norm_theory(spec: GramSpectrum, y: np.ndarray, eff: EffectiveRidge) -> float:
    """Predicted mean squared parameter norm, ``d(lt)/d(l) * y^T K (K + lt I)^{-2} y``."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != spec.n:
        raise InvalidInputError("label vector length does not match the spectrum")
    w = spec.eigenvectors.T @ y
    d = spec.eigenvalues
    return eff.d_lambda_tilde * float(np.sum(d * w * w / (eff.lambda_tilde + d) ** 2))
