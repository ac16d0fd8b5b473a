"""Monte Carlo harness: repeated random-feature fits and the statistics compared to theory.

Each trial draws a fresh feature matrix (jointly over train and test points),
fits the ridge solution, and evaluates it on the test grid.  Moments are
accumulated with Welford updates in fixed trial order, so results are
deterministic, numerically stable, and reproducible from the configuration
alone.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .effective_ridge import EffectiveRidge, theta_norm_theory
from .errors import EffridgeError, InvalidInputError
from .features import SeedPolicy, sample_fourier_features, sample_gaussian_features
from .kernels import Dataset, GramSpectrum, KernelSpec, gram_matrix, spectral_decompose, sqrt_gram
from .predictors import fit_rf, predict_rf


@dataclass(frozen=True)
class TrialStats:
    """Running moments of the sampled predictor across trials.

    Variance fields hold sample variances (``ddof=1``) and are ``None`` when
    only one trial was run.  ``config_digest`` fingerprints the generating
    configuration so downstream reports can assert provenance.
    """

    mean_prediction: np.ndarray
    var_prediction: np.ndarray | None
    mean_theta_norm_sq: float
    var_theta_norm_sq: float | None
    mean_train_prediction: np.ndarray
    trials: int
    config_digest: str


@dataclass(frozen=True)
class RiskReport:
    """Bias-variance split of the expected test risk over feature sampling.

    ``expected_risk`` is the sum of the risk of the mean predictor and the
    mean predictor variance; ``discrepancy`` is ``expected_risk - krr_risk``.
    """

    risk_of_mean: float
    mean_variance: float
    expected_risk: float
    krr_risk: float
    discrepancy: float


class _Welford:
    """Streaming mean / second central moment for scalars or fixed-shape vectors."""

    def __init__(self, shape):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def add(self, value):
        self.count += 1
        delta = value - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (value - self.mean)

    def variance(self):
        if self.count < 2:
            return None
        return self.m2 / (self.count - 1)


def config_digest(**fields) -> str:
    """Stable 16-hex-digit fingerprint of a trial configuration."""
    payload = json.dumps(fields, sort_keys=True, default=repr).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def run_trials(
    dataset: Dataset,
    test_X: np.ndarray,
    kernel: KernelSpec,
    P: int,
    lam: float,
    trials: int,
    base_seed: int,
    feature_kind: str = "gaussian",
) -> TrialStats:
    """Fit the random-feature predictor across seeds and accumulate its moments.

    Trial ``t`` uses the stream derived from ``(base_seed, t)``.  Gaussian
    features share one joint Gram square root computed up front; Fourier
    features resample frequencies and phases per trial.
    """
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    if P < 1:
        raise InvalidInputError("need at least one feature")
    if feature_kind not in ("gaussian", "fourier"):
        raise InvalidInputError(f"unknown feature kind {feature_kind!r}")
    if kernel.kind != "rbf":
        raise InvalidInputError("run_trials needs an evaluable kernel to build the joint Gram")
    test_X = np.atleast_2d(np.asarray(test_X, dtype=float))
    if test_X.shape[1] != dataset.dim:
        raise InvalidInputError("test points and training points have different dimension")
    N = dataset.n
    X_all = np.vstack([dataset.X, test_X])

    joint_root = None
    if feature_kind == "gaussian":
        joint_root = sqrt_gram(spectral_decompose(gram_matrix(kernel, X_all)))

    digest = config_digest(
        n_train=N,
        n_test=test_X.shape[0],
        kernel=(kernel.kind, kernel.lengthscale),
        P=P,
        lam=lam,
        trials=trials,
        base_seed=base_seed,
        feature_kind=feature_kind,
    )

    test_acc = _Welford(test_X.shape[0])
    train_acc = _Welford(N)
    norm_acc = _Welford(())
    for t in range(trials):
        policy = SeedPolicy(base_seed, t)
        try:
            if feature_kind == "gaussian":
                feats = sample_gaussian_features(joint_root, P, N, policy)
            else:
                feats = sample_fourier_features(X_all, kernel.lengthscale, P, policy, n_train=N)
            model = fit_rf(feats.train, dataset.y, lam)
            preds = predict_rf(model, feats.test)
        except EffridgeError as exc:
            raise type(exc)(f"trial {t}: {exc}") from exc
        test_acc.add(preds)
        train_acc.add(model.train_predictions)
        norm_acc.add(model.theta_norm_sq)

    var_pred = test_acc.variance()
    var_norm = norm_acc.variance()
    return TrialStats(
        mean_prediction=test_acc.mean,
        var_prediction=None if var_pred is None else np.maximum(var_pred, 0.0),
        mean_theta_norm_sq=float(norm_acc.mean),
        var_theta_norm_sq=None if var_norm is None else float(max(var_norm, 0.0)),
        mean_train_prediction=train_acc.mean,
        trials=trials,
        config_digest=digest,
    )


def estimate_risk(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error over the empirical test measure."""
    predictions = np.asarray(predictions, dtype=float).ravel()
    targets = np.asarray(targets, dtype=float).ravel()
    if predictions.shape != targets.shape:
        raise InvalidInputError("prediction and target lengths differ")
    return float(np.mean((predictions - targets) ** 2))


def bias_variance_decompose(stats: TrialStats, f_star: np.ndarray, krr_risk: float = float("nan")) -> RiskReport:
    """Split the expected risk into the risk of the mean predictor plus mean variance.

    The identity ``expected_risk = risk_of_mean + mean_variance`` holds by
    construction on the empirical moments.  ``krr_risk`` is carried through
    for reporting; pass the risk of the matching kernel predictor when known.
    """
    f_star = np.asarray(f_star, dtype=float).ravel()
    if f_star.shape != stats.mean_prediction.shape:
        raise InvalidInputError("f_star length does not match the test grid")
    if not np.all(np.isfinite(f_star)):
        raise InvalidInputError("f_star contains non-finite values")
    if stats.var_prediction is None:
        raise InvalidInputError("variance undefined with fewer than two trials")
    risk_of_mean = estimate_risk(stats.mean_prediction, f_star)
    mean_variance = float(np.mean(stats.var_prediction))
    expected_risk = risk_of_mean + mean_variance
    return RiskReport(
        risk_of_mean=risk_of_mean,
        mean_variance=mean_variance,
        expected_risk=expected_risk,
        krr_risk=float(krr_risk),
        discrepancy=expected_risk - float(krr_risk),
    )


def compare_average_to_krr(stats: TrialStats, krr_predictions: np.ndarray) -> tuple[float, float]:
    """Max-abs and RMS discrepancy between the mean sampled predictor and a kernel predictor."""
    krr_predictions = np.asarray(krr_predictions, dtype=float).ravel()
    if krr_predictions.shape != stats.mean_prediction.shape:
        raise InvalidInputError("prediction vectors have different lengths")
    diff = stats.mean_prediction - krr_predictions
    return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff**2)))


def theta_norm_check(
    stats: TrialStats, spec: GramSpectrum, y: np.ndarray, eff: EffectiveRidge, P: int
) -> tuple[float, float, float]:
    """Empirical mean squared parameter norm against its deterministic prediction.

    Returns ``(empirical, theoretical, gap)`` where the theoretical value is
    ``d(lt)/d(l) * y^T K (K + lt I)^{-2} y``; the gap shrinks like ``1/P``.
    """
    del P  # the prediction does not depend on P beyond eff itself
    theoretical = theta_norm_theory(spec, y, eff)
    empirical = stats.mean_theta_norm_sq
    return empirical, theoretical, abs(empirical - theoretical)


def monte_carlo_band(stats: TrialStats, sigmas: float = 3.0) -> np.ndarray:
    """Pointwise uncertainty of the Monte Carlo mean: ``sigmas * std / sqrt(trials)``."""
    if stats.var_prediction is None:
        raise InvalidInputError("variance undefined with fewer than two trials")
    return sigmas * np.sqrt(stats.var_prediction / stats.trials)
