"""Config-driven experiment runner with CSV/JSON/SVG artifacts.

Every experiment writes three things into its output directory:

* ``results.csv`` with fixed leading columns
  ``experiment,N,P,gamma,lambda,seed,trials`` followed by per-experiment
  metric columns (documented in the README);
* ``config.json``, the fully resolved configuration, sufficient to reproduce
  ``results.csv`` byte for byte;
* ``plot_*.svg`` line plots rendered purely from ``results.csv``.

Numbers are written in shortest round-trip decimal form and files are written
atomically (temp file plus rename).  Exit codes: 0 success, 1 invalid
configuration or input, 2 I/O failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .datasets import generate_clusters, generate_sinusoid, generate_spectrum, load_dataset_csv
from .effective_ridge import SpectrumInput, calibrate_ridge, solve_effective_ridge, theta_norm_theory
from .errors import (
    EffridgeError,
    InfeasibleTargetError,
    InvalidInputError,
    NumericError,
    SingularGramError,
)
from .features import SeedPolicy, sample_gaussian_features
from .kernels import (
    Dataset,
    KernelSpec,
    gram_matrix,
    inv_kernel_norm_sq,
    spectral_decompose,
    sqrt_gram,
    GramSpectrum,
)
from .montecarlo import (
    bias_variance_decompose,
    compare_average_to_krr,
    estimate_risk,
    run_trials,
)
from .predictors import fit_krr, fit_rf, posterior_kernel_diag, predict_krr, predict_rf
from .stieltjes import empirical_expected_A, empirical_stieltjes, sample_wishart
from .svgplot import line_plot

EXPERIMENTS = (
    "solve",
    "calibrate",
    "average-rf",
    "double-descent",
    "stieltjes",
    "expected-a",
    "predictor-fan",
)

PREFIX_COLUMNS = ["experiment", "N", "P", "gamma", "lambda", "seed", "trials"]

# Experiments that sample features and therefore need at least two trials for
# variance columns.
_MC_EXPERIMENTS = {"average-rf", "double-descent", "stieltjes", "expected-a", "predictor-fan"}

_FAN_SAMPLES = 10


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run, fully resolved; JSON keys match the field names."""

    experiment: str
    dataset: dict
    kernel: dict | None
    gamma_grid: list | None
    p_grid: list | None
    lambda_list: list
    trials: int
    base_seed: int
    output_dir: str


_DEFAULTS: dict[str, dict] = {
    "solve": dict(
        dataset={"type": "spectrum", "kind": "exponential", "n": 20},
        kernel=None,
        gamma_grid=[0.1, 0.16, 0.25, 0.4, 0.63, 0.8, 1.0, 1.25, 1.6, 2.5, 4.0, 6.3, 10.0],
        p_grid=None,
        lambda_list=[1e-4, 1e-3, 1e-2, 1e-1, 0.5, 1.0],
        trials=1,
    ),
    "calibrate": dict(
        dataset={"type": "spectrum", "kind": "exponential", "n": 20},
        kernel=None,
        gamma_grid=[0.25, 0.5, 1.0, 2.0, 4.0],
        p_grid=None,
        lambda_list=[0.1, 0.5, 1.0, 2.0],
        trials=1,
    ),
    "average-rf": dict(
        dataset={"type": "sinusoid", "n": 4, "n_test": 100},
        kernel={"kind": "rbf", "lengthscale": 2.0},
        gamma_grid=[0.5, 1.0, 2.0, 4.0],
        p_grid=None,
        lambda_list=[0.1, 1.0],
        trials=500,
    ),
    "double-descent": dict(
        dataset={"type": "sinusoid", "n": 4, "n_test": 100},
        kernel={"kind": "rbf", "lengthscale": 2.0},
        gamma_grid=[0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0],
        p_grid=None,
        lambda_list=[1e-4, 0.5],
        trials=1000,
    ),
    "stieltjes": dict(
        dataset={"type": "spectrum", "kind": "exponential", "n": 50},
        kernel=None,
        gamma_grid=None,
        p_grid=[50, 100, 200, 400],
        lambda_list=[1.0],
        trials=200,
    ),
    "expected-a": dict(
        dataset={"type": "spectrum", "kind": "exponential", "n": 10},
        kernel=None,
        gamma_grid=None,
        p_grid=[10, 50, 200],
        lambda_list=[1e-2],
        trials=500,
    ),
    "predictor-fan": dict(
        dataset={"type": "sinusoid", "n": 4, "n_test": 100},
        kernel={"kind": "rbf", "lengthscale": 2.0},
        gamma_grid=[0.5, 1.0, 2.5, 25.0],
        p_grid=None,
        lambda_list=[1e-4, 0.1],
        trials=500,
    ),
}


def default_config(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise InvalidInputError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    return ExperimentConfig(
        experiment=experiment,
        base_seed=0,
        output_dir=os.path.join("results", experiment),
        **_DEFAULTS[experiment],
    )


def load_config(experiment: str, path=None, **overrides) -> ExperimentConfig:
    """Merge defaults, an optional JSON config file, and flag overrides."""
    cfg = default_config(experiment)
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"config {path}: {exc}") from exc
        known = set(cfg.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise InvalidInputError(f"config {path}: unknown keys {sorted(unknown)}")
        if raw.get("experiment", experiment) != experiment:
            raise InvalidInputError(
                f"config {path}: experiment {raw['experiment']!r} does not match {experiment!r}"
            )
        cfg = replace(cfg, **{k: v for k, v in raw.items() if k != "experiment"})
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise InvalidInputError(f"unknown experiment {cfg.experiment!r}")
    if not isinstance(cfg.dataset, dict) or "type" not in cfg.dataset:
        raise InvalidInputError("dataset must be a descriptor object with a 'type' key")
    if cfg.dataset["type"] not in ("sinusoid", "clusters", "spectrum", "csv"):
        raise InvalidInputError(f"unknown dataset type {cfg.dataset['type']!r}")
    if not cfg.lambda_list:
        raise InvalidInputError("lambda_list must be nonempty")
    uses_p = cfg.experiment in ("stieltjes", "expected-a")
    grid = cfg.p_grid if uses_p else cfg.gamma_grid
    if not grid:
        raise InvalidInputError("the experiment's grid (gamma_grid or p_grid) must be nonempty")
    if any(not np.isfinite(v) or v <= 0 for v in grid):
        raise InvalidInputError("grid values must be positive and finite")
    if cfg.trials < 1:
        raise InvalidInputError("trials must be at least 1")
    if cfg.experiment in _MC_EXPERIMENTS and cfg.trials < 2:
        raise InvalidInputError(f"{cfg.experiment} needs trials >= 2 for variance estimates")
    if not (0 <= int(cfg.base_seed) < 2**64):
        raise InvalidInputError("base_seed must fit in 64 unsigned bits")


def _kernel_from(cfg: ExperimentConfig) -> KernelSpec:
    if not cfg.kernel:
        raise InvalidInputError(f"experiment {cfg.experiment!r} needs a kernel")
    return KernelSpec(kind=cfg.kernel.get("kind", "rbf"), lengthscale=cfg.kernel.get("lengthscale"))


def _resolve_data(cfg: ExperimentConfig) -> tuple[Dataset, np.ndarray]:
    """Materialize a data-backed dataset plus its test grid."""
    ds = cfg.dataset
    kind = ds["type"]
    if kind == "sinusoid":
        return generate_sinusoid(
            n=ds.get("n", 4), n_test=ds.get("n_test", 100), seed=cfg.base_seed
        )
    if kind == "clusters":
        return generate_clusters(
            n=ds.get("n", 100),
            n_test=ds.get("n_test", 100),
            dim=ds.get("dim", 5),
            separation=ds.get("separation", 3.0),
            seed=cfg.base_seed,
        )
    if kind == "csv":
        data = load_dataset_csv(ds["path"])
        # Hold out the trailing rows as the test grid when requested.
        n_test = ds.get("n_test", 0)
        if n_test:
            if n_test >= data.n:
                raise InvalidInputError("n_test must leave at least one training row")
            train = Dataset(X=data.X[: data.n - n_test], y=data.y[: data.n - n_test],
                            f_star=data.y[data.n - n_test :])
            return train, data.X[data.n - n_test :]
        return data, data.X
    raise InvalidInputError(f"experiment {cfg.experiment!r} needs a data-backed dataset, not {kind!r}")


def _resolve_spectrum(cfg: ExperimentConfig) -> np.ndarray:
    """Eigenvalues for theory-side experiments: direct decay laws or a dataset's Gram."""
    ds = cfg.dataset
    if ds["type"] == "spectrum":
        return generate_spectrum(ds.get("kind", "exponential"), ds.get("n", 20))
    data, _ = _resolve_data(cfg)
    spec = spectral_decompose(gram_matrix(_kernel_from(cfg), data.X))
    return spec.eigenvalues


def _prefix(cfg: ExperimentConfig, N, P, gamma, lam):
    return {
        "experiment": cfg.experiment,
        "N": N,
        "P": P,
        "gamma": gamma,
        "lambda": lam,
        "seed": cfg.base_seed,
        "trials": cfg.trials,
    }


def _round_features(gamma: float, N: int) -> int:
    return max(1, int(round(gamma * N)))


@contextmanager
def _row_context(**keys):
    """Attach the grid point to numeric failures so the exit-3 diagnostic names the row."""
    try:
        yield
    except NumericError as exc:
        ctx = ", ".join(f"{k}={v}" for k, v in keys.items())
        raise NumericError(f"{exc} [at {ctx}]") from exc


# ---------------------------------------------------------------------------
# Experiment implementations.  Each returns (metric_columns, rows).
# ---------------------------------------------------------------------------


def _run_solve(cfg: ExperimentConfig):
    d = _resolve_spectrum(cfg)
    N = d.size
    cols = ["lambda_tilde", "d_lambda_tilde", "effective_dimension", "residual"]
    rows = []
    for lam in cfg.lambda_list:
        for gamma in cfg.gamma_grid:
            with _row_context(gamma=gamma, ridge=lam):
                eff = solve_effective_ridge(SpectrumInput(d, gamma, lam))
            row = _prefix(cfg, N, gamma * N, gamma, lam)
            row.update(
                lambda_tilde=eff.lambda_tilde,
                d_lambda_tilde=eff.d_lambda_tilde,
                effective_dimension=eff.effective_dimension,
                residual=abs(eff.residual),
            )
            rows.append(row)
    return cols, rows


def _run_calibrate(cfg: ExperimentConfig):
    d = _resolve_spectrum(cfg)
    N = d.size
    cols = ["lambda_star", "roundtrip_lambda_tilde", "roundtrip_rel_error"]
    rows = []
    for lam_star in cfg.lambda_list:
        for gamma in cfg.gamma_grid:
            try:
                lam = calibrate_ridge(d, gamma, lam_star)
            except InfeasibleTargetError as exc:
                print(f"note: skipping infeasible target: {exc}", file=sys.stderr)
                continue
            with _row_context(gamma=gamma, target=lam_star):
                eff = solve_effective_ridge(SpectrumInput(d, gamma, lam))
            row = _prefix(cfg, N, gamma * N, gamma, lam)
            row.update(
                lambda_star=lam_star,
                roundtrip_lambda_tilde=eff.lambda_tilde,
                roundtrip_rel_error=abs(eff.lambda_tilde - lam_star) / lam_star,
            )
            rows.append(row)
    if not rows:
        raise InvalidInputError("every calibration target was infeasible for every gamma")
    return cols, rows


def _mc_theory_context(cfg: ExperimentConfig):
    """Shared setup of the data-backed Monte Carlo experiments."""
    data, test_X = _resolve_data(cfg)
    if data.f_star is None or len(data.f_star) != test_X.shape[0]:
        raise InvalidInputError("dataset must carry true values on the test grid")
    kernel = _kernel_from(cfg)
    gram = gram_matrix(kernel, data.X)
    spec = spectral_decompose(gram)
    k_cross = gram_matrix(kernel, test_X, data.X)
    return data, test_X, kernel, gram, spec, k_cross


def _run_average_rf(cfg: ExperimentConfig):
    data, test_X, kernel, gram, spec, k_cross = _mc_theory_context(cfg)
    N = data.n
    try:
        q_norm_sq = inv_kernel_norm_sq(spec, data.y)
    except SingularGramError:
        q_norm_sq = inv_kernel_norm_sq(spec, data.y, pseudoinverse=True)
        print(
            "note: Gram matrix numerically singular; bound_scale columns use the "
            "pseudoinverse label norm",
            file=sys.stderr,
        )
    cols = [
        "lambda_tilde",
        "rf_mean_risk",
        "krr_risk",
        "mean_rf_vs_krr_rmse",
        "mean_rf_vs_krr_max_abs",
        "mc_band_rmse",
        "mean_variance",
        "theta_norm_mean",
        "theta_norm_theory",
        "bound_scale_norm",
        "bound_scale_norm_sq",
    ]
    rows = []
    for lam in cfg.lambda_list:
        for gamma in cfg.gamma_grid:
            P = _round_features(gamma, N)
            g_actual = P / N
            with _row_context(gamma=g_actual, ridge=lam, P=P):
                stats = run_trials(data, test_X, kernel, P, lam, cfg.trials, cfg.base_seed)
                eff = solve_effective_ridge(SpectrumInput(spec.eigenvalues, g_actual, lam))
                krr = fit_krr(gram, data.y, eff.lambda_tilde)
                krr_pred = predict_krr(krr, k_cross)
            max_abs, rmse = compare_average_to_krr(stats, krr_pred)
            band = 3.0 * float(np.sqrt(np.mean(stats.var_prediction) / cfg.trials))
            sqrt_kxx = 1.0  # RBF prior variance is one at every point
            row = _prefix(cfg, N, P, g_actual, lam)
            row.update(
                lambda_tilde=eff.lambda_tilde,
                rf_mean_risk=estimate_risk(stats.mean_prediction, data.f_star),
                krr_risk=estimate_risk(krr_pred, data.f_star),
                mean_rf_vs_krr_rmse=rmse,
                mean_rf_vs_krr_max_abs=max_abs,
                mc_band_rmse=band,
                mean_variance=float(np.mean(stats.var_prediction)),
                theta_norm_mean=stats.mean_theta_norm_sq,
                theta_norm_theory=theta_norm_theory(spec, data.y, eff),
                bound_scale_norm=sqrt_kxx * np.sqrt(q_norm_sq) / P,
                bound_scale_norm_sq=sqrt_kxx * q_norm_sq / P,
            )
            rows.append(row)
    return cols, rows


def _run_double_descent(cfg: ExperimentConfig):
    data, test_X, kernel, gram, spec, k_cross = _mc_theory_context(cfg)
    N = data.n
    ktilde_diag = posterior_kernel_diag(spec, k_cross, 1.0)
    cols = [
        "lambda_tilde",
        "expected_risk",
        "risk_of_mean",
        "mean_variance",
        "krr_risk",
        "variance_theory",
    ]
    rows = []
    for lam in cfg.lambda_list:
        for gamma in cfg.gamma_grid:
            P = _round_features(gamma, N)
            g_actual = P / N
            with _row_context(gamma=g_actual, ridge=lam, P=P):
                stats = run_trials(data, test_X, kernel, P, lam, cfg.trials, cfg.base_seed)
                eff = solve_effective_ridge(SpectrumInput(spec.eigenvalues, g_actual, lam))
                krr_pred = predict_krr(fit_krr(gram, data.y, eff.lambda_tilde), k_cross)
            report = bias_variance_decompose(
                stats, data.f_star, krr_risk=estimate_risk(krr_pred, data.f_star)
            )
            var_theory = theta_norm_theory(spec, data.y, eff) / P * float(np.mean(ktilde_diag))
            row = _prefix(cfg, N, P, g_actual, lam)
            row.update(
                lambda_tilde=eff.lambda_tilde,
                expected_risk=report.expected_risk,
                risk_of_mean=report.risk_of_mean,
                mean_variance=report.mean_variance,
                krr_risk=report.krr_risk,
                variance_theory=var_theory,
            )
            rows.append(row)
    return cols, rows


def _run_stieltjes(cfg: ExperimentConfig):
    d = _resolve_spectrum(cfg)
    N = d.size
    cols = ["m_p_mean", "m_p_var", "m_tilde", "abs_gap", "recip_identity_err"]
    rows = []
    for P in cfg.p_grid:
        P = int(P)
        samples = [sample_wishart(d, P, SeedPolicy(cfg.base_seed, t)) for t in range(cfg.trials)]
        for lam in cfg.lambda_list:
            z = complex(-lam, 0.0)
            vals = np.array([empirical_stieltjes(s, z) for s in samples])
            mean = complex(np.mean(vals))
            var = float(np.sum(np.abs(vals - mean) ** 2) / (cfg.trials - 1))
            gamma = P / N
            with _row_context(P=P, ridge=lam):
                eff = solve_effective_ridge(SpectrumInput(d, gamma, lam))
            m_tilde = 1.0 / eff.lambda_tilde
            row = _prefix(cfg, N, P, gamma, lam)
            row.update(
                m_p_mean=mean.real,
                m_p_var=var,
                m_tilde=m_tilde,
                abs_gap=abs(mean - m_tilde),
                recip_identity_err=abs(m_tilde * eff.lambda_tilde - 1.0),
            )
            rows.append(row)
    return cols, rows


def _run_expected_a(cfg: ExperimentConfig):
    d = np.sort(_resolve_spectrum(cfg))[::-1]
    N = d.size
    spec = GramSpectrum(eigenvalues=d, eigenvectors=np.eye(N), trace_mean=float(np.mean(d)))
    cols = ["idx", "d", "d_tilde", "d_theory", "abs_gap"]
    rows = []
    for lam in cfg.lambda_list:
        for P in cfg.p_grid:
            P = int(P)
            gamma = P / N
            with _row_context(P=P, ridge=lam):
                eff = solve_effective_ridge(SpectrumInput(d, gamma, lam))
                theory = d / (d + eff.lambda_tilde)
                emp = empirical_expected_A(spec, P, lam, cfg.trials, SeedPolicy(cfg.base_seed, 0))
            for i in range(N):
                row = _prefix(cfg, N, P, gamma, lam)
                row.update(
                    idx=i + 1,
                    d=d[i],
                    d_tilde=emp[i],
                    d_theory=theory[i],
                    abs_gap=abs(emp[i] - theory[i]),
                )
                rows.append(row)
    return cols, rows


def _run_predictor_fan(cfg: ExperimentConfig):
    data, test_X = _resolve_data(cfg)
    if data.dim != 1:
        raise InvalidInputError("predictor-fan needs one-dimensional inputs")
    if data.f_star is None or len(data.f_star) != test_X.shape[0]:
        raise InvalidInputError("dataset must carry true values on the test grid")
    kernel = _kernel_from(cfg)
    N = data.n
    X_all = np.vstack([data.X, test_X])
    joint_root = sqrt_gram(spectral_decompose(gram_matrix(kernel, X_all)))
    n_keep = min(_FAN_SAMPLES, cfg.trials)
    cols = (
        ["role", "x", "f_star", "mean_prediction", "std_prediction"]
        + [f"sample_{k}" for k in range(n_keep)]
    )
    rows = []
    for lam in cfg.lambda_list:
        for gamma in cfg.gamma_grid:
            P = _round_features(gamma, N)
            g_actual = P / N
            count = 0
            mean = np.zeros(X_all.shape[0])
            m2 = np.zeros(X_all.shape[0])
            kept = []
            for t in range(cfg.trials):
                feats = sample_gaussian_features(joint_root, P, N, SeedPolicy(cfg.base_seed, t))
                model = fit_rf(feats.train, data.y, lam)
                preds = np.concatenate([model.train_predictions, predict_rf(model, feats.test)])
                count += 1
                delta = preds - mean
                mean += delta / count
                m2 += delta * (preds - mean)
                if t < n_keep:
                    kept.append(preds)
            std = np.sqrt(m2 / (count - 1))
            truths = np.concatenate([data.y, data.f_star])
            roles = np.concatenate([np.ones(N), np.zeros(test_X.shape[0])])
            for i in range(X_all.shape[0]):
                row = _prefix(cfg, N, P, g_actual, lam)
                row.update(
                    role=int(roles[i]),
                    x=X_all[i, 0],
                    f_star=truths[i],
                    mean_prediction=mean[i],
                    std_prediction=std[i],
                )
                for k in range(n_keep):
                    row[f"sample_{k}"] = kept[k][i]
                rows.append(row)
    return cols, rows


_RUNNERS = {
    "solve": _run_solve,
    "calibrate": _run_calibrate,
    "average-rf": _run_average_rf,
    "double-descent": _run_double_descent,
    "stieltjes": _run_stieltjes,
    "expected-a": _run_expected_a,
    "predictor-fan": _run_predictor_fan,
}


# ---------------------------------------------------------------------------
# CSV / JSON io
# ---------------------------------------------------------------------------


def format_number(v) -> str:
    """Shortest decimal that round-trips to the same value."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if not np.isfinite(f):
        raise NumericError(f"refusing to write non-finite value {f!r}")
    return repr(f)


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_results_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_number(row[c]) for c in columns))
    _write_text_atomic(path, "\n".join(lines) + "\n")


def parse_results_csv(path) -> tuple[list[str], list[dict]]:
    """Read a results file back; every column except ``experiment`` parses as float."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln]
    columns = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        row = {}
        for c, cell in zip(columns, cells):
            row[c] = cell if c == "experiment" else float(cell)
        rows.append(row)
    return columns, rows


# ---------------------------------------------------------------------------
# Plot rendering (pure functions of the parsed results rows)
# ---------------------------------------------------------------------------


def _group_values(rows, key):
    seen = []
    for r in rows:
        if r[key] not in seen:
            seen.append(r[key])
    return seen


def _series_by(rows, group_key, x_key, y_key, label_fmt, marker=False):
    series = []
    for g in _group_values(rows, group_key):
        sub = [r for r in rows if r[group_key] == g]
        series.append(
            {
                "label": label_fmt.format(g),
                "x": [r[x_key] for r in sub],
                "y": [r[y_key] for r in sub],
                "marker": marker,
            }
        )
    return series


def _tag(v: float) -> str:
    return format_number(v).replace(".", "p").replace("-", "m")


def _render_solve(rows):
    plots = {}
    for metric, logy in (
        ("lambda_tilde", True),
        ("d_lambda_tilde", True),
        ("effective_dimension", False),
    ):
        plots[f"plot_{metric}.svg"] = line_plot(
            _series_by(rows, "lambda", "gamma", metric, "ridge {}"),
            title=f"{metric} vs gamma",
            xlabel="gamma = P/N",
            ylabel=metric,
            logx=True,
            logy=logy,
        )
    return plots


def _render_calibrate(rows):
    return {
        "plot_calibrated_ridge.svg": line_plot(
            _series_by(rows, "lambda_star", "gamma", "lambda", "target {}", marker=True),
            title="explicit ridge reaching each target effective ridge",
            xlabel="gamma = P/N",
            ylabel="calibrated ridge",
            logx=True,
            logy=True,
        )
    }


def _render_average_rf(rows):
    risk_series = []
    for lam in _group_values(rows, "lambda"):
        sub = [r for r in rows if r["lambda"] == lam]
        risk_series.append(
            {
                "label": f"mean-RF risk, ridge {lam}",
                "x": [r["gamma"] for r in sub],
                "y": [r["rf_mean_risk"] for r in sub],
                "marker": True,
            }
        )
        risk_series.append(
            {
                "label": f"KRR risk at eff. ridge {lam}",
                "x": [r["gamma"] for r in sub],
                "y": [r["krr_risk"] for r in sub],
            }
        )
    agreement = _series_by(rows, "lambda", "gamma", "mean_rf_vs_krr_rmse", "rmse, ridge {}", marker=True)
    agreement += _series_by(rows, "lambda", "gamma", "mc_band_rmse", "3 sigma band, ridge {}")
    return {
        "plot_risk.svg": line_plot(
            risk_series,
            title="test risk: mean sampled predictor vs matched kernel predictor",
            xlabel="gamma = P/N",
            ylabel="mean squared error",
            logx=True,
            logy=True,
        ),
        "plot_agreement.svg": line_plot(
            agreement,
            title="mean predictor vs kernel predictor discrepancy",
            xlabel="gamma = P/N",
            ylabel="rmse over the test grid",
            logx=True,
            logy=True,
        ),
    }


def _render_double_descent(rows):
    plots = {}
    for metric in ("expected_risk", "mean_variance", "risk_of_mean"):
        plots[f"plot_{metric}.svg"] = line_plot(
            _series_by(rows, "lambda", "gamma", metric, "ridge {}", marker=True),
            title=f"{metric} vs gamma",
            xlabel="gamma = P/N",
            ylabel=metric,
            logx=True,
            logy=True,
        )
    return plots


def _render_stieltjes(rows):
    return {
        "plot_mp_variance.svg": line_plot(
            _series_by(rows, "lambda", "P", "m_p_var", "z = -{}", marker=True),
            title="variance of the empirical Stieltjes transform",
            xlabel="P",
            ylabel="var m_P",
            logx=True,
            logy=True,
        ),
        "plot_mp_mean_gap.svg": line_plot(
            _series_by(rows, "lambda", "P", "abs_gap", "z = -{}", marker=True),
            title="mean of m_P vs deterministic limit",
            xlabel="P",
            ylabel="|mean m_P - m_tilde|",
            logx=True,
            logy=True,
        ),
    }


def _render_expected_a(rows):
    plots = {}
    for lam in _group_values(rows, "lambda"):
        sub = [r for r in rows if r["lambda"] == lam]
        series = []
        for P in _group_values(sub, "P"):
            pp = [r for r in sub if r["P"] == P]
            series.append(
                {
                    "label": f"sampled, P = {int(P)}",
                    "x": [r["idx"] for r in pp],
                    "y": [r["d_tilde"] for r in pp],
                    "marker": True,
                }
            )
            series.append(
                {
                    "label": f"limit, P = {int(P)}",
                    "x": [r["idx"] for r in pp],
                    "y": [r["d_theory"] for r in pp],
                }
            )
        plots[f"plot_hat_eigenvalues_ridge_{_tag(lam)}.svg"] = line_plot(
            series,
            title=f"eigenvalues of the averaged hat matrix, ridge {lam}",
            xlabel="eigenvalue index",
            ylabel="eigenvalue",
        )
    return plots


def _render_predictor_fan(rows):
    plots = {}
    lams = _group_values(rows, "lambda")
    gammas = _group_values(rows, "gamma")
    for lam in lams:
        for gamma in gammas:
            sub = [r for r in rows if r["lambda"] == lam and r["gamma"] == gamma]
            if not sub:
                continue
            test = sorted((r for r in sub if r["role"] == 0), key=lambda r: r["x"])
            train = [r for r in sub if r["role"] == 1]
            n_samples = len([c for c in test[0] if c.startswith("sample_")])
            series = [
                {
                    "label": f"sample {k}",
                    "x": [r["x"] for r in test],
                    "y": [r[f"sample_{k}"] for r in test],
                }
                for k in range(min(3, n_samples))
            ]
            series.append(
                {"label": "mean", "x": [r["x"] for r in test], "y": [r["mean_prediction"] for r in test]}
            )
            for sgn, lab in ((2.0, "mean + 2 std"), (-2.0, "mean - 2 std")):
                series.append(
                    {
                        "label": lab,
                        "x": [r["x"] for r in test],
                        "y": [r["mean_prediction"] + sgn * r["std_prediction"] for r in test],
                    }
                )
            series.append(
                {
                    "label": "training data",
                    "x": [r["x"] for r in train],
                    "y": [r["f_star"] for r in train],
                    "marker": True,
                }
            )
            P = int(sub[0]["P"])
            plots[f"plot_fan_P{P}_ridge_{_tag(lam)}.svg"] = line_plot(
                series,
                title=f"sampled predictors, P = {P}, ridge {lam}",
                xlabel="x",
                ylabel="prediction",
            )
    return plots


_RENDERERS = {
    "solve": _render_solve,
    "calibrate": _render_calibrate,
    "average-rf": _render_average_rf,
    "double-descent": _render_double_descent,
    "stieltjes": _render_stieltjes,
    "expected-a": _render_expected_a,
    "predictor-fan": _render_predictor_fan,
}


def render_plots(experiment: str, rows: list[dict]) -> dict[str, str]:
    """SVG documents keyed by filename, computed from parsed results rows only."""
    return _RENDERERS[experiment](rows)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig) -> dict[str, Path]:
    """Execute one experiment, write all artifacts, return their paths."""
    validate_config(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    metric_cols, rows = _RUNNERS[cfg.experiment](cfg)
    columns = PREFIX_COLUMNS + metric_cols

    results_path = out / "results.csv"
    write_results_csv(results_path, columns, rows)
    config_path = out / "config.json"
    _write_text_atomic(config_path, json.dumps(asdict(cfg), indent=2, sort_keys=True, default=float) + "\n")

    _, parsed = parse_results_csv(results_path)
    artifacts = {"results": results_path, "config": config_path}
    for name, svg in render_plots(cfg.experiment, parsed).items():
        _write_text_atomic(out / name, svg)
        artifacts[name] = out / name
    return artifacts


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="effridge",
        description="Random-feature regression experiments: effective-ridge theory vs Monte Carlo.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--gamma", help="comma-separated gamma grid override")
    parser.add_argument("--p", dest="p_grid", help="comma-separated feature-count grid override")
    parser.add_argument("--lambda", dest="lambda_list", help="comma-separated ridge list override")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials override")
    parser.add_argument("--seed", type=int, help="base seed override")
    parser.add_argument("--out", help="output directory override")
    args = parser.parse_args(argv)

    try:
        overrides = dict(
            gamma_grid=[float(v) for v in args.gamma.split(",")] if args.gamma else None,
            p_grid=[int(v) for v in args.p_grid.split(",")] if args.p_grid else None,
            lambda_list=[float(v) for v in args.lambda_list.split(",")] if args.lambda_list else None,
            trials=args.trials,
            base_seed=args.seed,
            output_dir=args.out,
        )
    except ValueError as exc:
        print(f"error: bad flag value: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = load_config(args.experiment, args.config, **overrides)
        artifacts = cmd_run(cfg)
    except InvalidInputError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 2
    except (NumericError, EffridgeError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 3
    for name, path in artifacts.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
