"""Ridge regression on stability instances, plus the reporting helpers.

The loss is the l2-regularized sum of squared errors
    L(w) = 1/2 sum_n (y_n - w.x_n)^2 + lambda/2 ||w||^2
solved exactly through the normal equations. The intercept, when enabled, is
an unpenalized extra column; a no-intercept raw mode replicates the bare
formula. Features are z-scored by default so weights are comparable across
blocks with different ranges; both toggles are recorded in the model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DataError, NumericError
from .features import RegressionInstance


@dataclass
class RidgeModel:
    feature_names: tuple[str, ...]
    weights: np.ndarray
    intercept: float
    lam: float
    r_squared: float
    means: np.ndarray | None = None  # set when standardized
    scales: np.ndarray | None = None
    normalize_loss: bool = False

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.means is not None:
            x = (x - self.means) / self.scales
        return x @ self.weights + self.intercept

    def to_json(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "weights": [repr(float(w)) for w in self.weights],
            "intercept": repr(float(self.intercept)),
            "lambda": self.lam,
            "r_squared": repr(float(self.r_squared)),
            "standardization": None
            if self.means is None
            else {
                "means": [repr(float(m)) for m in self.means],
                "scales": [repr(float(s)) for s in self.scales],
            },
            "normalize_loss": self.normalize_loss,
        }


def save_model(model: RidgeModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path: str) -> RidgeModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    std = obj.get("standardization")
    return RidgeModel(
        feature_names=tuple(obj["feature_names"]),
        weights=np.asarray([float(w) for w in obj["weights"]]),
        intercept=float(obj["intercept"]),
        lam=obj["lambda"],
        r_squared=float(obj["r_squared"]),
        means=None if std is None else np.asarray([float(x) for x in std["means"]]),
        scales=None if std is None else np.asarray([float(x) for x in std["scales"]]),
        normalize_loss=obj.get("normalize_loss", False),
    )


def fit_ridge(
    x: np.ndarray,
    y: np.ndarray,
    lam: float = 1.0,
    feature_names: tuple[str, ...] | None = None,
    intercept: bool = True,
    standardize: bool = True,
    normalize_loss: bool = False,
) -> RidgeModel:
    """Solve (X^T X + lambda I) w = X^T y; the intercept column is unpenalized.

    With normalize_loss the squared-error term is averaged over instances, so
    duplicating the dataset leaves the fit unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2 or len(x) != len(y):
        raise DataError("X must be 2-D with one target per row")
    if len(y) < 1:
        raise DataError("at least one instance is required")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("non-finite values in the regression inputs")
    if lam < 0:
        raise DataError("lambda must be nonnegative")
    n, m = x.shape
    if feature_names is None:
        feature_names = tuple(f"f{i}" for i in range(m))
    if len(feature_names) != m:
        raise DataError("feature_names length must match the feature count")

    means = scales = None
    xs = x
    if standardize:
        means = x.mean(axis=0)
        scales = x.std(axis=0)
        scales = np.where(scales > 0, scales, 1.0)
        xs = (x - means) / scales

    cols = np.c_[xs, np.ones(n)] if intercept else xs
    eff_lam = lam * n if normalize_loss else lam
    a = cols.T @ cols
    b = cols.T @ y
    idx = np.arange(m)  # never penalize the intercept column
    a[idx, idx] += eff_lam
    try:
        factor = cho_factor(a)
    except np.linalg.LinAlgError as exc:
        if lam == 0:
            raise NumericError(
                "normal equations are singular at lambda=0; use lambda > 0"
            ) from exc
        raise NumericError(f"normal equations failed: {exc}") from exc
    w_full = cho_solve(factor, b)
    # one step of iterative refinement keeps the stationarity residual tight
    resid = b - a @ w_full
    w_full = w_full + cho_solve(factor, resid)

    grad = a @ w_full - b
    tol = 1e-8 * (1.0 + np.linalg.norm(b))
    if np.linalg.norm(grad) > tol * 100:
        raise NumericError("ridge solve did not reach stationarity")

    weights = w_full[:m]
    icpt = float(w_full[m]) if intercept else 0.0
    model = RidgeModel(
        feature_names=tuple(feature_names),
        weights=weights,
        intercept=icpt,
        lam=lam,
        r_squared=0.0,
        means=means,
        scales=scales,
        normalize_loss=normalize_loss,
    )
    yhat = model.predict(x)
    model.r_squared = r_squared(y, yhat) if np.var(y) > 0 else float("nan")
    return model


def r_squared(y: np.ndarray, yhat: np.ndarray) -> float:
    """1 - SS_res / SS_tot. 0 for the mean predictor; can be negative."""
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if len(y) != len(yhat) or len(y) < 2:
        raise DataError("r_squared needs two equal-length vectors, n >= 2")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise NumericError("r_squared is undefined for constant targets")
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def weight_report(
    model: RidgeModel, min_magnitude: float = 0.1
) -> list[tuple[str, float]]:
    """Features with |weight| > min_magnitude, sorted by descending |weight|."""
    picked = [
        (i, name, float(w))
        for i, (name, w) in enumerate(zip(model.feature_names, model.weights))
        if abs(w) > min_magnitude
    ]
    picked.sort(key=lambda t: (-abs(t[2]), t[0]))
    return [(name, w) for _, name, w in picked]


@dataclass(frozen=True)
class AblationResult:
    label: str
    features: tuple[str, ...]
    r_squared: float


def ablation(
    x: np.ndarray,
    y: np.ndarray,
    feature_names: tuple[str, ...],
    groups: dict[str, list[str]],
    lam: float = 1.0,
    configurations: tuple[str, ...] = ("full", "drop", "only"),
    **fit_kwargs,
) -> list[AblationResult]:
    """Training R^2 per requested configuration: the full model and, per group,
    a drop-group and an only-group fit. An empty configuration errors."""
    name_idx = {n: i for i, n in enumerate(feature_names)}
    unknown_cfg = set(configurations) - {"full", "drop", "only"}
    if unknown_cfg:
        raise DataError(f"unknown ablation configurations {sorted(unknown_cfg)}")
    for gname, feats in groups.items():
        unknown = [f for f in feats if f not in name_idx]
        if unknown:
            raise DataError(f"group {gname!r} names unknown features {unknown}")

    def fit_subset(label: str, names: list[str]) -> AblationResult:
        if not names:
            raise DataError(f"ablation configuration {label!r} has no features")
        cols = [name_idx[n] for n in names]
        model = fit_ridge(
            x[:, cols], y, lam=lam, feature_names=tuple(names), **fit_kwargs
        )
        return AblationResult(label, tuple(names), model.r_squared)

    results = []
    if "full" in configurations:
        results.append(fit_subset("full", list(feature_names)))
    for gname, feats in groups.items():
        if "drop" in configurations:
            kept = [n for n in feature_names if n not in set(feats)]
            results.append(fit_subset(f"drop:{gname}", kept))
        if "only" in configurations:
            results.append(
                fit_subset(f"only:{gname}", [n for n in feature_names if n in set(feats)])
            )
    return results


def pos_stability_table(
    instances: list[RegressionInstance], feature_names: tuple[str, ...]
) -> list[tuple[str, float, int]]:
    """Mean stability target per primary POS, descending; empty tags omitted."""
    pos_cols = [
        (i, n.split("=", 1)[1])
        for i, n in enumerate(feature_names)
        if n.startswith("primary_pos=")
    ]
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for inst in instances:
        for col, tag in pos_cols:
            if inst.features[col] == 1.0:
                sums[tag] = sums.get(tag, 0.0) + inst.target
                counts[tag] = counts.get(tag, 0) + 1
                break
    rows = [(tag, sums[tag] / counts[tag], counts[tag]) for tag in sums]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


@dataclass
class CrossTable:
    labels: tuple[str, ...]
    means: np.ndarray  # NaN marks empty cells
    counts: np.ndarray

    def cell(self, a: str, b: str) -> float:
        return float(self.means[self.labels.index(a), self.labels.index(b)])

    def empty_cells(self) -> list[tuple[str, str]]:
        out = []
        for i, a in enumerate(self.labels):
            for j, b in enumerate(self.labels):
                if self.counts[i, j] == 0:
                    out.append((a, b))
        return out


def cross_table(
    instances: list[RegressionInstance],
    key: str = "domain",
    in_domain_only: bool = False,
) -> CrossTable:
    """Symmetric matrix of mean stability by domain or algorithm pair."""
    if key not in ("domain", "algorithm"):
        raise DataError("key must be 'domain' or 'algorithm'")

    def get(meta, k):
        return meta.domain if k == "domain" else meta.algorithm

    rows = []
    for inst in instances:
        if in_domain_only and inst.meta_a.domain != inst.meta_b.domain:
            continue
        rows.append((get(inst.meta_a, key), get(inst.meta_b, key), inst.target))
    if not rows:
        raise DataError("no instances to tabulate")
    labels = tuple(sorted({a for a, _, _ in rows} | {b for _, b, _ in rows}))
    li = {l: i for i, l in enumerate(labels)}
    sums = np.zeros((len(labels), len(labels)))
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for a, b, t in rows:
        i, j = li[a], li[b]
        sums[i, j] += t
        counts[i, j] += 1
        if i != j:
            sums[j, i] += t
            counts[j, i] += 1
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return CrossTable(labels=labels, means=means, counts=counts)
