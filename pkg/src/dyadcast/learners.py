"""Trainable binary classifiers over dyad designs.

All learners operate on a TrainingSet whose columns are standardized
(mean 0, sd 1 with ddof=0, computed on the training rows), with
zero-variance columns dropped and recorded. Coefficients are reported on
the standardized scale; the elastic net also reports the original scale.
Probability outputs are used as ranking scores downstream, so every
learner ends in a sigmoid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EvaluationError, FitError, SchemaError, TuningError
from .evaluation import pr_curve
from .seeding import seed_for

COEF_CAP = 30.0

LEARNERS = ("logit", "elastic-net", "logitboost", "neural-net")


@dataclass
class Standardizer:
    """Column standardization frozen at fit time.

    Zero-variance columns (sd below 1e-12 relative tolerance) are removed
    entirely and remembered by name, so prediction-time inputs must carry
    the full original schema but only informative columns reach the model.
    """

    input_names: tuple
    kept: np.ndarray
    means: np.ndarray
    sds: np.ndarray
    dropped: tuple

    @staticmethod
    def fit(X: np.ndarray, names) -> "Standardizer":
        names = tuple(names)
        if X.shape[1] != len(names):
            raise SchemaError(f"{X.shape[1]} columns but {len(names)} names")
        means = X.mean(axis=0) if len(X) else np.zeros(X.shape[1])
        sds = X.std(axis=0) if len(X) else np.zeros(X.shape[1])
        tol = 1e-12 * np.maximum(1.0, np.abs(means))
        kept = np.flatnonzero(sds > tol)
        dropped = tuple(names[k] for k in range(len(names)) if k not in set(kept))
        return Standardizer(
            input_names=names,
            kept=kept,
            means=means[kept],
            sds=sds[kept],
            dropped=dropped,
        )

    def transform(self, X: np.ndarray, names) -> np.ndarray:
        if tuple(names) != self.input_names:
            raise SchemaError(
                f"feature schema mismatch: expected {self.input_names}, got {tuple(names)}"
            )
        return (X[:, self.kept] - self.means) / self.sds

    def kept_names(self) -> tuple:
        return tuple(self.input_names[k] for k in self.kept)

    def to_json(self) -> dict:
        return {
            "input_names": list(self.input_names),
            "kept": self.kept.tolist(),
            "means": self.means.tolist(),
            "sds": self.sds.tolist(),
            "dropped": list(self.dropped),
        }

    @staticmethod
    def from_json(obj) -> "Standardizer":
        return Standardizer(
            input_names=tuple(obj["input_names"]),
            kept=np.array(obj["kept"], dtype=int),
            means=np.array(obj["means"], dtype=float),
            sds=np.array(obj["sds"], dtype=float),
            dropped=tuple(obj["dropped"]),
        )


@dataclass
class TrainingSet:
    """Standardized design ready for any learner."""

    Z: np.ndarray
    y: np.ndarray
    standardizer: Standardizer

    @staticmethod
    def build(X: np.ndarray, y: np.ndarray, names) -> "TrainingSet":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or len(X) != len(y):
            raise SchemaError(f"X is {X.shape}, y has {len(y)} rows")
        if set(np.unique(y)) - {0.0, 1.0}:
            raise FitError("labels must be 0/1")
        if not np.all(np.isfinite(X)):
            raise FitError("non-finite feature values")
        std = Standardizer.fit(X, names)
        return TrainingSet(Z=std.transform(X, names), y=y, standardizer=std)

    def subset(self, idx) -> "TrainingSet":
        return TrainingSet(Z=self.Z[idx], y=self.y[idx], standardizer=self.standardizer)

    def kept_names(self) -> tuple:
        return self.standardizer.kept_names()

    @property
    def n_positive(self) -> int:
        return int((self.y == 1).sum())


def _require_both_classes(y: np.ndarray) -> None:
    if len(y) == 0 or y.min() == y.max():
        raise FitError("single-class labels: nothing to fit")


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


@dataclass
class FittedModel:
    """One trained classifier: kind, schema, parameters, fit diagnostics."""

    kind: str
    standardizer: Standardizer
    params: dict
    diagnostics: dict = field(default_factory=dict)

    def decision(self, Z: np.ndarray) -> np.ndarray:
        """Link-scale score on already-standardized columns."""
        p = self.params
        if self.kind in ("logit", "elastic-net"):
            return p["intercept"] + Z @ p["coef"]
        if self.kind == "logitboost":
            F = np.full(len(Z), p["f0"])
            for feat, thr, lo, hi in p["stumps"]:
                if feat < 0:
                    F += lo
                else:
                    F += np.where(Z[:, feat] < thr, lo, hi)
            return F
        if self.kind == "neural-net":
            A = _sigmoid(Z @ p["W1"] + p["b1"])
            return A @ p["w2"] + p["b2"]
        raise ValueError(f"unknown model kind {self.kind!r}")

    def predict_proba(self, X: np.ndarray, names) -> np.ndarray:
        Z = self.standardizer.transform(np.asarray(X, dtype=float), names)
        return _sigmoid(self.decision(Z))

    def coefficients(self) -> dict:
        """Standardized-scale coefficient per kept feature name (linear
        models only)."""
        if self.kind not in ("logit", "elastic-net"):
            raise ValueError(f"{self.kind} has no linear coefficients")
        return dict(zip(self.standardizer.kept_names(), self.params["coef"]))

    def to_json(self) -> dict:
        params = {}
        for key, value in self.params.items():
            if isinstance(value, np.ndarray):
                params[key] = {"__array__": value.tolist()}
            elif key == "stumps":
                params[key] = [list(s) for s in value]
            else:
                params[key] = value
        return {
            "kind": self.kind,
            "standardizer": self.standardizer.to_json(),
            "params": params,
            "diagnostics": self.diagnostics,
        }

    @staticmethod
    def from_json(obj) -> "FittedModel":
        params = {}
        for key, value in obj["params"].items():
            if isinstance(value, dict) and "__array__" in value:
                params[key] = np.array(value["__array__"], dtype=float)
            elif key == "stumps":
                params[key] = [(int(f), float(t), float(a), float(b)) for f, t, a, b in value]
            else:
                params[key] = value
        return FittedModel(
            kind=obj["kind"],
            standardizer=Standardizer.from_json(obj["standardizer"]),
            params=params,
            diagnostics=dict(obj["diagnostics"]),
        )


def predict(model: FittedModel, X: np.ndarray, names) -> np.ndarray:
    """Score rows with a fitted model; names must match the training schema."""
    return model.predict_proba(X, names)


def _irls(Z, y, penalty=0.0, max_iter=100, grad_tol=1e-8):
    """Newton/IRLS for (optionally ridge-penalized) logistic regression on
    a design with an implicit leading intercept column. Coefficients are
    capped at +-COEF_CAP to tame quasi-separation."""
    n, p = Z.shape
    D = np.hstack([np.ones((n, 1)), Z])
    beta = np.zeros(p + 1)
    capped = False
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = D @ beta
        mu = _sigmoid(eta)
        grad = D.T @ (y - mu)
        if penalty:
            grad[1:] -= 2.0 * penalty * beta[1:]
        if np.max(np.abs(grad)) < grad_tol:
            converged = True
            break
        w = np.maximum(mu * (1.0 - mu), 1e-10)
        H = (D * w[:, None]).T @ D
        if penalty:
            H[1:, 1:] += 2.0 * penalty * np.eye(p)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        beta = beta + step
        clipped = np.clip(beta, -COEF_CAP, COEF_CAP)
        capped = bool(np.any(clipped != beta))
        beta = clipped
    return beta, converged, capped, it


def fit_logit(train: TrainingSet) -> FittedModel:
    """Maximum-likelihood logistic regression via IRLS."""
    _require_both_classes(train.y)
    beta, converged, capped, it = _irls(train.Z, train.y)
    return FittedModel(
        kind="logit",
        standardizer=train.standardizer,
        params={"intercept": float(beta[0]), "coef": beta[1:]},
        diagnostics={"converged": converged, "capped": capped, "n_iter": it},
    )


def _soft_threshold(value, threshold):
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def _tune_meta(result: "TuneResult") -> dict:
    return {
        "params": result.params,
        "score": result.score,
        "folds": result.folds_used,
        "extensions": result.extensions,
        "at_boundary": result.at_boundary,
    }


def fit_elastic_net(
    train: TrainingSet,
    grid: "TuneGrid | None" = None,
    folds: int = 5,
    seed: int = 0,
    lam: float | None = None,
    max_outer: int = 100,
) -> FittedModel:
    """Penalized logistic regression minimizing

        -loglik + lam * (sum|beta| + sum(beta^2))

    over standardized non-intercept coefficients; the ridge weight is
    twice the lasso weight once the square is differentiated. Outer IRLS
    quadratic approximations, inner cyclic coordinate descent with soft
    thresholding; the intercept is never penalized. When lam is None it is
    chosen by cross-validated tuning. Coefficients on the original feature
    scale are reported alongside the standardized ones.
    """
    _require_both_classes(train.y)
    tuning = None
    if lam is None:
        result = tune("elastic-net", train, grid, folds, seed)
        lam = result.params["lam"]
        tuning = _tune_meta(result)
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    Z, yv = train.Z, train.y
    n, p = Z.shape
    beta0 = 0.0
    beta = np.zeros(p)
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        eta = beta0 + Z @ beta
        mu = _sigmoid(eta)
        w = np.maximum(mu * (1.0 - mu), 1e-10)
        z = eta + (yv - mu) / w
        b0_old, b_old = beta0, beta.copy()
        resid = z - beta0 - Z @ beta
        for _ in range(1000):
            delta = 0.0
            for k in range(p):
                resid += Z[:, k] * beta[k]
                rho = float(np.sum(w * Z[:, k] * resid))
                denom = float(np.sum(w * Z[:, k] ** 2)) + 2.0 * lam
                new = _soft_threshold(rho, lam) / denom
                new = float(np.clip(new, -COEF_CAP, COEF_CAP))
                delta = max(delta, abs(new - beta[k]))
                beta[k] = new
                resid -= Z[:, k] * beta[k]
            resid += beta0
            new0 = float(np.sum(w * resid) / np.sum(w))
            delta = max(delta, abs(new0 - beta0))
            beta0 = new0
            resid -= beta0
            if delta < 1e-11:
                break
        if max(abs(beta0 - b0_old), float(np.max(np.abs(beta - b_old))) if p else 0.0) < 1e-9:
            converged = True
            break

    std = train.standardizer
    raw_coef = np.zeros(len(std.input_names))
    scaled = beta / std.sds if p else beta
    raw_coef[std.kept] = scaled
    raw_intercept = beta0 - float(np.sum(scaled * std.means)) if p else beta0
    diagnostics = {"converged": converged, "n_outer": outer, "seed": seed}
    if tuning is not None:
        diagnostics["tuning"] = tuning
    return FittedModel(
        kind="elastic-net",
        standardizer=std,
        params={
            "intercept": beta0,
            "coef": beta,
            "lam": lam,
            "raw_intercept": raw_intercept,
            "raw_coef": raw_coef,
        },
        diagnostics=diagnostics,
    )


def _best_stump(Z, w, z, orders):
    """Weighted least-squares optimal single split.

    Returns (feature, threshold, left_value, right_value). Ties resolve to
    the lowest feature index, then the lowest threshold. When no feature
    has two distinct values the stump degenerates to the weighted mean
    (feature -1)."""
    total_w = float(w.sum())
    total_wz = float((w * z).sum())
    best = None
    best_gain = -np.inf
    for feat in range(Z.shape[1]):
        order = orders[feat]
        zs = Z[order, feat]
        cw = np.cumsum(w[order])
        cwz = np.cumsum((w * z)[order])
        boundary = np.flatnonzero(zs[1:] > zs[:-1])
        for cut in boundary:
            wl, wzl = cw[cut], cwz[cut]
            wr, wzr = total_w - wl, total_wz - wzl
            if wl <= 0.0 or wr <= 0.0:
                continue
            gain = wzl * wzl / wl + wzr * wzr / wr
            if gain > best_gain + 1e-15:
                best_gain = gain
                thr = 0.5 * (zs[cut] + zs[cut + 1])
                best = (feat, float(thr), float(wzl / wl), float(wzr / wr))
    if best is None:
        mean = total_wz / total_w
        return (-1, 0.0, float(mean), float(mean))
    return best


def _nll(F, y):
    return float(np.sum(np.logaddexp(0.0, F) - y * F))


def fit_logitboost(
    train: TrainingSet,
    grid: "TuneGrid | None" = None,
    folds: int = 5,
    seed: int = 0,
    rounds: int | None = None,
) -> FittedModel:
    """Additive stumps fitted on the log-odds scale.

    Starts from the base-rate log odds; each round computes working
    responses and weights from current probabilities (clipped to
    [1e-5, 1-1e-5]), fits the best single-split stump by weighted least
    squares, and adds it. A stump that would raise the training loss is
    halved until it no longer does, so training loss never increases.
    Zero rounds yield the base-rate constant; rounds=None tunes the count
    by cross-validation."""
    _require_both_classes(train.y)
    tuning = None
    if rounds is None:
        result = tune("logitboost", train, grid, folds, seed)
        rounds = result.params["rounds"]
        tuning = _tune_meta(result)
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    Z, yv = train.Z, train.y
    orders = [np.argsort(Z[:, k], kind="stable") for k in range(Z.shape[1])]
    base = float(yv.mean())
    f0 = float(np.log(base / (1.0 - base)))
    F = np.full(len(yv), f0)
    loss = _nll(F, yv)
    stumps = []
    degenerate = False
    for _ in range(rounds):
        prob = np.clip(_sigmoid(F), 1e-5, 1.0 - 1e-5)
        w = prob * (1.0 - prob)
        if not np.all(np.isfinite(w)) or float(w.sum()) <= 0.0:
            degenerate = True
            break
        z = (yv - prob) / w
        feat, thr, lo, hi = _best_stump(Z, w, z, orders)
        contrib = np.full(len(yv), lo) if feat < 0 else np.where(Z[:, feat] < thr, lo, hi)
        scale = 1.0
        for _ in range(60):
            new_loss = _nll(F + scale * contrib, yv)
            if new_loss <= loss:
                break
            scale *= 0.5
        else:
            scale = 0.0
            new_loss = loss
        F = F + scale * contrib
        loss = new_loss
        stumps.append((feat, thr, scale * lo, scale * hi))
    diagnostics = {
        "rounds": rounds,
        "rounds_used": len(stumps),
        "final_loss": loss,
        "degenerate_stop": degenerate,
        "seed": seed,
    }
    if tuning is not None:
        diagnostics["tuning"] = tuning
    return FittedModel(
        kind="logitboost",
        standardizer=train.standardizer,
        params={"f0": f0, "stumps": stumps},
        diagnostics=diagnostics,
    )


def nn_loss_and_grads(Z, y, W1, b1, w2, b2, decay):
    """Penalized cross-entropy and its exact gradients.

    Loss = sum CE + decay*(||W1||^2 + ||w2||^2); biases are never
    penalized, so in the large-decay limit the network collapses to the
    base-rate constant."""
    A = _sigmoid(Z @ W1 + b1)
    f = A @ w2 + b2
    loss = float(np.sum(np.logaddexp(0.0, f) - y * f))
    loss += decay * (float(np.sum(W1**2)) + float(np.sum(w2**2)))
    delta = _sigmoid(f) - y
    g_w2 = A.T @ delta + 2.0 * decay * w2
    g_b2 = float(delta.sum())
    dh = np.outer(delta, w2) * A * (1.0 - A)
    g_W1 = Z.T @ dh + 2.0 * decay * W1
    g_b1 = dh.sum(axis=0)
    return loss, g_W1, g_b1, g_w2, g_b2


def fit_neural_net(
    train: TrainingSet,
    grid: "TuneGrid | None" = None,
    folds: int = 5,
    seed: int = 0,
    hidden: int | None = None,
    decay: float | None = None,
    max_iter: int = 2000,
    restarts: int = 3,
    grad_tol: float = 1e-5,
) -> FittedModel:
    """Single-hidden-layer logistic network by full-batch gradient descent
    with backtracking step control; best of `restarts` random starts by
    penalized training loss. Unset hidden/decay are chosen by
    cross-validated tuning."""
    _require_both_classes(train.y)
    tuning = None
    if hidden is None or decay is None:
        g = grid or TuneGrid()
        if hidden is not None:
            g = replace(g, nn_hidden=(hidden,))
        if decay is not None:
            g = replace(g, nn_decay=(decay,))
        result = tune("neural-net", train, g, folds, seed)
        hidden = result.params["hidden"]
        decay = result.params["decay"]
        tuning = _tune_meta(result)
    if hidden < 1:
        raise ValueError(f"hidden must be >= 1, got {hidden}")
    Z, yv = train.Z, train.y
    p = Z.shape[1]

    best = None
    failed_starts = 0
    for r in range(restarts):
        rng = np.random.default_rng(seed_for(seed, "nn-restart", r))
        W1 = rng.normal(0.0, 1.0 / np.sqrt(max(p, 1)), size=(p, hidden))
        b1 = np.zeros(hidden)
        w2 = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
        b2 = 0.0
        loss, g_W1, g_b1, g_w2, g_b2 = nn_loss_and_grads(Z, yv, W1, b1, w2, b2, decay)
        for _ in range(5):
            if np.isfinite(loss):
                break
            W1, w2 = 0.1 * W1, 0.1 * w2
            loss, g_W1, g_b1, g_w2, g_b2 = nn_loss_and_grads(Z, yv, W1, b1, w2, b2, decay)
        if not np.isfinite(loss):
            failed_starts += 1
            continue
        step = 0.01
        converged = False
        for _ in range(max_iter):
            gnorm = max(
                np.max(np.abs(g_W1)) if g_W1.size else 0.0,
                np.max(np.abs(g_b1)),
                np.max(np.abs(g_w2)),
                abs(g_b2),
            )
            if gnorm < grad_tol:
                converged = True
                break
            accepted = False
            while step >= 1e-14:
                trial = (
                    W1 - step * g_W1,
                    b1 - step * g_b1,
                    w2 - step * g_w2,
                    b2 - step * g_b2,
                )
                out = nn_loss_and_grads(Z, yv, *trial, decay)
                if np.isfinite(out[0]) and out[0] < loss:
                    (W1, b1, w2, b2) = trial
                    loss, g_W1, g_b1, g_w2, g_b2 = out
                    step = min(step * 1.5, 10.0)
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                converged = True
                break
        if best is None or loss < best[0]:
            best = (loss, W1, b1, w2, b2, converged)

    if best is None:
        raise FitError("neural net produced non-finite loss from every start")
    loss, W1, b1, w2, b2, converged = best
    diagnostics = {
        "converged": converged,
        "loss": loss,
        "failed_starts": failed_starts,
        "seed": seed,
    }
    if tuning is not None:
        diagnostics["tuning"] = tuning
    return FittedModel(
        kind="neural-net",
        standardizer=train.standardizer,
        params={"W1": W1, "b1": b1, "w2": w2, "b2": float(b2), "hidden": hidden, "decay": decay},
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class TuneGrid:
    """Hyperparameter grids searched by tune(); override per experiment."""

    enet_lambda: tuple = (0.001, 0.01, 0.1, 1.0, 10.0)
    nn_hidden: tuple = (2, 4, 8)
    nn_decay: tuple = (0.01, 0.1, 1.0)
    boost_rounds: tuple = (10, 25, 50, 100, 200)

    def for_learner(self, kind: str) -> dict:
        if kind == "logit":
            return {}
        if kind == "elastic-net":
            return {"lam": sorted(self.enet_lambda)}
        if kind == "logitboost":
            return {"rounds": sorted(self.boost_rounds)}
        if kind == "neural-net":
            return {"hidden": sorted(self.nn_hidden), "decay": sorted(self.nn_decay)}
        raise ValueError(f"unknown learner {kind!r}")


def fit_learner(
    kind: str,
    train: TrainingSet,
    params: dict | None = None,
    seed: int = 0,
    grid: "TuneGrid | None" = None,
    folds: int = 5,
) -> FittedModel:
    """Dispatch to one of the four learners; unset hyperparameters are
    tuned internally."""
    params = dict(params or {})
    if kind == "logit":
        return fit_logit(train)
    if kind == "elastic-net":
        return fit_elastic_net(train, grid=grid, folds=folds, seed=seed, **params)
    if kind == "logitboost":
        return fit_logitboost(train, grid=grid, folds=folds, seed=seed, **params)
    if kind == "neural-net":
        return fit_neural_net(train, grid=grid, folds=folds, seed=seed, **params)
    raise ValueError(f"unknown learner {kind!r}")


def cv_folds(y, folds: int, seed: int) -> np.ndarray:
    """Stratified fold assignment: each class is shuffled once, then dealt
    round-robin, so every fold holds positives whenever folds <= n_pos."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed_for(seed, "cv-folds"))
    assign = np.zeros(len(y), dtype=int)
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(len(members))]
        assign[members] = np.arange(len(members)) % folds
    return assign


def _geometric_extension(values, side):
    """Next grid point past the boundary, spaced like the existing grid."""
    if all(float(v).is_integer() for v in values):
        if side == "low":
            return max(1, int(values[0]) // 2)
        return int(values[-1]) * 2
    if side == "low":
        ratio = values[1] / values[0]
        return values[0] / ratio
    ratio = values[-1] / values[-2]
    return values[-1] * ratio


@dataclass
class TuneResult:
    params: dict
    score: float
    table: list
    folds_used: int
    extensions: int
    at_boundary: bool


def tune(
    kind: str,
    train: TrainingSet,
    grid: TuneGrid | None = None,
    folds: int = 5,
    seed: int = 0,
    max_extensions: int = 3,
) -> TuneResult:
    """Pick hyperparameters by stratified k-fold CV on mean validation
    area under the precision-recall curve.

    A winner sitting on a grid boundary triggers a geometric extension of
    that axis (at most max_extensions times overall; still-boundary
    results are accepted and flagged). Ties prefer the earliest candidate
    in deterministic grid order. Learners without hyperparameters return
    immediately. Folds shrink as needed so every fold holds both classes;
    fewer than 2 of either class cannot be folded at all."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    grid = grid or TuneGrid()
    space = grid.for_learner(kind)
    if not space:
        return TuneResult({}, float("nan"), [], 0, 0, False)

    y = train.y
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos < 2 or n_neg < 2:
        raise TuningError(
            f"need at least 2 of each class to cross-validate, have {n_pos} pos / {n_neg} neg"
        )
    folds_used = max(2, min(folds, n_pos, n_neg))
    assign = cv_folds(y, folds_used, seed)

    axes = sorted(space)
    single_point = all(len(space[a]) == 1 for a in axes)
    if single_point:
        params = {a: space[a][0] for a in axes}
        return TuneResult(params, float("nan"), [], folds_used, 0, False)

    scores: dict = {}

    def score_candidate(params):
        key = tuple(params[a] for a in axes)
        if key in scores:
            return scores[key]
        vals = []
        for f in range(folds_used):
            tr_idx, val_idx = assign != f, assign == f
            try:
                model = fit_learner(
                    kind, train.subset(tr_idx), params,
                    seed=seed_for(seed, "cv-fit", f),
                )
                p = _sigmoid(model.decision(train.Z[val_idx]))
                vals.append(pr_curve(p, y[val_idx]).auc)
            except (FitError, EvaluationError):
                vals.append(-np.inf)
        scores[key] = float(np.mean(vals))
        return scores[key]

    extensions = 0
    while True:
        candidates = [
            dict(zip(axes, combo))
            for combo in itertools.product(*(space[a] for a in axes))
        ]
        best_params, best_score = None, -np.inf
        for cand in candidates:
            s = score_candidate(cand)
            if s > best_score:
                best_params, best_score = cand, s
        grew = False
        if extensions < max_extensions and np.isfinite(best_score):
            for a in axes:
                vals = space[a]
                if len(vals) < 2:
                    continue
                if best_params[a] == vals[0]:
                    new_vals = sorted(set(vals) | {_geometric_extension(vals, "low")})
                elif best_params[a] == vals[-1]:
                    new_vals = sorted(set(vals) | {_geometric_extension(vals, "high")})
                else:
                    continue
                if new_vals != vals:
                    space[a] = new_vals
                    grew = True
                    extensions += 1
                    break
        if not grew:
            break

    if best_params is None or not np.isfinite(best_score):
        raise TuningError(f"no {kind} candidate could be fit on any fold")
    at_boundary = any(
        len(space[a]) > 1 and best_params[a] in (space[a][0], space[a][-1])
        for a in axes
    )
    table = [
        ({a: k for a, k in zip(axes, key)}, val) for key, val in sorted(scores.items())
    ]
    return TuneResult(best_params, best_score, table, folds_used, extensions, at_boundary)
