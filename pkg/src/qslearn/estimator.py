"""The surrogate pipeline: ridge-fit the embedded observations, decode to labels.

Two equivalent prediction paths are kept:

- fast: theta = C^T K_x followed by the per-loss decoder (needs F/U);
- alpha: alpha(x) = (K + n lambda I)^{-1} K_x followed by the brute-force
  argmin of sum_i alpha_i L(z, y_i), which touches only the raw evaluator.

They compute the same minimizer (the fit is linear in the embeddings), so
the alpha path doubles as an oracle for the fast one and works even when no
decomposition is available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .decode import DEFAULT_BUDGET, DecodeBudget, decode, decode_bruteforce
from .kernels import (
    KernelSpec,
    RidgeSolution,
    build_gram,
    cross_kernel,
    solve_ridge,
    weights_at,
)
from .losses import DiscreteLoss, InvalidLabelError, as_label, loss_config, make_loss
from .losses.base import Label

MODEL_FORMAT_VERSION = 1


@dataclass
class QSModel:
    loss: DiscreteLoss
    kernel: KernelSpec
    lam: float
    x_train: np.ndarray
    y_train: list
    ridge: RidgeSolution

    @property
    def coefficients(self) -> np.ndarray:
        return self.ridge.coefficients


def fit(loss: DiscreteLoss, kernel: KernelSpec, lam: float, x, y) -> QSModel:
    """Train the surrogate regressor on (x_i, U_{y_i}) pairs.

    Solves (K + lambda n I) C = Psi once via a shared Cholesky factor; C has
    one column per decomposition coordinate.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("X must be a nonempty n x d array")
    labels = []
    for i, yi in enumerate(y):
        yi = as_label(yi)
        try:
            loss.check_observation(yi)
        except InvalidLabelError as exc:
            raise InvalidLabelError(f"observation {i}: {exc}") from exc
        labels.append(yi)
    if len(labels) != x.shape[0]:
        raise ValueError("X and Y must have equal length")
    psi = np.array([loss.u_row(yi) for yi in labels])
    gram = build_gram(kernel, x)
    ridge = solve_ridge(gram, psi, lam)
    return QSModel(loss, kernel, lam, x, labels, ridge)


def surrogate_values(model: QSModel, x) -> np.ndarray:
    """g(x) = C^T K_x for one point or a batch; rows are R^r predictions."""
    k_x = cross_kernel(model.kernel, x, model.x_train)
    return k_x @ model.coefficients


def alpha_weights(model: QSModel, x) -> np.ndarray:
    """alpha(x) rows for one point or a batch."""
    k_x = cross_kernel(model.kernel, x, model.x_train)
    return weights_at(model.ridge, k_x)


def predict(
    model: QSModel,
    x,
    budget: DecodeBudget = DEFAULT_BUDGET,
    path: str = "fast",
) -> Label:
    """Predict a single label; ``path`` selects fast (F/U) or alpha inference."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    out = predict_batch(model, np.atleast_2d(x), budget=budget, path=path)
    return out[0] if single else out


def predict_batch(
    model: QSModel,
    x,
    budget: DecodeBudget = DEFAULT_BUDGET,
    path: str = "fast",
) -> list:
    if path == "fast":
        thetas = surrogate_values(model, x)
        return [decode(model.loss, t, budget) for t in thetas]
    if path == "alpha":
        alphas = np.atleast_2d(alpha_weights(model, x))
        return [decode_bruteforce(model.loss, a, model.y_train) for a in alphas]
    raise ValueError(f"unknown prediction path {path!r}")


def empirical_risk(predictions, loss: DiscreteLoss, y_true) -> float:
    """Mean loss of a list of predicted labels against observations."""
    y_true = [as_label(yi) for yi in y_true]
    if len(predictions) != len(y_true) or not y_true:
        raise ValueError("need equally many (and at least one) predictions and labels")
    return float(
        np.mean([loss.value(as_label(z), yi) for z, yi in zip(predictions, y_true)])
    )


def evaluate(
    model: QSModel, x_test, y_test, budget: DecodeBudget = DEFAULT_BUDGET
) -> float:
    return empirical_risk(predict_batch(model, x_test, budget), model.loss, y_test)


def save_model(model: QSModel, path: str) -> None:
    """Versioned .npz dump: loss config (JSON), kernel spec, lambda, X, C, Y."""
    np.savez(
        path,
        format_version=MODEL_FORMAT_VERSION,
        loss_json=json.dumps(loss_config(model.loss)),
        kernel_kind=model.kernel.kind,
        bandwidth=-1.0 if model.kernel.bandwidth is None else model.kernel.bandwidth,
        lam=model.lam,
        x_train=model.x_train,
        coefficients=model.coefficients,
        y_train=np.array([list(yi) for yi in model.y_train], dtype=np.int64),
    )


def load_model(path: str) -> QSModel:
    """Rebuild a model from ``save_model`` output.

    The stored coefficient matrix is reused verbatim; only the Gram factor
    (needed by the alpha path) is recomputed from the stored training inputs.
    """
    with np.load(path, allow_pickle=False) as payload:
        version = int(payload["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {version}")
        cfg = json.loads(str(payload["loss_json"]))
        loss = make_loss(cfg.pop("name"), cfg.pop("m"), **cfg)
        bw = float(payload["bandwidth"])
        kernel = KernelSpec(str(payload["kernel_kind"]), None if bw < 0 else bw)
        lam = float(payload["lam"])
        x_train = np.array(payload["x_train"])
        coef = np.array(payload["coefficients"])
        y_train = [tuple(int(v) for v in row) for row in payload["y_train"]]
    gram = build_gram(kernel, x_train)
    ridge = solve_ridge(gram, np.array([loss.u_row(yi) for yi in y_train]), lam)
    ridge = RidgeSolution(coef, lam, ridge.factor)
    return QSModel(loss, kernel, lam, x_train, y_train, ridge)
