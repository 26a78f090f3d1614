"""One fitting interface over the eight model families.

Every fitted object satisfies the same contract: ``n_classes``,
``n_features``, row-stochastic ``predict_proba``, and ``predict`` as its
argmax. The discriminant projection gets a thin adapter so it can stand
in the zoo next to the other classifiers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import fit_forest, fit_gnb, fit_logreg, fit_tree
from .errors import ConfigError
from .frame import Frame, numeric_frame
from .gbt import GbtConfig, fit_gbt
from .lda import ProjectionLDA, fit_lda, predict_lda
from .neural import MlpConfig, fit_hybrid, fit_mlp

__all__ = ["MODEL_NAMES", "LdaClassifier", "fit_model"]

MODEL_NAMES = ("logreg", "gnb", "tree", "forest", "gbt", "mlp", "lda", "xgdnn")


@dataclass(frozen=True)
class LdaClassifier:
    """Gaussian discriminant classifier over a fitted projection."""

    projection: ProjectionLDA

    @property
    def n_features(self) -> int:
        return len(self.projection.feature_names)

    @property
    def n_classes(self) -> int:
        return len(self.projection.class_priors)

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        f = numeric_frame(X, names=list(self.projection.feature_names))
        return predict_lda(self.projection, f)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def _mlp_config(params: dict) -> MlpConfig:
    p = dict(params)
    if "hidden" in p:
        p["hidden"] = tuple(p["hidden"])
    return MlpConfig(**p)


def fit_model(name: str, train: Frame, params: dict):
    """Fit the named model on `train` with its family's keyword params."""
    if name == "logreg":
        return fit_logreg(train, **params)
    if name == "gnb":
        return fit_gnb(train, **params)
    if name == "tree":
        return fit_tree(train, **params)
    if name == "forest":
        return fit_forest(train, **params)
    if name == "gbt":
        return fit_gbt(train, GbtConfig(**params))
    if name == "mlp":
        return fit_mlp(train, _mlp_config(params))
    if name == "lda":
        p = dict(params)
        n_components = p.pop("n_components", None)
        ridge = p.pop("ridge", None)
        if p:
            raise ConfigError(f"unknown lda params: {sorted(p)}")
        if n_components is None:
            n_components = max(1, min(train.target.n_classes - 1, len(train.column_names)))
        return LdaClassifier(fit_lda(train, n_components, ridge))
    if name == "xgdnn":
        p = dict(params)
        gbt_cfg = GbtConfig(**p.pop("gbt", {}))
        mlp_cfg = _mlp_config(p.pop("mlp", {}))
        mode = p.pop("feature_mode", "margins")
        if p:
            raise ConfigError(f"unknown xgdnn params: {sorted(p)}")
        return fit_hybrid(train, gbt_cfg, mlp_cfg, mode)
    raise ConfigError(f"unknown model name {name!r}")
