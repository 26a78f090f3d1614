"""JSON run configuration: loading, validation, defaulting.

Every validation failure names the offending key with a dotted path
(e.g. ``config.smote.k_neighbors: expected an integer``) so a bad file
can be fixed without reading source. ``resolve_config`` returns a fully
defaulted plain dict, which downstream reports echo verbatim.
"""

from __future__ import annotations

import copy
import json

from .errors import ConfigError
from .neural import FEATURE_MODES
from .zoo import MODEL_NAMES

__all__ = ["METRIC_NAMES", "SCALER_MODES", "load_config", "resolve_config"]

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "g_mean", "h_measure", "f1")
SCALER_MODES = ("zscore", "minmax", "none")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path!r} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object at the top level")
    return raw


# -------------------------------------------------------------- checkers


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _check_keys(obj: dict, path: str, allowed):
    for key in obj:
        if key not in allowed:
            _fail(path, f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})")


def _as_object(v, path) -> dict:
    if not isinstance(v, dict):
        _fail(path, "expected an object")
    return v


def _as_bool(v, path) -> bool:
    if not isinstance(v, bool):
        _fail(path, "expected true or false")
    return v


def _as_int(v, path, minimum=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, "expected an integer")
    if minimum is not None and v < minimum:
        _fail(path, f"must be at least {minimum}")
    return v


def _as_number(v, path, minimum=None, maximum=None) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, "expected a number")
    if minimum is not None and v < minimum:
        _fail(path, f"must be at least {minimum}")
    if maximum is not None and v > maximum:
        _fail(path, f"must be at most {maximum}")
    return float(v)


def _as_string(v, path, choices=None) -> str:
    if not isinstance(v, str):
        _fail(path, "expected a string")
    if choices is not None and v not in choices:
        _fail(path, f"expected one of {', '.join(choices)}, got {v!r}")
    return v


def _optional(checker):
    def check(v, path, **kw):
        return None if v is None else checker(v, path, **kw)

    return check


_opt_int = _optional(_as_int)
_opt_number = _optional(_as_number)


def _as_int_list(v, path, minimum=None) -> list[int]:
    if not isinstance(v, list):
        _fail(path, "expected a list of integers")
    return [_as_int(x, f"{path}[{i}]", minimum) for i, x in enumerate(v)]


# --------------------------------------------------------- model params


def _check_model_params(name: str, params, path: str) -> dict:
    params = _as_object(params, path)
    if name == "logreg":
        _check_keys(params, path, {"l2", "max_iter", "tol"})
        if "l2" in params:
            _as_number(params["l2"], f"{path}.l2", minimum=0)
        if "max_iter" in params:
            _as_int(params["max_iter"], f"{path}.max_iter", minimum=0)
        if "tol" in params:
            _as_number(params["tol"], f"{path}.tol", minimum=0)
    elif name == "gnb":
        _check_keys(params, path, {"var_smoothing"})
        if "var_smoothing" in params:
            _as_number(params["var_smoothing"], f"{path}.var_smoothing", minimum=0)
    elif name in ("tree", "forest"):
        allowed = {"max_depth", "min_leaf", "criterion"}
        if name == "forest":
            allowed |= {"n_trees", "mtry", "seed", "bootstrap"}
        _check_keys(params, path, allowed)
        if "max_depth" in params:
            _opt_int(params["max_depth"], f"{path}.max_depth", minimum=1)
        if "min_leaf" in params:
            _as_int(params["min_leaf"], f"{path}.min_leaf", minimum=1)
        if "criterion" in params:
            _as_string(params["criterion"], f"{path}.criterion", choices=("gini", "entropy"))
        if "n_trees" in params:
            _as_int(params["n_trees"], f"{path}.n_trees", minimum=1)
        if "mtry" in params:
            _opt_int(params["mtry"], f"{path}.mtry", minimum=1)
        if "seed" in params:
            _as_int(params["seed"], f"{path}.seed")
        if "bootstrap" in params:
            _as_bool(params["bootstrap"], f"{path}.bootstrap")
    elif name == "gbt":
        _check_gbt_params(params, path)
    elif name == "mlp":
        _check_mlp_params(params, path)
    elif name == "lda":
        _check_keys(params, path, {"n_components", "ridge"})
        if "n_components" in params:
            _opt_int(params["n_components"], f"{path}.n_components", minimum=1)
        if "ridge" in params:
            _opt_number(params["ridge"], f"{path}.ridge", minimum=0)
    elif name == "xgdnn":
        _check_keys(params, path, {"gbt", "mlp", "feature_mode"})
        _check_gbt_params(_as_object(params.get("gbt", {}), f"{path}.gbt"), f"{path}.gbt")
        _check_mlp_params(_as_object(params.get("mlp", {}), f"{path}.mlp"), f"{path}.mlp")
        if "feature_mode" in params:
            _as_string(params["feature_mode"], f"{path}.feature_mode", choices=FEATURE_MODES)
    return params


def _check_gbt_params(params: dict, path: str):
    _check_keys(
        params,
        path,
        {"rounds", "learning_rate", "max_depth", "lam", "gamma", "min_child_weight", "seed"},
    )
    if "rounds" in params:
        _as_int(params["rounds"], f"{path}.rounds", minimum=0)
    if "learning_rate" in params:
        _as_number(params["learning_rate"], f"{path}.learning_rate", minimum=0)
    if "max_depth" in params:
        _as_int(params["max_depth"], f"{path}.max_depth", minimum=1)
    for key in ("lam", "gamma", "min_child_weight"):
        if key in params:
            _as_number(params[key], f"{path}.{key}", minimum=0)
    if "seed" in params:
        _as_int(params["seed"], f"{path}.seed")


def _check_mlp_params(params: dict, path: str):
    _check_keys(params, path, {"hidden", "epochs", "batch_size", "learning_rate", "seed"})
    if "hidden" in params:
        _as_int_list(params["hidden"], f"{path}.hidden", minimum=1)
    if "epochs" in params:
        _as_int(params["epochs"], f"{path}.epochs", minimum=0)
    if "batch_size" in params:
        _as_int(params["batch_size"], f"{path}.batch_size", minimum=1)
    if "learning_rate" in params:
        _as_number(params["learning_rate"], f"{path}.learning_rate", minimum=0)
    if "seed" in params:
        _as_int(params["seed"], f"{path}.seed")


def _check_model_entry(entry, path: str) -> dict:
    entry = _as_object(entry, path)
    _check_keys(entry, path, {"name", "params"})
    if "name" not in entry:
        _fail(path, "missing required key 'name'")
    name = _as_string(entry["name"], f"{path}.name", choices=MODEL_NAMES)
    params = _check_model_params(name, entry.get("params", {}), f"{path}.params")
    return {"name": name, "params": copy.deepcopy(params)}


# ---------------------------------------------------------------- resolve


_TOP_KEYS = {
    "data",
    "target",
    "null_threshold",
    "scaler",
    "smote",
    "split",
    "lda",
    "model",
    "models",
    "metrics",
    "explain",
    "out_dir",
}


def resolve_config(raw: dict) -> dict:
    """Validate `raw` and return the fully defaulted configuration.

    The result always carries both a single `model` and a `models` list
    (they agree when only one was given); every optional knob is filled
    with its default so reports can echo the exact settings used.
    """
    raw = _as_object(raw, "config")
    _check_keys(raw, "config", _TOP_KEYS)
    for key in ("data", "target"):
        if key not in raw:
            _fail("config", f"missing required key {key!r}")

    out: dict = {
        "data": _as_string(raw["data"], "config.data"),
        "target": _as_string(raw["target"], "config.target"),
        "null_threshold": _as_number(
            raw.get("null_threshold", 0.5), "config.null_threshold", minimum=0, maximum=1
        ),
        "scaler": _as_string(raw.get("scaler", "zscore"), "config.scaler", choices=SCALER_MODES),
        "out_dir": _as_string(raw.get("out_dir", "credo_out"), "config.out_dir"),
    }

    smote = _as_object(raw.get("smote", {}), "config.smote")
    _check_keys(smote, "config.smote", {"enabled", "k_neighbors", "seed", "before_split"})
    out["smote"] = {
        "enabled": _as_bool(smote.get("enabled", True), "config.smote.enabled"),
        "k_neighbors": _as_int(smote.get("k_neighbors", 5), "config.smote.k_neighbors", minimum=1),
        "seed": _as_int(smote.get("seed", 0), "config.smote.seed"),
        "before_split": _as_bool(smote.get("before_split", False), "config.smote.before_split"),
    }

    split = _as_object(raw.get("split", {}), "config.split")
    _check_keys(split, "config.split", {"train_fraction", "seed"})
    fraction = _as_number(
        split.get("train_fraction", 0.8), "config.split.train_fraction", minimum=0, maximum=1
    )
    if not 0 < fraction < 1:
        _fail("config.split.train_fraction", "must lie strictly between 0 and 1")
    out["split"] = {
        "train_fraction": fraction,
        "seed": _as_int(split.get("seed", 7), "config.split.seed"),
    }

    lda = _as_object(raw.get("lda", {}), "config.lda")
    _check_keys(lda, "config.lda", {"enabled", "n_components", "ridge"})
    out["lda"] = {
        "enabled": _as_bool(lda.get("enabled", False), "config.lda.enabled"),
        "n_components": _opt_int(lda.get("n_components"), "config.lda.n_components", minimum=1),
        "ridge": _opt_number(lda.get("ridge"), "config.lda.ridge", minimum=0),
    }

    if "model" not in raw and "models" not in raw:
        _fail("config", "missing required key 'model' (or a 'models' list)")
    models = []
    if "models" in raw:
        entries = raw["models"]
        if not isinstance(entries, list) or not entries:
            _fail("config.models", "expected a non-empty list of model entries")
        models = [_check_model_entry(e, f"config.models[{i}]") for i, e in enumerate(entries)]
    if "model" in raw:
        single = _check_model_entry(raw["model"], "config.model")
        out["model"] = single
        if not models:
            models = [single]
    else:
        out["model"] = copy.deepcopy(models[0])
    out["models"] = models

    metrics = raw.get("metrics", list(METRIC_NAMES))
    if not isinstance(metrics, list) or not metrics:
        _fail("config.metrics", "expected a non-empty list of metric names")
    seen = set()
    for i, m in enumerate(metrics):
        _as_string(m, f"config.metrics[{i}]", choices=METRIC_NAMES)
        if m in seen:
            _fail(f"config.metrics[{i}]", f"duplicate metric {m!r}")
        seen.add(m)
    out["metrics"] = list(metrics)

    explain = _as_object(raw.get("explain", {}), "config.explain")
    _check_keys(explain, "config.explain", {"lime_rows", "lime", "morris"})
    lime = _as_object(explain.get("lime", {}), "config.explain.lime")
    _check_keys(lime, "config.explain.lime", {"n_samples", "kernel_width", "n_features", "seed"})
    morris = _as_object(explain.get("morris", {}), "config.explain.morris")
    _check_keys(
        morris, "config.explain.morris", {"enabled", "n_trajectories", "n_levels", "seed"}
    )
    out["explain"] = {
        "lime_rows": _as_int_list(
            explain.get("lime_rows", []), "config.explain.lime_rows", minimum=0
        ),
        "lime": {
            "n_samples": _as_int(
                lime.get("n_samples", 5000), "config.explain.lime.n_samples", minimum=2
            ),
            "kernel_width": _opt_number(
                lime.get("kernel_width"), "config.explain.lime.kernel_width", minimum=0
            ),
            "n_features": _opt_int(
                lime.get("n_features"), "config.explain.lime.n_features", minimum=1
            ),
            "seed": _as_int(lime.get("seed", 0), "config.explain.lime.seed"),
        },
        "morris": {
            "enabled": _as_bool(morris.get("enabled", False), "config.explain.morris.enabled"),
            "n_trajectories": _as_int(
                morris.get("n_trajectories", 20), "config.explain.morris.n_trajectories", minimum=2
            ),
            "n_levels": _as_int(
                morris.get("n_levels", 4), "config.explain.morris.n_levels", minimum=2
            ),
            "seed": _as_int(morris.get("seed", 0), "config.explain.morris.seed"),
        },
    }
    return out
