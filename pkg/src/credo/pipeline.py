"""Config-driven experiment orchestration.

``run_pipeline`` executes load -> drop sparse -> impute -> encode ->
split -> scale -> [balance] -> [reduce] -> fit -> evaluate -> [explain]
on a resolved configuration, timing each stage, recording every warning
with its stable code, and echoing the exact settings used.  ``cmd_run``
adds the on-disk deliverables (report.json, metrics.csv, processed
splits, a model archive, explanation files); ``cmd_compare`` runs each
configured model with the discriminant reduction off and on and renders
the results as one matrix; ``cmd_explain`` replays a stored archive
against a CSV.  Any stage failure aborts with the stage name and cause,
and files written by the failed invocation are removed.
"""

from __future__ import annotations

import csv
import io
import json
import shutil
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .archive import load_model, save_model
from .errors import CredoWarning, DataError, PipelineError
from .explain import (
    LimeConfig,
    MorrisConfig,
    explanation_to_csv,
    lime_explain,
    morris_screen,
)
from .frame import (
    Frame,
    apply_scaler,
    drop_sparse_features,
    encode,
    fit_scaler,
    impute,
    load_csv,
    numeric_frame,
    split,
)
from .lda import fit_lda, transform_lda
from .metrics import MetricReport, evaluate
from .resample import SmoteConfig, smote
from .zoo import fit_model

__all__ = [
    "CompareCell",
    "ComparisonTable",
    "RunOutcome",
    "cmd_compare",
    "cmd_explain",
    "cmd_run",
    "run_pipeline",
]


@dataclass
class RunOutcome:
    """Everything a run produced, in memory."""

    config: dict
    report: dict
    metrics: MetricReport
    model: object
    train: Frame
    test: Frame
    lime_explanations: list
    morris_screening: object | None


def _class_counts(frame: Frame) -> list[int]:
    return np.bincount(frame.labels, minlength=frame.target.n_classes).tolist()


def run_pipeline(cfg: dict) -> RunOutcome:
    """Execute one resolved configuration end to end, nothing written."""
    timings: list[dict] = []

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            result = fn()
        except Exception as e:
            raise PipelineError(name, e) from e
        timings.append({"stage": name, "seconds": time.perf_counter() - t0})
        return result

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")

        def load():
            frame = load_csv(cfg["data"])
            mask = frame.column(cfg["target"]).missing_mask
            if mask.any():
                frame = frame.select_rows(np.flatnonzero(~mask))
            return frame, int(mask.sum())

        frame, dropped_rows = stage("load", load)
        n_loaded = frame.n_rows

        before_names = frame.column_names
        frame = stage("drop_sparse", lambda: drop_sparse_features(frame, cfg["null_threshold"]))
        dropped_columns = [n for n in before_names if n not in frame.column_names]

        frame = stage("impute", lambda: impute(frame))
        frame = stage("encode", lambda: encode(frame, cfg["target"]))
        class_names = list(frame.target.class_names)

        smote_cfg = cfg["smote"]
        smote_path = "disabled"
        counts_before = counts_after = None
        if smote_cfg["enabled"] and smote_cfg["before_split"]:
            smote_path = "before_split"
            counts_before = _class_counts(frame)
            frame = stage(
                "smote",
                lambda: smote(frame, SmoteConfig(smote_cfg["k_neighbors"], smote_cfg["seed"])),
            )
            counts_after = _class_counts(frame)

        train, test = stage(
            "split", lambda: split(frame, cfg["split"]["train_fraction"], cfg["split"]["seed"])
        )

        if cfg["scaler"] != "none":
            def scale():
                params = fit_scaler(train, cfg["scaler"])
                return apply_scaler(train, params), apply_scaler(test, params)

            train, test = stage("scale", scale)

        if smote_cfg["enabled"] and not smote_cfg["before_split"]:
            smote_path = "after_split"
            counts_before = _class_counts(train)
            train = stage(
                "smote",
                lambda: smote(train, SmoteConfig(smote_cfg["k_neighbors"], smote_cfg["seed"])),
            )
            counts_after = _class_counts(train)
        if counts_before is None:
            counts_before = counts_after = _class_counts(train)

        lda_cfg = cfg["lda"]
        lda_summary = {"enabled": lda_cfg["enabled"], "n_components_requested": None, "n_components_used": None}
        if lda_cfg["enabled"]:
            cap = max(1, min(train.target.n_classes - 1, len(train.column_names)))
            requested = lda_cfg["n_components"] if lda_cfg["n_components"] is not None else cap

            def project():
                projection = fit_lda(train, requested, lda_cfg["ridge"])
                return projection, transform_lda(projection, train), transform_lda(projection, test)

            projection, train, test = stage("lda", project)
            lda_summary["n_components_requested"] = requested
            lda_summary["n_components_used"] = projection.n_components

        model_cfg = cfg["model"]
        model = stage("fit", lambda: fit_model(model_cfg["name"], train, model_cfg["params"]))

        def score():
            proba = np.asarray(model.predict_proba(test.feature_matrix()), dtype=float)
            pred = np.argmax(proba, axis=1)
            return proba, evaluate(test.labels, pred, proba, test.target.n_classes)

        proba, metric_report = stage("evaluate", score)

        explain_cfg = cfg["explain"]
        lime_explanations: list = []
        morris_screening = None
        if explain_cfg["lime_rows"] or explain_cfg["morris"]["enabled"]:
            def explain():
                X_test = test.feature_matrix()
                lime_conf = LimeConfig(**explain_cfg["lime"])
                lime_out = []
                for r in explain_cfg["lime_rows"]:
                    if r >= test.n_rows:
                        raise DataError(f"lime row {r} out of range, test split has {test.n_rows} rows")
                    lime_out.append(
                        lime_explain(
                            model,
                            train,
                            X_test[r],
                            int(np.argmax(proba[r])),
                            lime_conf,
                            row_index=r,
                        )
                    )
                screening = None
                if explain_cfg["morris"]["enabled"]:
                    X_train = train.feature_matrix()
                    ranges = np.column_stack([X_train.min(axis=0), X_train.max(axis=0)])
                    morris_conf = MorrisConfig(
                        n_trajectories=explain_cfg["morris"]["n_trajectories"],
                        n_levels=explain_cfg["morris"]["n_levels"],
                        seed=explain_cfg["morris"]["seed"],
                    )
                    screening = morris_screen(
                        model, ranges, cfg=morris_conf, feature_names=train.column_names
                    )
                return lime_out, screening

            lime_explanations, morris_screening = stage("explain", explain)

    warning_entries = [
        {
            "code": w.message.code if isinstance(w.message, CredoWarning) else "EXTERNAL",
            "message": str(w.message),
        }
        for w in caught
    ]

    report = {
        "config": cfg,
        "preprocessing": {
            "rows": {
                "loaded": n_loaded,
                "dropped_missing_target": dropped_rows,
                "train": train.n_rows,
                "test": test.n_rows,
            },
            "columns_dropped": dropped_columns,
            "scaler": cfg["scaler"],
            "smote": {
                "path": smote_path,
                "class_counts_before": counts_before,
                "class_counts_after": counts_after,
            },
            "lda": lda_summary,
            "class_names": class_names,
            "feature_names": list(train.column_names),
        },
        "metrics": {
            "requested": list(cfg["metrics"]),
            "values": {m: getattr(metric_report, m) for m in cfg["metrics"]},
            "detail": metric_report.to_dict(),
        },
        "timings": timings,
        "warnings": warning_entries,
        "explanations": {
            "lime": [e.to_dict() for e in lime_explanations],
            "morris": None if morris_screening is None else morris_screening.to_dict(),
        },
    }
    return RunOutcome(
        config=cfg,
        report=report,
        metrics=metric_report,
        model=model,
        train=train,
        test=test,
        lime_explanations=lime_explanations,
        morris_screening=morris_screening,
    )


# ----------------------------------------------------------------- cmd_run


def _metrics_csv(outcome: RunOutcome) -> str:
    lines = ["metric,value"]
    for name in outcome.config["metrics"]:
        value = getattr(outcome.metrics, name)
        lines.append(f"{name},{'' if value is None else repr(float(value))}")
    return "\n".join(lines) + "\n"


def _frame_csv(frame: Frame, target_name: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(frame.column_names) + [target_name])
    X = frame.feature_matrix()
    names = frame.target.class_names
    labels = frame.labels
    for i in range(frame.n_rows):
        writer.writerow([repr(float(v)) for v in X[i]] + [names[labels[i]]])
    return buf.getvalue()


def cmd_run(cfg: dict) -> tuple[RunOutcome, Path]:
    """Run one configuration and write its deliverables under out_dir."""
    outcome = run_pipeline(cfg)
    out = Path(cfg["out_dir"])
    created: list[Path] = []

    def emit(path: Path, text: str):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        created.append(path)

    try:
        out.mkdir(parents=True, exist_ok=True)
        emit(out / "report.json", json.dumps(outcome.report, indent=2, sort_keys=True) + "\n")
        emit(out / "metrics.csv", _metrics_csv(outcome))
        emit(out / "processed_train.csv", _frame_csv(outcome.train, cfg["target"]))
        emit(out / "processed_test.csv", _frame_csv(outcome.test, cfg["target"]))
        model_dir = out / "model"
        save_model(
            outcome.model,
            model_dir,
            feature_names=outcome.train.column_names,
            class_names=outcome.train.target.class_names,
            target_name=cfg["target"],
        )
        created.append(model_dir)
        for e in outcome.lime_explanations:
            emit(out / "explanations" / f"lime_row{e.row_index}.json",
                 json.dumps(e.to_dict(), indent=2, sort_keys=True) + "\n")
            emit(out / "explanations" / f"lime_row{e.row_index}.csv", explanation_to_csv(e))
        if outcome.morris_screening is not None:
            emit(out / "explanations" / "morris.json",
                 json.dumps(outcome.morris_screening.to_dict(), indent=2, sort_keys=True) + "\n")
            emit(out / "explanations" / "morris.csv", explanation_to_csv(outcome.morris_screening))
    except Exception as e:
        for path in reversed(created):
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            else:
                path.unlink(missing_ok=True)
        raise PipelineError("write", e) from e
    return outcome, out


# ------------------------------------------------------------- cmd_compare


@dataclass(frozen=True)
class CompareCell:
    model: str
    with_lda: bool
    values: dict | None
    error: str | None


@dataclass(frozen=True)
class ComparisonTable:
    """Model-by-setting metric matrix, rendered as percentages."""

    metric_names: tuple[str, ...]
    rows: tuple[CompareCell, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", "lda", *self.metric_names, "error"])
        for cell in self.rows:
            rendered = []
            for m in self.metric_names:
                v = None if cell.values is None else cell.values.get(m)
                rendered.append("" if v is None else f"{100.0 * v:.2f}")
            writer.writerow([cell.model, "on" if cell.with_lda else "off", *rendered,
                             cell.error or ""])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ComparisonTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[:2] != ["model", "lda"] or header[-1] != "error":
            raise DataError("not a comparison table: bad header")
        metric_names = tuple(header[2:-1])
        rows = []
        for record in reader:
            if not record:
                continue
            model, lda_flag, *cells, error = record
            if error:
                rows.append(CompareCell(model, lda_flag == "on", None, error))
            else:
                values = {
                    m: (float(c) / 100.0 if c else None) for m, c in zip(metric_names, cells)
                }
                rows.append(CompareCell(model, lda_flag == "on", values, None))
        return cls(metric_names, tuple(rows))

    def to_dict(self) -> dict:
        return {
            "metrics": list(self.metric_names),
            "rows": [
                {
                    "model": c.model,
                    "lda": c.with_lda,
                    "values": c.values,
                    "error": c.error,
                }
                for c in self.rows
            ],
        }


def cmd_compare(cfg: dict) -> tuple[ComparisonTable, Path]:
    """Run every configured model with the reduction off and on."""
    rows = []
    for with_lda in (False, True):
        for entry in cfg["models"]:
            cell_cfg = json.loads(json.dumps(cfg))
            cell_cfg["model"] = entry
            cell_cfg["models"] = [entry]
            cell_cfg["lda"]["enabled"] = with_lda
            cell_cfg["explain"]["lime_rows"] = []
            cell_cfg["explain"]["morris"]["enabled"] = False
            try:
                outcome = run_pipeline(cell_cfg)
                values = {m: getattr(outcome.metrics, m) for m in cfg["metrics"]}
                rows.append(CompareCell(entry["name"], with_lda, values, None))
            except Exception as e:
                rows.append(CompareCell(entry["name"], with_lda, None, str(e)))
    table = ComparisonTable(tuple(cfg["metrics"]), tuple(rows))

    out = Path(cfg["out_dir"])
    created: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "compare.csv"
        csv_path.write_text(table.to_csv())
        created.append(csv_path)
        json_path = out / "compare.json"
        json_path.write_text(json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n")
        created.append(json_path)
    except Exception as e:
        for path in reversed(created):
            path.unlink(missing_ok=True)
        raise PipelineError("write", e) from e
    return table, out


# ------------------------------------------------------------- cmd_explain


def _load_background(data_path: str, manifest: dict) -> tuple[Frame, np.ndarray]:
    data = load_csv(data_path)
    features = manifest["schema"]["features"]
    target = manifest["schema"]["target"]
    present = set(data.column_names)
    missing = sorted(set(features) - present)
    extra = sorted(present - set(features) - {target})
    if missing or extra:
        raise DataError(
            f"data schema mismatch; missing columns: {missing}; extra columns: {extra}"
        )
    bad_kind = [n for n in features if data.column(n).kind != "numeric"]
    if bad_kind:
        raise DataError(f"columns are not numeric: {bad_kind}")
    X = np.column_stack([data.column(n).values for n in features]).astype(float)
    if np.isnan(X).any():
        raise DataError("data has missing cells in feature columns, impute first")
    return numeric_frame(X, names=list(features)), X


def cmd_explain(
    archive_dir: str,
    data_path: str,
    method: str,
    row: int = 0,
    target_class: int | None = None,
    out_dir: str = ".",
    seed: int = 0,
) -> dict:
    """Explain an archived model against a processed CSV; writes files."""
    if method not in ("lime", "morris"):
        raise DataError(f"unknown explain method {method!r}")
    model, manifest = load_model(archive_dir)
    background, X = _load_background(data_path, manifest)

    out = Path(out_dir) / "explanations"
    out.mkdir(parents=True, exist_ok=True)
    if method == "lime":
        if not 0 <= row < background.n_rows:
            raise DataError(f"row {row} out of range, data has {background.n_rows} rows")
        cls = int(model.predict(X[row : row + 1])[0]) if target_class is None else int(target_class)
        explanation = lime_explain(
            model, background, X[row], cls, LimeConfig(seed=seed), row_index=row
        )
        json_path = out / f"lime_row{row}.json"
        csv_path = out / f"lime_row{row}.csv"
    else:
        ranges = np.column_stack([X.min(axis=0), X.max(axis=0)])
        output = "predicted_class_prob" if target_class is None else "class_prob"
        explanation = morris_screen(
            model,
            ranges,
            output,
            target_class=target_class,
            cfg=MorrisConfig(seed=seed),
            feature_names=background.column_names,
        )
        json_path = out / "morris.json"
        csv_path = out / "morris.csv"

    json_path.write_text(json.dumps(explanation.to_dict(), indent=2, sort_keys=True) + "\n")
    csv_path.write_text(explanation_to_csv(explanation))
    return {
        "method": method,
        "json": str(json_path),
        "csv": str(csv_path),
        "explanation": explanation,
    }
