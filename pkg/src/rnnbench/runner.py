"""Grid execution: train every selected (body, head, dataset) cell under
the benchmark protocol and persist results for reporting.

Datasets with standard split tags train on their train split (carving a
dev split when no dev tags exist, as for TREC) and score the test split.
Unsplit corpora run seeded 10-fold cross-validation with a per-fold dev
split; the cell accuracy is the mean over folds, then over seeds.

Each cell owns one subdirectory with result.json, metadata.json, and the
best model checkpoint; a grid index records completion status, and
completed cells are never retrained on resume.
"""

import json
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import ExperimentSpec
from .data import (DATASETS, TOKENIZER_VERSION, canonical_name, dev_split,
                   import_jsonl, make_folds, vocabulary)
from .embeddings import load_embeddings
from .errors import InvalidConfigError, RnnBenchError
from .numkit import derive_seed
from .trainer import Model, ModelConfig, evaluate, save_model, train


def cell_key(body: str, head: str, dataset: str) -> str:
    return f"{body}_{head}__{dataset.lower().replace('-', '')}"


def dataset_stem(name: str) -> str:
    cname = canonical_name(name)
    return DATASETS[cname].stem if cname else name.lower()


def _dataset_path(spec: ExperimentSpec, dataset: str) -> Path:
    return Path(spec.data_dir) / f"{dataset_stem(dataset)}.jsonl"


def load_prepared(spec: ExperimentSpec, dataset: str):
    """Load a prepared JSONL corpus, enforcing published stats for the
    canonical six."""
    path = _dataset_path(spec, dataset)
    if not path.exists():
        raise InvalidConfigError(
            f"dataset {dataset!r} not prepared; expected {path} "
            f"(run: rnnbench prepare {dataset_stem(dataset)} --in <raw files> "
            f"--out {path})")
    cname = canonical_name(dataset)
    classes = DATASETS[cname].classes if cname else None
    corpus = import_jsonl(path, cname or dataset, classes)
    if cname:
        info = DATASETS[cname]
        if len(corpus) != info.size:
            raise RnnBenchError(
                f"{cname}: prepared file has {len(corpus)} examples, "
                f"published size is {info.size}")
    return corpus


def _model_config(spec: ExperimentSpec, body, head, n_classes, seed) -> ModelConfig:
    return ModelConfig(
        body=body, head=head, n_classes=n_classes, seed=seed,
        d_h=spec.d_h or None, input_dim=spec.embedding_dim,
        dropout_rate=spec.dropout_rate, learning_rate=spec.learning_rate,
        max_epochs=spec.max_epochs, patience=spec.patience,
        batch_size=spec.batch_size, adagrad_epsilon=spec.adagrad_epsilon,
        init_std=spec.init_std, init_literal_std=spec.init_literal_std,
        grad_clip=spec.grad_clip)


_TABLE_CACHE: dict[tuple, object] = {}


def _embedding_table(spec: ExperimentSpec, corpus):
    """Load vectors restricted to the corpus vocabulary (cached per worker)."""
    key = (spec.embeddings, corpus.name, spec.oov_seed, spec.oov_range)
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = load_embeddings(
            spec.embeddings, expected_dim=spec.embedding_dim,
            restrict_vocab=vocabulary([corpus]),
            seed=spec.oov_seed, oov_range=spec.oov_range)
        _TABLE_CACHE.clear()     # one table at a time keeps memory bounded
        _TABLE_CACHE[key] = table
    return table


def _run_one(model_cfg, table, train_ex, dev_ex, test_ex, log=None):
    model = Model(model_cfg)
    result = train(model, table, train_ex, dev_ex, log=log)
    test = evaluate(model, table, test_ex)
    return model, result, test


def run_cell(spec: ExperimentSpec, body: str, head: str, dataset: str,
             log=None) -> dict:
    """Train and evaluate one grid cell; returns the result record."""
    corpus = load_prepared(spec, dataset)
    table = _embedding_table(spec, corpus)
    started = time.time()
    per_seed = {}
    best_acc = -1.0
    best_model = None

    for seed in spec.seeds:
        cell_seed = derive_seed(seed, body, head, dataset)
        runs = []
        if corpus.has_standard_split:
            train_ex = corpus.split("train")
            dev_ex = corpus.split("dev")
            test_ex = corpus.split("test")
            if not dev_ex:      # e.g. TREC: carve 10% of train
                train_ex, dev_ex = dev_split(
                    train_ex, spec.dev_fraction, derive_seed(cell_seed, "dev"))
            cfg = _model_config(spec, body, head, corpus.classes, cell_seed)
            model, tres, test = _run_one(cfg, table, train_ex, dev_ex, test_ex, log)
            runs.append({
                "fold": None, "accuracy": test.accuracy,
                "epoch_selected": tres.epoch_selected,
                "dev_history": tres.dev_accuracy_history,
                "train_size": len(train_ex), "dev_size": len(dev_ex),
                "test_size": len(test_ex)})
            if test.accuracy > best_acc:
                best_acc, best_model = test.accuracy, model
        else:
            plan = make_folds(corpus, spec.folds, derive_seed(cell_seed, "folds"))
            for fold in range(plan.k):
                train_idx, test_idx = plan.fold_indices(fold)
                pool = [corpus.examples[i] for i in train_idx]
                test_ex = [corpus.examples[i] for i in test_idx]
                train_ex, dev_ex = dev_split(
                    pool, spec.dev_fraction, derive_seed(cell_seed, "dev", fold))
                cfg = _model_config(spec, body, head, corpus.classes,
                                    derive_seed(cell_seed, "fold", fold))
                model, tres, test = _run_one(cfg, table, train_ex, dev_ex,
                                             test_ex, log)
                runs.append({
                    "fold": fold, "accuracy": test.accuracy,
                    "epoch_selected": tres.epoch_selected,
                    "dev_history": tres.dev_accuracy_history,
                    "train_size": len(train_ex), "dev_size": len(dev_ex),
                    "test_size": len(test_ex)})
                if test.accuracy > best_acc:
                    best_acc, best_model = test.accuracy, model
        per_seed[str(seed)] = {
            "accuracy": sum(r["accuracy"] for r in runs) / len(runs),
            "runs": runs,
        }

    accuracy = sum(s["accuracy"] for s in per_seed.values()) / len(per_seed)
    return {
        "body": body, "head": head, "dataset": dataset,
        "status": "done", "accuracy": accuracy, "per_seed": per_seed,
        "wall_seconds": round(time.time() - started, 3),
        "_best_model": best_model,
    }


def _cell_dir(spec: ExperimentSpec, body, head, dataset) -> Path:
    return Path(spec.out_dir) / cell_key(body, head, dataset)


def _persist_cell(spec: ExperimentSpec, record: dict) -> None:
    cdir = _cell_dir(spec, record["body"], record["head"], record["dataset"])
    cdir.mkdir(parents=True, exist_ok=True)
    model = record.pop("_best_model", None)
    if model is not None:
        save_model(model, cdir / "model.ckpt")
    metadata = {
        "spec": asdict(spec),
        "tokenizer_version": TOKENIZER_VERSION,
        "package_version": __version__,
        "cell": {k: record[k] for k in ("body", "head", "dataset", "status")},
        "seeds": spec.seeds,
    }
    with open(cdir / "metadata.json", "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=2)
    with open(cdir / "result.json", "w", encoding="utf-8") as f:
        json.dump(record, f, indent=2)


def _load_cell(spec: ExperimentSpec, body, head, dataset) -> dict | None:
    path = _cell_dir(spec, body, head, dataset) / "result.json"
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            record = json.load(f)
    except (OSError, json.JSONDecodeError):
        return None
    if record.get("status") != "done":
        return None
    return record


def _worker(args):
    """Run and persist one cell; safe to call in a worker process."""
    spec_dict, body, head, dataset = args
    spec = ExperimentSpec(**spec_dict)
    try:
        record = run_cell(spec, body, head, dataset)
        _persist_cell(spec, record)     # strips the model from the record
        return record
    except RnnBenchError as exc:
        return {"body": body, "head": head, "dataset": dataset,
                "status": "failed", "error": str(exc)}
    except Exception:
        return {"body": body, "head": head, "dataset": dataset,
                "status": "failed", "error": traceback.format_exc()}


def run_grid(spec: ExperimentSpec, resume: bool = True, log=print) -> dict:
    """Execute every selected cell; returns {key: result record}.

    Completed cells are loaded, not retrained, when resume is on.
    Failed/diverged cells are recorded and the grid continues.
    """
    spec.validate()
    cells = [(body, head, dataset)
             for dataset in spec.datasets
             for body in spec.bodies
             for head in spec.heads]
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    results: dict[str, dict] = {}
    todo = []
    for body, head, dataset in cells:
        if resume:
            record = _load_cell(spec, body, head, dataset)
            if record is not None:
                results[cell_key(body, head, dataset)] = record
                continue
        todo.append((body, head, dataset))

    def finish(record):
        key = cell_key(record["body"], record["head"], record["dataset"])
        if log:
            if record["status"] == "done":
                log(f"[{key}] accuracy {record['accuracy']:.4f} "
                    f"({record['wall_seconds']}s)")
            else:
                log(f"[{key}] FAILED: {record['error'].splitlines()[-1]}")
        results[key] = record
        _write_index(spec, cells, results)

    if spec.workers > 1 and len(todo) > 1:
        args = [(asdict(spec), b, h, d) for b, h, d in todo]
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for record in pool.map(_worker, args):
                finish(record)
    else:
        for body, head, dataset in todo:
            finish(_worker((asdict(spec), body, head, dataset)))

    _write_index(spec, cells, results)
    return results


def _write_index(spec: ExperimentSpec, cells, results) -> None:
    index = {}
    for body, head, dataset in cells:
        key = cell_key(body, head, dataset)
        record = results.get(key)
        index[key] = record["status"] if record else "pending"
    with open(Path(spec.out_dir) / "grid_index.json", "w", encoding="utf-8") as f:
        json.dump(index, f, indent=2, sort_keys=True)


def failed_cells(results: dict) -> list[str]:
    return sorted(k for k, r in results.items() if r.get("status") != "done")
