"""End-to-end run driver: captions to evaluation, with a hash manifest.

A run config (TOML or JSON) names the input files, the dataset and model
settings, and an output directory.  The stages run in a fixed order:

    parse -> link -> build -> train -> predict -> infer -> eval

Every stage writes its artifacts into the output directory, and the
manifest records format versions, the seed, and the sha256 of each
output, so reruns can be compared byte for byte.  All randomness flows
from the config's rng_seed; nothing reads the clock or OS entropy.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

import vid2kg
from vid2kg.atoms import DatasetRecord, KnowledgeGraph
from vid2kg.dataset import (
    BuildConfig,
    assemble_dataset,
    read_vocabulary,
    write_vocabulary,
)
from vid2kg.embeddings import load_embeddings
from vid2kg.errors import DataError, Vid2kgError
from vid2kg.extract import parse_caption_file, read_fragments, write_fragments
from vid2kg.kgio import read_dataset, read_kg_store, write_dataset, write_kg_store
from vid2kg.linking import link_atoms
from vid2kg.metrics import evaluate_corpus, evaluate_example, report_json
from vid2kg.model import (
    ModelConfig,
    load_features,
    predict_kg,
    resolve_encoding,
    train,
    write_params,
)
from vid2kg.model.params import PARAMS_FORMAT_VERSION
from vid2kg.ontology import closure, load_ontology

MANIFEST_FORMAT_VERSION = 1

STAGE_NAMES = ("parse", "link", "build", "train", "predict", "infer", "eval")

_EXTRACTION_MODES = ("repaired", "faithful")


@dataclass
class PipelineConfig:
    """Validated run configuration with paths already resolved."""

    rng_seed: int
    out_dir: Path
    conllu: Path
    video_map: Path
    ontology: Path
    embeddings: Path
    features: Path
    parse_mode: str = "repaired"
    min_count: int = 50
    negatives_per_fact: int = 1
    model: dict = field(default_factory=dict)
    use_embeddings: bool = True
    eval_mode: str = "micro"


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise DataError(f"{where}: missing required key {key!r}")
    return obj[key]


def load_pipeline_config(path, out_dir=None) -> PipelineConfig:
    """Read and validate a TOML or JSON run config.

    Input paths are resolved relative to the config file; out_dir is
    relative to the working directory, and the out_dir argument overrides
    the config value.
    """
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as fh:
                obj = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: no such config file") from None
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: cannot parse config: {exc}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{path}: config must be a table/object")

    where = str(path)
    seed = _require(obj, "rng_seed", where)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise DataError(f"{where}: rng_seed must be a non-negative integer")
    if out_dir is None:
        out_dir = _require(obj, "out_dir", where)
    inputs = _require(obj, "inputs", where)
    if not isinstance(inputs, dict):
        raise DataError(f"{where}: inputs must be a table/object")
    base = path.resolve().parent

    def input_path(key):
        return base / str(_require(inputs, key, f"{where}: inputs"))

    build = obj.get("build", {})
    model = obj.get("model", {})
    parse = obj.get("parse", {})
    evaluation = obj.get("eval", {})
    for name, section in (
        ("build", build),
        ("model", model),
        ("parse", parse),
        ("eval", evaluation),
    ):
        if not isinstance(section, dict):
            raise DataError(f"{where}: {name} must be a table/object")
    mode = parse.get("mode", "repaired")
    if mode not in _EXTRACTION_MODES:
        raise DataError(f"{where}: parse.mode must be one of {_EXTRACTION_MODES}")
    eval_mode = evaluation.get("mode", "micro")
    cfg = PipelineConfig(
        rng_seed=seed,
        out_dir=Path(out_dir),
        conllu=input_path("conllu"),
        video_map=input_path("video_map"),
        ontology=input_path("ontology"),
        embeddings=input_path("embeddings"),
        features=input_path("features"),
        parse_mode=mode,
        min_count=build.get("min_count", 50),
        negatives_per_fact=build.get("negatives_per_fact", 1),
        model=dict(model),
        use_embeddings=bool(model.get("use_embeddings", True)),
        eval_mode=eval_mode,
    )
    cfg.model.pop("use_embeddings", None)
    return cfg


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _Runner:
    def __init__(self, cfg: PipelineConfig, progress=None):
        self.cfg = cfg
        self.progress = progress
        self.stages = []

    def run(self, name: str, fn, outputs):
        try:
            fn()
        except Vid2kgError as exc:
            raise DataError(f"pipeline stage {name} failed: {exc}") from exc
        except Exception as exc:
            raise RuntimeError(f"pipeline stage {name} failed: {exc}") from exc
        entry = {
            "name": name,
            "outputs": [
                {"path": p.name, "sha256": _sha256(p)} for p in outputs
            ],
        }
        self.stages.append(entry)
        if self.progress is not None:
            files = ", ".join(o["path"] for o in entry["outputs"])
            self.progress(f"stage {name}: {files}")


def _model_config(cfg: PipelineConfig, encoding_dim: int) -> ModelConfig:
    settings = dict(cfg.model)
    settings.setdefault("encoding_dim", encoding_dim)
    try:
        return ModelConfig(rng_seed=cfg.rng_seed, **settings)
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad model settings: {exc}") from exc


def run_pipeline(cfg: PipelineConfig, progress=None) -> dict:
    """Run all stages and return the manifest (also written to disk)."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    runner = _Runner(cfg, progress)

    fragments_path = out / "fragments.jsonl"
    linked_path = out / "linked.jsonl"
    dataset_path = out / "dataset.jsonl"
    vocab_path = out / "vocabulary.json"
    params_path = out / "params.json"
    trace_path = out / "trace.json"
    predicted_path = out / "predicted.jsonl"
    inferred_path = out / "inferred.jsonl"
    report_path = out / "report.json"

    def do_parse():
        extractions = parse_caption_file(
            cfg.conllu, cfg.video_map, mode=cfg.parse_mode
        )
        write_fragments(fragments_path, extractions)

    runner.run("parse", do_parse, [fragments_path])

    ont = load_ontology(cfg.ontology)
    emb = load_embeddings(cfg.embeddings)

    def do_link():
        linked = link_atoms(read_fragments(fragments_path), ont, emb)
        write_fragments(linked_path, linked)

    runner.run("link", do_link, [linked_path])

    def do_build():
        entries = [
            (ext.video_id, ext.atoms) for ext in read_fragments(linked_path)
        ]
        build_cfg = BuildConfig(
            rng_seed=cfg.rng_seed,
            min_count=cfg.min_count,
            negatives_per_fact=cfg.negatives_per_fact,
        )
        kgs, vocab = assemble_dataset(entries, build_cfg)
        write_dataset([DatasetRecord.from_graph(kg) for kg in kgs], dataset_path)
        write_vocabulary(vocab, vocab_path)

    runner.run("build", do_build, [dataset_path, vocab_path])

    features = load_features(cfg.features)
    state = {}

    def do_train():
        records = read_dataset(dataset_path)
        vocab = read_vocabulary(vocab_path)
        model_cfg = _model_config(cfg, features.dim)
        result = train(
            records,
            features,
            model_cfg,
            vocab,
            emb=emb if cfg.use_embeddings else None,
        )
        write_params(result.params, params_path)
        trace = {
            "loss": result.loss_trace,
            "classifier": result.classifier_trace,
            "facts": result.facts_trace,
        }
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(trace, fh, indent=2, sort_keys=True)
            fh.write("\n")
        state["params"] = result.params
        state["model_cfg"] = model_cfg

    runner.run("train", do_train, [params_path, trace_path])

    def do_predict():
        params = state["params"]
        model_cfg = state["model_cfg"]
        kgs = []
        for record in read_dataset(dataset_path):
            e, _ = resolve_encoding(
                record.video_id, features, params, record.feature
            )
            kgs.append(predict_kg(record.video_id, e, params, model_cfg))
        write_kg_store(kgs, predicted_path)

    runner.run("predict", do_predict, [predicted_path])

    def do_infer():
        augmented = []
        for kg in read_kg_store(predicted_path):
            derived = closure(kg.facts, ont)
            augmented.append(
                KnowledgeGraph.build(
                    kg.video_id,
                    facts=kg.facts | derived,
                    individuals=kg.individuals,
                )
            )
        write_kg_store(augmented, inferred_path)

    runner.run("infer", do_infer, [inferred_path])

    def do_eval():
        truth = {r.video_id: r for r in read_dataset(dataset_path)}
        predicted = {kg.video_id: kg for kg in read_kg_store(predicted_path)}
        results = []
        for vid in sorted(truth):
            pred = predicted.get(vid)
            facts = pred.facts if pred is not None else frozenset()
            record = truth[vid]
            results.append(
                evaluate_example(facts, record.facts, record.negated_facts)
            )
        summary = evaluate_corpus(results, cfg.eval_mode)
        with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json(summary))

    runner.run("eval", do_eval, [report_path])

    manifest = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "package_version": vid2kg.__version__,
        "params_format_version": PARAMS_FORMAT_VERSION,
        "rng_seed": cfg.rng_seed,
        "eval_mode": cfg.eval_mode,
        "stages": runner.stages,
    }
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if progress is not None:
        progress(f"manifest: {manifest_path}")
    return manifest
