"""Trainable parameters: classifier, per-predicate MLPs, individual vectors.

Ablated model variants alias one object across several keys (one shared MLP,
one shared vector).  Gradient accumulation and the optimizer key state by
array identity, and the JSON serialization stores each distinct object once
with keys referencing it by index, so aliasing survives a round-trip.
"""

from __future__ import annotations

import json
import math

import numpy as np

from vid2kg.atoms import Term, Vocabulary, sorted_terms
from vid2kg.embeddings import EmbeddingTable
from vid2kg.errors import DataError
from vid2kg.kgio import term_from_obj, term_to_obj
from vid2kg.model.config import ModelConfig

PARAMS_FORMAT_VERSION = 1


class Mlp:
    """One-hidden-layer perceptron: tanh hidden layer, sigmoid outputs.

    Weight matrices are (rows_out, cols_in); biases are flat.  Arrays are
    mutated in place by the optimizer.
    """

    __slots__ = ("w1", "b1", "w2", "b2")

    def __init__(self, w1, b1, w2, b2):
        self.w1 = np.ascontiguousarray(w1, dtype=np.float64)
        self.b1 = np.ascontiguousarray(b1, dtype=np.float64)
        self.w2 = np.ascontiguousarray(w2, dtype=np.float64)
        self.b2 = np.ascontiguousarray(b2, dtype=np.float64)
        if self.w1.ndim != 2 or self.w2.ndim != 2:
            raise DataError("MLP weight matrices must be 2-dimensional")
        hidden = self.w1.shape[0]
        if self.b1.shape != (hidden,):
            raise DataError("hidden bias length does not match the hidden layer")
        if self.w2.shape[1] != hidden:
            raise DataError("output weights do not match the hidden layer")
        if self.b2.shape != (self.w2.shape[0],):
            raise DataError("output bias length does not match the output layer")

    @property
    def n_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_out(self) -> int:
        return self.w2.shape[0]

    def arrays(self):
        return (self.w1, self.b1, self.w2, self.b2)


def _init_mlp(rng: np.random.Generator, n_in: int, hidden: int, n_out: int) -> Mlp:
    lim1 = 1.0 / math.sqrt(n_in)
    lim2 = 1.0 / math.sqrt(hidden)
    return Mlp(
        rng.uniform(-lim1, lim1, size=(hidden, n_in)),
        np.zeros(hidden),
        rng.uniform(-lim2, lim2, size=(n_out, hidden)),
        np.zeros(n_out),
    )


class ModelParams:
    """All trainable state plus the fixed individual ordering.

    individual_order fixes the meaning of classifier output positions.
    unary_mlps and binary_mlps map predicate Terms to Mlp objects;
    individual_vectors maps individual Terms to length-D arrays.
    """

    def __init__(
        self,
        classifier: Mlp,
        unary_mlps,
        binary_mlps,
        individual_vectors,
        individual_order,
        frame_pool_weights=None,
    ):
        self.classifier = classifier
        self.unary_mlps = dict(unary_mlps)
        self.binary_mlps = dict(binary_mlps)
        self.individual_vectors = dict(individual_vectors)
        self.individual_order = tuple(individual_order)
        self.frame_pool_weights = (
            None
            if frame_pool_weights is None
            else np.ascontiguousarray(frame_pool_weights, dtype=np.float64)
        )
        self._index = {t: j for j, t in enumerate(self.individual_order)}
        self._validate()

    def _validate(self):
        if len(self._index) != len(self.individual_order):
            raise DataError("individual_order contains duplicates")
        if set(self.individual_order) != set(self.individual_vectors):
            raise DataError("individual_order and individual_vectors disagree")
        if self.classifier.n_out != len(self.individual_order):
            raise DataError("classifier output size does not match the individuals")
        e, d = self.encoding_dim, self.individual_dim
        for t, vec in self.individual_vectors.items():
            arr = np.asarray(vec)
            if arr.shape != (d,):
                raise DataError(f"individual vector for {t} is not length {d}")
        for t, mlp in self.unary_mlps.items():
            if mlp.n_in != e + d or mlp.n_out != 1:
                raise DataError(f"unary MLP for {t} has the wrong shape")
        for t, mlp in self.binary_mlps.items():
            if mlp.n_in != e + 2 * d or mlp.n_out != 1:
                raise DataError(f"binary MLP for {t} has the wrong shape")

    @property
    def encoding_dim(self) -> int:
        return self.classifier.n_in

    @property
    def individual_dim(self) -> int:
        if not self.individual_vectors:
            return 0
        return len(next(iter(self.individual_vectors.values())))

    def index_of(self, term: Term) -> int:
        try:
            return self._index[term]
        except KeyError:
            raise DataError(f"individual {term} is not in the model vocabulary")

    def mlp_for(self, predicate: Term, arity: int) -> Mlp:
        table = self.unary_mlps if arity == 1 else self.binary_mlps
        try:
            return table[predicate]
        except KeyError:
            kind = "unary" if arity == 1 else "binary"
            raise DataError(f"no {kind} MLP for predicate {predicate}")

    def vector_for(self, term: Term) -> np.ndarray:
        try:
            return self.individual_vectors[term]
        except KeyError:
            raise DataError(f"no individual vector for {term}")

    def named_arrays(self):
        """Every distinct parameter array once, in a deterministic order.

        Aliased entries are emitted under the first name that reaches them.
        """
        seen = set()

        def fresh(name, arr):
            if id(arr) in seen:
                return []
            seen.add(id(arr))
            return [(name, arr)]

        parts = ("w1", "b1", "w2", "b2")
        for part, arr in zip(parts, self.classifier.arrays()):
            yield from fresh(f"classifier.{part}", arr)
        for label, table in (("unary", self.unary_mlps), ("binary", self.binary_mlps)):
            for t in sorted_terms(table):
                for part, arr in zip(parts, table[t].arrays()):
                    yield from fresh(f"{label}[{t}].{part}", arr)
        for t in self.individual_order:
            yield from fresh(f"vector[{t}]", self.individual_vectors[t])
        if self.frame_pool_weights is not None:
            yield from fresh("frame_pool_weights", self.frame_pool_weights)


def init_params(
    cfg: ModelConfig,
    vocab: Vocabulary,
    emb: EmbeddingTable | None = None,
    num_frames: int | None = None,
) -> ModelParams:
    """Seeded initialization.

    Individual vectors start from the embedding table when the surface lemma
    is present, otherwise from a uniform [-0.05, 0.05] draw; MLP weights use
    symmetric uniform draws scaled by fan-in.  Frame pooling weights, when
    requested, start as a uniform average.
    """
    if emb is not None and emb.dim != cfg.individual_dim:
        raise DataError(
            f"embedding dimension {emb.dim} does not match "
            f"individual_dim {cfg.individual_dim}"
        )
    if not vocab.individuals:
        raise DataError("cannot build a model over an empty individual vocabulary")
    rng = np.random.default_rng(cfg.rng_seed)
    e, d = cfg.encoding_dim, cfg.individual_dim
    order = tuple(sorted_terms(vocab.individuals))
    classifier = _init_mlp(rng, e, cfg.classifier_hidden, len(order))
    unary = {
        p: _init_mlp(rng, e + d, cfg.predicate_hidden, 1)
        for p in sorted_terms(vocab.unary_predicates)
    }
    binary = {
        p: _init_mlp(rng, e + 2 * d, cfg.predicate_hidden, 1)
        for p in sorted_terms(vocab.binary_predicates)
    }
    vectors = {}
    for t in order:
        known = emb.get(t.surface) if emb is not None else None
        if known is not None:
            vectors[t] = np.array(known, dtype=np.float64)
        else:
            vectors[t] = rng.uniform(-0.05, 0.05, size=d)
    pool = None
    if num_frames is not None:
        if num_frames < 1:
            raise DataError("num_frames must be positive")
        pool = np.full(num_frames, 1.0 / num_frames)
    return ModelParams(classifier, unary, binary, vectors, order, pool)


def _mlp_to_obj(mlp: Mlp) -> dict:
    return {
        "w1": mlp.w1.tolist(),
        "b1": mlp.b1.tolist(),
        "w2": mlp.w2.tolist(),
        "b2": mlp.b2.tolist(),
    }


def _mlp_from_obj(obj, where: str) -> Mlp:
    try:
        return Mlp(obj["w1"], obj["b1"], obj["w2"], obj["b2"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{where}: bad MLP entry: {exc}") from exc


def params_to_obj(params: ModelParams) -> dict:
    """JSON form; aliased MLPs/vectors are stored once and referenced by index."""
    mlps: list[Mlp] = []
    mlp_at: dict[int, int] = {}
    vectors: list[np.ndarray] = []
    vec_at: dict[int, int] = {}

    def mlp_index(m: Mlp) -> int:
        if id(m) not in mlp_at:
            mlp_at[id(m)] = len(mlps)
            mlps.append(m)
        return mlp_at[id(m)]

    def vec_index(v: np.ndarray) -> int:
        if id(v) not in vec_at:
            vec_at[id(v)] = len(vectors)
            vectors.append(v)
        return vec_at[id(v)]

    classifier = mlp_index(params.classifier)
    unary = [
        [term_to_obj(t), mlp_index(params.unary_mlps[t])]
        for t in sorted_terms(params.unary_mlps)
    ]
    binary = [
        [term_to_obj(t), mlp_index(params.binary_mlps[t])]
        for t in sorted_terms(params.binary_mlps)
    ]
    individuals = [
        [term_to_obj(t), vec_index(params.individual_vectors[t])]
        for t in params.individual_order
    ]
    return {
        "format_version": PARAMS_FORMAT_VERSION,
        "individual_order": [term_to_obj(t) for t in params.individual_order],
        "mlps": [_mlp_to_obj(m) for m in mlps],
        "vectors": [v.tolist() for v in vectors],
        "classifier": classifier,
        "unary_mlps": unary,
        "binary_mlps": binary,
        "individual_vectors": individuals,
        "frame_pool_weights": (
            None
            if params.frame_pool_weights is None
            else params.frame_pool_weights.tolist()
        ),
    }


def params_from_obj(obj, where: str) -> ModelParams:
    for key in (
        "format_version",
        "individual_order",
        "mlps",
        "vectors",
        "classifier",
        "unary_mlps",
        "binary_mlps",
        "individual_vectors",
    ):
        if key not in obj:
            raise DataError(f"{where}: missing key {key!r}")
    if obj["format_version"] != PARAMS_FORMAT_VERSION:
        raise DataError(
            f"{where}: unsupported format version {obj['format_version']!r}"
        )
    mlps = [_mlp_from_obj(m, where) for m in obj["mlps"]]
    vectors = [np.asarray(v, dtype=np.float64) for v in obj["vectors"]]

    def mlp_at(idx) -> Mlp:
        if not isinstance(idx, int) or not 0 <= idx < len(mlps):
            raise DataError(f"{where}: bad MLP reference {idx!r}")
        return mlps[idx]

    def vec_at(idx) -> np.ndarray:
        if not isinstance(idx, int) or not 0 <= idx < len(vectors):
            raise DataError(f"{where}: bad vector reference {idx!r}")
        return vectors[idx]

    def table(entries):
        return {term_from_obj(t, where): mlp_at(i) for t, i in entries}

    pool = obj.get("frame_pool_weights")
    try:
        return ModelParams(
            classifier=mlp_at(obj["classifier"]),
            unary_mlps=table(obj["unary_mlps"]),
            binary_mlps=table(obj["binary_mlps"]),
            individual_vectors={
                term_from_obj(t, where): vec_at(i)
                for t, i in obj["individual_vectors"]
            },
            individual_order=[
                term_from_obj(t, where) for t in obj["individual_order"]
            ],
            frame_pool_weights=pool,
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: bad parameter document: {exc}") from exc


def write_params(params: ModelParams, path) -> None:
    # floats serialize via repr, which round-trips float64 exactly
    text = json.dumps(params_to_obj(params), separators=(",", ":"), ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def read_params(path) -> ModelParams:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DataError(f"{path}: expected a JSON object")
    return params_from_obj(obj, str(path))


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    """Exact structural equality, including the aliasing pattern."""
    return params_to_obj(a) == params_to_obj(b)
