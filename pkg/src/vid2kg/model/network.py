"""Forward scoring, losses, and analytic gradients for one training example.

Gradient derivations fold the loss weight into the pre-sigmoid output
gradient dz and hand it to the shared MLP backward kernel:

  classifier (summed BCE):      dz_j = c_hat_j - c_j
  fact t with score s:          dz = (s - 1) / (2|T|)
  negated fact f with score s:  dz = s / (2|F|)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vid2kg._kernels import mlp2_backward, mlp2_forward
from vid2kg.atoms import Atom, Term, sorted_atoms
from vid2kg.errors import DataError
from vid2kg.model.params import ModelParams

CLAMP_EPS = 1e-12


def _clamped(p: np.ndarray) -> np.ndarray:
    return np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)


def _check_encoding(e, params: ModelParams) -> np.ndarray:
    e = np.ascontiguousarray(e, dtype=np.float64)
    if e.shape != (params.encoding_dim,):
        raise DataError(
            f"encoding has shape {e.shape}, expected ({params.encoding_dim},)"
        )
    return e


def classify_individuals(e, params: ModelParams) -> np.ndarray:
    """Per-individual presence probabilities, ordered as individual_order."""
    e = _check_encoding(e, params)
    _, y = mlp2_forward(e, *params.classifier.arrays())
    return y


def _fact_input(e: np.ndarray, predicate: Term, args, params: ModelParams):
    if len(args) not in (1, 2):
        raise DataError(f"facts take 1 or 2 arguments, got {len(args)}")
    vectors = [params.vector_for(a) for a in args]
    return np.concatenate([e, *vectors])


def score_fact(e, predicate: Term, args, params: ModelParams) -> float:
    """Probability that predicate(args) holds, from the predicate's MLP."""
    e = _check_encoding(e, params)
    x = _fact_input(e, predicate, args, params)
    mlp = params.mlp_for(predicate, len(args))
    _, y = mlp2_forward(x, *mlp.arrays())
    return float(y[0])


def score_atom(e, atom: Atom, params: ModelParams) -> float:
    return score_fact(e, atom.predicate, atom.args, params)


def loss_classifier(c_hat, c) -> float:
    """Summed binary cross-entropy over the individual vocabulary."""
    c_hat = _clamped(np.asarray(c_hat, dtype=np.float64))
    c = np.asarray(c, dtype=np.float64)
    if c_hat.shape != c.shape:
        raise DataError("prediction and target vectors differ in length")
    return float(-np.sum(c * np.log(c_hat) + (1.0 - c) * np.log(1.0 - c_hat)))


def loss_facts(scores_true, scores_negated) -> float:
    """Inverse-frequency-weighted fact BCE; an empty side contributes zero."""
    t = _clamped(np.asarray(list(scores_true), dtype=np.float64))
    f = _clamped(np.asarray(list(scores_negated), dtype=np.float64))
    loss = 0.0
    if t.size:
        loss -= float(np.sum(np.log(t))) / (2.0 * t.size)
    if f.size:
        loss -= float(np.sum(np.log(1.0 - f))) / (2.0 * f.size)
    return loss


def presence_vector(params: ModelParams, individuals) -> np.ndarray:
    """Binary target c over individual_order."""
    c = np.zeros(len(params.individual_order))
    for t in individuals:
        c[params.index_of(t)] = 1.0
    return c


@dataclass
class ExampleForward:
    """Cached forward pass of one example, enough to run backward."""

    e: np.ndarray
    c: np.ndarray
    c_hat: np.ndarray
    classifier_hidden: np.ndarray
    true_atoms: list[Atom] = field(default_factory=list)
    true_inputs: list[np.ndarray] = field(default_factory=list)
    true_hiddens: list[np.ndarray] = field(default_factory=list)
    true_scores: list[float] = field(default_factory=list)
    negated_atoms: list[Atom] = field(default_factory=list)
    negated_inputs: list[np.ndarray] = field(default_factory=list)
    negated_hiddens: list[np.ndarray] = field(default_factory=list)
    negated_scores: list[float] = field(default_factory=list)
    lc: float = 0.0
    lp: float = 0.0
    loss: float = 0.0


def example_losses(params: ModelParams, e, record) -> ExampleForward:
    """Forward pass of one record: classifier plus every (negated) fact.

    Only the ground-truth atom lists are scored, so the cost per record is
    proportional to |T| + |F| rather than |P| x |A|.
    """
    e = _check_encoding(e, params)
    h_c, c_hat = mlp2_forward(e, *params.classifier.arrays())
    fwd = ExampleForward(
        e=e,
        c=presence_vector(params, record.individuals),
        c_hat=c_hat,
        classifier_hidden=h_c,
    )
    for atom in sorted_atoms(record.facts):
        x = _fact_input(e, atom.predicate, atom.args, params)
        mlp = params.mlp_for(atom.predicate, atom.arity)
        h, y = mlp2_forward(x, *mlp.arrays())
        fwd.true_atoms.append(atom)
        fwd.true_inputs.append(x)
        fwd.true_hiddens.append(h)
        fwd.true_scores.append(float(y[0]))
    for atom in sorted_atoms(record.negated_facts):
        x = _fact_input(e, atom.predicate, atom.args, params)
        mlp = params.mlp_for(atom.predicate, atom.arity)
        h, y = mlp2_forward(x, *mlp.arrays())
        fwd.negated_atoms.append(atom)
        fwd.negated_inputs.append(x)
        fwd.negated_hiddens.append(h)
        fwd.negated_scores.append(float(y[0]))
    fwd.lc = loss_classifier(fwd.c_hat, fwd.c)
    fwd.lp = loss_facts(fwd.true_scores, fwd.negated_scores)
    fwd.loss = fwd.lc + fwd.lp
    return fwd


class GradBag:
    """Gradients accumulated by parameter array identity.

    Aliased parameters (shared MLPs or vectors in ablated models) land in a
    single slot, which is exactly the shared-parameter gradient.
    """

    def __init__(self):
        self._slots: dict[int, list] = {}

    def add(self, param: np.ndarray, grad) -> None:
        slot = self._slots.get(id(param))
        if slot is None:
            self._slots[id(param)] = [param, np.array(grad, dtype=np.float64)]
        else:
            slot[1] += grad

    def get(self, param: np.ndarray):
        slot = self._slots.get(id(param))
        return None if slot is None else slot[1]

    def items(self):
        for param, grad in self._slots.values():
            yield param, grad

    def __len__(self):
        return len(self._slots)


def _backward_into(bag: GradBag, mlp, x, h, dz2, de, d: int, args, params):
    """One MLP backward; splits dx into encoding and argument-vector parts."""
    dw1, db1, dw2, db2, dx = mlp2_backward(x, h, mlp.w1, mlp.w2, dz2)
    bag.add(mlp.w1, dw1)
    bag.add(mlp.b1, db1)
    bag.add(mlp.w2, dw2)
    bag.add(mlp.b2, db2)
    e_dim = len(de)
    de += dx[:e_dim]
    for k, a in enumerate(args):
        lo = e_dim + k * d
        bag.add(params.vector_for(a), dx[lo : lo + d])


def example_gradients(params: ModelParams, e, record):
    """Analytic gradients of the joint loss for one example.

    Returns (forward, bag, de) where de is the gradient with respect to the
    encoding itself, needed when the encoding is a pooled frame stack.
    """
    fwd = example_losses(params, e, record)
    bag = GradBag()
    de = np.zeros(params.encoding_dim)
    cls = params.classifier
    dz2 = fwd.c_hat - fwd.c
    dw1, db1, dw2, db2, dx = mlp2_backward(
        fwd.e, fwd.classifier_hidden, cls.w1, cls.w2, dz2
    )
    bag.add(cls.w1, dw1)
    bag.add(cls.b1, db1)
    bag.add(cls.w2, dw2)
    bag.add(cls.b2, db2)
    de += dx

    d = params.individual_dim
    n_true = len(fwd.true_atoms)
    for atom, x, h, score in zip(
        fwd.true_atoms, fwd.true_inputs, fwd.true_hiddens, fwd.true_scores
    ):
        dz = np.array([(score - 1.0) / (2.0 * n_true)])
        mlp = params.mlp_for(atom.predicate, atom.arity)
        _backward_into(bag, mlp, x, h, dz, de, d, atom.args, params)
    n_neg = len(fwd.negated_atoms)
    for atom, x, h, score in zip(
        fwd.negated_atoms, fwd.negated_inputs, fwd.negated_hiddens, fwd.negated_scores
    ):
        dz = np.array([score / (2.0 * n_neg)])
        mlp = params.mlp_for(atom.predicate, atom.arity)
        _backward_into(bag, mlp, x, h, dz, de, d, atom.args, params)
    return fwd, bag, de
