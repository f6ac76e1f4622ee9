"""Optimizers and the training loop: one video per update step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vid2kg.atoms import Vocabulary
from vid2kg.errors import DataError
from vid2kg.model.config import ModelConfig
from vid2kg.model.features import pool_frames
from vid2kg.model.network import GradBag, example_gradients
from vid2kg.model.params import ModelParams, init_params


class Sgd:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, bag: GradBag) -> None:
        for param, grad in bag.items():
            param -= self.learning_rate * grad


class Adam:
    """Adam with bias correction; per-parameter step counts.

    State is keyed by array identity, so a parameter shared across several
    predicates (an ablated model) carries a single moment estimate.
    """

    def __init__(self, learning_rate: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._state: dict[int, list] = {}

    def step(self, bag: GradBag) -> None:
        for param, grad in bag.items():
            state = self._state.get(id(param))
            if state is None:
                state = [param, np.zeros_like(param), np.zeros_like(param), 0]
                self._state[id(param)] = state
            _, m, v, _ = state
            state[3] += 1
            t = state[3]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            param -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(cfg: ModelConfig):
    if cfg.optimizer == "sgd":
        return Sgd(cfg.learning_rate)
    return Adam(cfg.learning_rate)


@dataclass
class TrainResult:
    params: ModelParams
    loss_trace: list[float] = field(default_factory=list)
    classifier_trace: list[float] = field(default_factory=list)
    facts_trace: list[float] = field(default_factory=list)


def resolve_encoding(video_id, features, params: ModelParams, fallback=None):
    """Resolve a video's encoding; frame stacks are pooled and also returned.

    Returns (encoding, frames) with frames None for flat entries.  fallback
    is a record-level feature tuple used when the store has no entry.
    """
    if video_id in features:
        frames = features.raw_frames(video_id)
        if frames is not None:
            if params.frame_pool_weights is None:
                raise DataError(
                    f"{video_id}: frame features need pooling weights; "
                    "initialize the model with num_frames"
                )
            return pool_frames(frames, params.frame_pool_weights), frames
        return features.get(video_id), None
    if fallback is not None:
        return np.asarray(fallback, dtype=np.float64), None
    raise DataError(f"no feature vector for video {video_id}")


def _encoding_for(record, features, params: ModelParams):
    return resolve_encoding(record.video_id, features, params, record.feature)


def train(
    dataset,
    features,
    cfg: ModelConfig,
    vocab: Vocabulary,
    emb=None,
    params: ModelParams | None = None,
) -> TrainResult:
    """Minimize the joint loss over the dataset, one video per step.

    Records are visited in the given order every epoch; with seeded
    initialization this makes runs bit-reproducible.  Traces hold the mean
    per-example losses of each epoch.
    """
    dataset = list(dataset)
    if params is None:
        num_frames = getattr(features, "frame_count", None)
        params = init_params(cfg, vocab, emb, num_frames=num_frames)
    for record in dataset:
        if record.video_id not in features and record.feature is None:
            raise DataError(f"no feature vector for video {record.video_id}")
    optimizer = make_optimizer(cfg)
    result = TrainResult(params)
    denom = max(len(dataset), 1)
    for _epoch in range(cfg.epochs):
        total = total_lc = total_lp = 0.0
        for record in dataset:
            e, frames = _encoding_for(record, features, params)
            fwd, bag, de = example_gradients(params, e, record)
            if frames is not None:
                bag.add(params.frame_pool_weights, frames @ de)
            optimizer.step(bag)
            total += fwd.loss
            total_lc += fwd.lc
            total_lp += fwd.lp
        result.loss_trace.append(total / denom)
        result.classifier_trace.append(total_lc / denom)
        result.facts_trace.append(total_lp / denom)
    return result
