"""Ablated model variants for directional comparison experiments."""

from __future__ import annotations

from vid2kg.atoms import sorted_terms
from vid2kg.model.features import RandomFeatureStore
from vid2kg.model.params import ModelParams

ABLATION_MODES = ("single_mlp", "single_individual_vector", "random_encoder")


def ablate(params: ModelParams, mode: str, features=None, seed: int = 0):
    """Returns (params, features) implementing the named ablation.

    single_mlp shares one MLP across all predicates of each arity (unary and
    binary MLPs have different input sizes, so one per arity).
    single_individual_vector shares one trainable vector across all
    individuals.  random_encoder leaves the parameters alone and swaps the
    feature store for seeded random encodings.  Sharing is by object
    aliasing, so training the variant trains the shared parameter.
    """
    if mode == "single_mlp":
        unary = params.unary_mlps
        if unary:
            shared = unary[sorted_terms(unary)[0]]
            unary = {p: shared for p in unary}
        binary = params.binary_mlps
        if binary:
            shared = binary[sorted_terms(binary)[0]]
            binary = {p: shared for p in binary}
        variant = ModelParams(
            params.classifier,
            unary,
            binary,
            params.individual_vectors,
            params.individual_order,
            params.frame_pool_weights,
        )
        return variant, features
    if mode == "single_individual_vector":
        shared = params.individual_vectors[params.individual_order[0]]
        variant = ModelParams(
            params.classifier,
            params.unary_mlps,
            params.binary_mlps,
            {t: shared for t in params.individual_order},
            params.individual_order,
            params.frame_pool_weights,
        )
        return variant, features
    if mode == "random_encoder":
        return params, RandomFeatureStore(params.encoding_dim, seed)
    raise ValueError(f"unknown ablation mode {mode!r}; expected {ABLATION_MODES}")
