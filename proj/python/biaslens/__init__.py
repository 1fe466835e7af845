"""Indicator-based media bias analysis: Python bindings over the C++ core."""

import json as _json

from . import _core
from ._core import (
    BiaslensError,
    VectorStore,
    cluster,
    compute_metrics,
    cosine_similarity,
    f1_score,
    parse_tagged_lines,
    predict_bias,
    relabel_binary,
)

__all__ = [
    "BiaslensError",
    "VectorStore",
    "analyze",
    "cluster",
    "compute_metrics",
    "cosine_similarity",
    "f1_score",
    "locate_phrases",
    "parse_tagged_lines",
    "predict_bias",
    "relabel_binary",
]


def locate_phrases(phrases, body):
    """Code-point spans of each phrase in body, plus the phrases not found."""
    return _json.loads(_core._locate_phrases(list(phrases), body))


def analyze(body, store, fixtures, *, mode="replay", model="", m=5, article_id="article"):
    """Full analysis of one article. Returns the report as a dict.

    mode is "replay" (responses come from the fixture file), "record" or
    "live"; the embedding model and dimension are taken from the store.
    """
    return _json.loads(_core._analyze(body, str(store), str(fixtures), mode, model, m, article_id))

