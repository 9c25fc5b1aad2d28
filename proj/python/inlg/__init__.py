# SPDX-License-Identifier: Apache-2.0
"""Grounded prefix language model with a contrastive alignment objective."""

import json as _json

from ._inlg import (
    ConfigError,
    ContractViolation,
    Model,
    NumericFault,
    contrastive_loss,
    distinct_n,
    diversity,
    make_synthetic,
    pretrain_map,
    rep_n,
    resolved_config,
    text_metrics,
    tokenize,
    train,
)
from ._inlg import metrics_report as _metrics_report


def metrics_report(texts, mode="word", denominator="tokens"):
    """Corpus metrics for ``texts``: a list of strings or of (id, text) pairs."""
    pairs = [(str(i), t) if isinstance(t, str) else tuple(t) for i, t in enumerate(texts)]
    return _json.loads(_metrics_report(pairs, mode, denominator))


__all__ = [
    "ConfigError",
    "ContractViolation",
    "Model",
    "NumericFault",
    "contrastive_loss",
    "distinct_n",
    "diversity",
    "make_synthetic",
    "metrics_report",
    "pretrain_map",
    "rep_n",
    "resolved_config",
    "text_metrics",
    "tokenize",
    "train",
]
