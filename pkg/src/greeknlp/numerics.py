"""Shared softmax / cross-entropy kernels for the classification heads.

Masked entries are encoded as -inf logits and receive zero probability and
zero gradient. Everything is float64.
"""

from __future__ import annotations

import numpy as np


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    with np.errstate(invalid="ignore"):
        logsum = np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    return shifted - logsum


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def xent_rows(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed categorical cross-entropy over rows, with gradient.

    ``logits`` is (n, K) with optional -inf masked entries; ``targets`` is
    (n,) integer class ids (never pointing at a masked entry). Returns
    (total loss, dloss/dlogits).
    """
    targets = np.asarray(targets)
    n = logits.shape[0]
    logp = log_softmax(logits, axis=-1)
    loss = -float(logp[np.arange(n), targets].sum())
    dlogits = softmax(logits, axis=-1)
    dlogits[np.arange(n), targets] -= 1.0
    return loss, dlogits
