"""Biaffine dependency parser.

Four learned projections split each contextual embedding into arc-head,
arc-dep, rel-head and rel-dep views. Arcs are scored with a biaffine form
plus a head-only bias; labels with a per-label biaffine form plus a linear
term over concatenated views and a per-label bias. Decoding is greedy
argmax by default, with a Chu-Liu/Edmonds maximum-spanning-arborescence
decoder available when a guaranteed tree is wanted.

Score convention: ``ArcScores.scores[i-1][j]`` is the score of head
candidate j (0 = ROOT) for dependent word i; self-arcs are masked to -inf.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .doc import Doc, Token
from .encoder import EncoderModel, dropout_mask, encode_forward, encode_backward
from .numerics import xent_rows

REL_CONCAT_MODES = ("as_printed", "head_dep")


@dataclass(frozen=True)
class ParserConfig:
    proj_dim: int = 64
    # The printed label-score equation concatenates the DEPENDENT's rel-head
    # and rel-dep vectors; "head_dep" switches the first half to the head's.
    rel_concat: str = "as_printed"

    def __post_init__(self) -> None:
        if self.proj_dim <= 0:
            raise ValueError("proj_dim must be positive")
        if self.rel_concat not in REL_CONCAT_MODES:
            raise ValueError(f"rel_concat must be one of {REL_CONCAT_MODES}")


@dataclass
class ParserModel:
    encoder: EncoderModel
    config: ParserConfig
    labels: tuple[str, ...]
    params: dict[str, np.ndarray]

    @property
    def label_ids(self) -> dict[str, int]:
        cached = self.__dict__.get("_label_ids")
        if cached is None:
            cached = {lab: i for i, lab in enumerate(self.labels)}
            self.__dict__["_label_ids"] = cached
        return cached


def init_parser(encoder: EncoderModel, labels: Sequence[str],
                config: ParserConfig = ParserConfig(), seed: int = 3) -> ParserModel:
    if not labels:
        raise ValueError("parser needs at least one dependency label")
    rng = np.random.default_rng(seed)
    d, p, k = encoder.config.dim, config.proj_dim, len(labels)
    params = {f"enc.{name}": v for name, v in encoder.params.items()}
    for name in ("arc_head.w", "arc_dep.w", "rel_head.w", "rel_dep.w"):
        params[name] = rng.uniform(-0.1, 0.1, size=(d, p))
    params["arc.W"] = rng.uniform(-0.1, 0.1, size=(p, p))
    params["arc.b"] = rng.uniform(-0.1, 0.1, size=p)
    params["rel.U"] = rng.uniform(-0.1, 0.1, size=(k, p, p))
    params["rel.w"] = rng.uniform(-0.1, 0.1, size=(k, 2 * p))
    params["rel.b"] = rng.uniform(-0.1, 0.1, size=k)
    return ParserModel(encoder, config, tuple(labels), params)


@dataclass(frozen=True)
class ArcScores:
    """scores[i-1][j]: head-candidate j score for dependent i; self = -inf."""

    scores: np.ndarray

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def __post_init__(self) -> None:
        n = self.scores.shape[0]
        if self.scores.shape != (n, n + 1):
            raise ValueError(f"arc score matrix must be n x (n+1), got {self.scores.shape}")


def _arc_score_matrix(params: dict[str, np.ndarray], Hh: np.ndarray,
                      Hd: np.ndarray) -> np.ndarray:
    """Unmasked (n x n+1) matrix from head/dep views (rows 0..n each)."""
    M = (Hh @ params["arc.W"]) @ Hd.T          # M[j, i] = h_j W h_i
    c = Hh @ params["arc.b"]                   # bias depends only on head j
    full = M + c[:, None]                      # full[j, i]
    return full.T[1:, :].copy()                # rows = dependents 1..n


def _mask_self(S: np.ndarray) -> np.ndarray:
    n = S.shape[0]
    S[np.arange(n), np.arange(1, n + 1)] = -np.inf
    return S


def score_arcs(words: Sequence[str], model: ParserModel) -> ArcScores:
    """Biaffine arc scores for every (dependent, head-candidate) pair."""
    E, _ = encode_forward(model.encoder, words)
    Hh = E @ model.params["arc_head.w"]
    Hd = E @ model.params["arc_dep.w"]
    return ArcScores(_mask_self(_arc_score_matrix(model.params, Hh, Hd)))


def decode_greedy(arc_scores: ArcScores) -> list[int]:
    """Most probable head per word independently; may contain cycles."""
    return [int(j) for j in np.argmax(arc_scores.scores, axis=1)]


# --- Chu-Liu/Edmonds ---------------------------------------------------------

def _find_cycle(head: np.ndarray) -> Optional[list[int]]:
    """A cycle in the functional graph v -> head[v], ignoring the root."""
    m = len(head)
    color = [0] * m  # 0 unvisited, 1 on stack, 2 done
    for start in range(1, m):
        if color[start]:
            continue
        path = []
        v = start
        while v != 0 and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = int(head[v])
        if v != 0 and color[v] == 1:
            cycle = path[path.index(v):]
            return cycle
        for u in path:
            color[u] = 2
    return None


def _max_arborescence(score: np.ndarray) -> np.ndarray:
    """Maximum-weight spanning arborescence of a dense digraph.

    ``score[h, d]`` is the weight of arc h -> d; node 0 is the root and has
    no incoming arcs (column 0 and the diagonal are -inf). Returns the head
    array with head[0] = -1.
    """
    m = score.shape[0]
    head = np.full(m, -1, dtype=int)
    for d in range(1, m):
        head[d] = int(np.argmax(score[:, d]))
    cycle = _find_cycle(head)
    if cycle is None:
        return head
    cset = set(cycle)
    noncycle = [v for v in range(m) if v not in cset]
    idx = {v: i for i, v in enumerate(noncycle)}
    k = len(noncycle)  # contracted node gets index k

    new = np.full((k + 1, k + 1), -np.inf)
    for a in noncycle:
        for b in noncycle:
            if a != b and b != 0:
                new[idx[a], idx[b]] = score[a, b]
    cycle_weight = sum(score[head[u], u] for u in cycle)
    enter_at: dict[int, int] = {}
    exit_from: dict[int, int] = {}
    for v in noncycle:
        # entering the cycle at u replaces the cycle arc into u
        gains = [(score[v, u] - score[head[u], u], u) for u in cycle]
        best_gain, best_u = max(gains, key=lambda g: g[0])
        new[idx[v], k] = best_gain + cycle_weight
        enter_at[v] = best_u
        if v != 0:
            best_w, best_u = max((score[u, v], u) for u in cycle)
            new[k, idx[v]] = best_w
            exit_from[v] = best_u

    sub = _max_arborescence(new)

    out = np.full(m, -1, dtype=int)
    for u in cycle:
        out[u] = head[u]
    for b in noncycle:
        if b == 0:
            continue
        h = sub[idx[b]]
        out[b] = exit_from[b] if h == k else noncycle[h]
    v_star = noncycle[sub[k]]
    out[enter_at[v_star]] = v_star
    return out


def decode_mst(arc_scores: ArcScores) -> list[int]:
    """Maximum-weight spanning arborescence rooted at ROOT; always a tree."""
    n = arc_scores.n
    if n == 1:
        return [0]
    # Assemble score[h, d] over nodes 0..n from the dependent-major matrix.
    score = np.full((n + 1, n + 1), -np.inf)
    for i in range(1, n + 1):
        score[:, i] = arc_scores.scores[i - 1, :]
    np.fill_diagonal(score, -np.inf)
    head = _max_arborescence(score)
    return [int(head[i]) for i in range(1, n + 1)]


def is_arborescence(heads: Sequence[int]) -> bool:
    """Every word has one head, no cycles, all words reachable from ROOT."""
    n = len(heads)
    if any(h < 0 or h > n for h in heads):
        return False
    reached = set()
    for start in range(1, n + 1):
        seen = []
        v = start
        while v != 0 and v not in reached:
            if v in seen:
                return False
            seen.append(v)
            v = heads[v - 1]
        reached.update(seen)
    return True


# --- label scoring -----------------------------------------------------------

def _rel_views(model: ParserModel, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return E @ model.params["rel_head.w"], E @ model.params["rel_dep.w"]


def _rel_score_matrix(model: ParserModel, Rh: np.ndarray, Rd: np.ndarray,
                      heads: Sequence[int]) -> tuple[np.ndarray, dict]:
    """(n x labels) score matrix for dependents 1..n at their given heads."""
    heads = np.asarray(heads)
    U, w, b = model.params["rel.U"], model.params["rel.w"], model.params["rel.b"]
    Uh = Rh[heads]            # (n, p) rel-head view of each chosen head
    Vd = Rd[1:]               # (n, p) rel-dep view of each dependent
    if model.config.rel_concat == "as_printed":
        first = Rh[1:]        # dependent's rel-head view, as the equation prints
    else:
        first = Uh
    y = np.concatenate([first, Vd], axis=1)   # (n, 2p)
    bilinear = np.einsum("np,kpq,nq->nk", Uh, U, Vd)
    scores = bilinear + y @ w.T + b[None, :]
    cache = {"heads": heads, "Uh": Uh, "Vd": Vd, "y": y}
    return scores, cache


def score_rels(words: Sequence[str], heads: Sequence[int],
               model: ParserModel) -> np.ndarray:
    """Label scores for each word's assigned head; shape (n, |labels|)."""
    E, _ = encode_forward(model.encoder, words)
    Rh, Rd = _rel_views(model, E)
    scores, _ = _rel_score_matrix(model, Rh, Rd, heads)
    return scores


def decode_rels(rel_scores: np.ndarray, model: ParserModel) -> list[str]:
    """Argmax label per word, ties to the lowest label id."""
    return [model.labels[int(k)] for k in np.argmax(rel_scores, axis=1)]


# --- loss ---------------------------------------------------------------------

def _gold_arrays(model: ParserModel, tokens: Sequence[Token]) -> tuple[np.ndarray, np.ndarray]:
    n = len(tokens)
    heads = np.empty(n, dtype=int)
    labels = np.empty(n, dtype=int)
    for pos, tok in enumerate(tokens):
        if tok.head is None or tok.deprel is None:
            raise ValueError(f"token {tok.index} lacks gold head/deprel")
        if not 0 <= tok.head <= n:
            raise ValueError(f"token {tok.index}: gold head {tok.head} out of range 0..{n}")
        if tok.deprel not in model.label_ids:
            raise ValueError(f"dependency label {tok.deprel!r} not in vocabulary")
        heads[pos] = tok.head
        labels[pos] = model.label_ids[tok.deprel]
    return heads, labels


def parse_loss(tokens: Sequence[Token], model: ParserModel) -> float:
    """Arc cross-entropy plus label cross-entropy at the gold heads."""
    loss, _ = _parse_forward_backward(model, tokens, grads=None)
    return loss


def _parse_forward_backward(model: ParserModel, tokens: Sequence[Token],
                            grads: Optional[dict[str, np.ndarray]],
                            dropout: float = 0.0,
                            rng: Optional[np.random.Generator] = None) -> tuple[float, int]:
    words = [t.form for t in tokens]
    gold_heads, gold_labels = _gold_arrays(model, tokens)
    E, enc_cache = encode_forward(model.encoder, words)
    if dropout > 0.0:
        mask = dropout_mask(E.shape, dropout, rng)
        Ed = E * mask
    else:
        mask = None
        Ed = E
    P = model.params
    Hh, Hd = Ed @ P["arc_head.w"], Ed @ P["arc_dep.w"]
    Rh, Rd = _rel_views(model, Ed)

    S = _mask_self(_arc_score_matrix(P, Hh, Hd))
    arc_loss, dS = xent_rows(S, gold_heads)
    rel_scores, rel_cache = _rel_score_matrix(model, Rh, Rd, gold_heads)
    rel_loss, dRelScores = xent_rows(rel_scores, gold_labels)
    total = arc_loss + rel_loss
    if grads is None:
        return total, len(tokens)

    n, p = len(tokens), model.config.proj_dim
    # Arc backward. S[i-1, j] = M[j, i] + c[j]; masked self-entries have
    # zero gradient already (softmax of -inf).
    dFull = np.zeros((n + 1, n + 1))
    dFull[:, 1:] = dS.T
    dc = dFull.sum(axis=1)
    A = Hh @ P["arc.W"]
    dA = dFull @ Hd
    dHd = dFull.T @ A
    grads["arc.W"] += Hh.T @ dA
    dHh = dA @ P["arc.W"].T
    grads["arc.b"] += Hh.T @ dc
    dHh += np.outer(dc, P["arc.b"])

    # Rel backward.
    U, w = P["rel.U"], P["rel.w"]
    Uh, Vd, y = rel_cache["Uh"], rel_cache["Vd"], rel_cache["y"]
    grads["rel.U"] += np.einsum("nk,np,nq->kpq", dRelScores, Uh, Vd)
    dUh = np.einsum("nk,kpq,nq->np", dRelScores, U, Vd)
    dVd = np.einsum("nk,kpq,np->nq", dRelScores, U, Uh)
    grads["rel.w"] += dRelScores.T @ y
    dy = dRelScores @ w
    grads["rel.b"] += dRelScores.sum(axis=0)

    dRh = np.zeros_like(Rh)
    dRd = np.zeros_like(Rd)
    np.add.at(dRh, gold_heads, dUh)
    dRd[1:] += dVd
    if model.config.rel_concat == "as_printed":
        dRh[1:] += dy[:, :p]
    else:
        np.add.at(dRh, gold_heads, dy[:, :p])
    dRd[1:] += dy[:, p:]

    dEd = (dHh @ P["arc_head.w"].T + dHd @ P["arc_dep.w"].T
           + dRh @ P["rel_head.w"].T + dRd @ P["rel_dep.w"].T)
    grads["arc_head.w"] += Ed.T @ dHh
    grads["arc_dep.w"] += Ed.T @ dHd
    grads["rel_head.w"] += Ed.T @ dRh
    grads["rel_dep.w"] += Ed.T @ dRd

    dE = dEd * mask if mask is not None else dEd
    enc_grads = {k[len("enc."):]: v for k, v in grads.items() if k.startswith("enc.")}
    encode_backward(model.encoder, dE, enc_cache, enc_grads)
    return total, len(tokens)


def parse_loss_and_grads(model: ParserModel, tokens: Sequence[Token],
                         grads: dict[str, np.ndarray], dropout: float = 0.0,
                         rng: Optional[np.random.Generator] = None) -> tuple[float, int]:
    return _parse_forward_backward(model, tokens, grads, dropout, rng)


# --- evaluation ----------------------------------------------------------------

def uas_las(pred: Doc, gold: Doc) -> tuple[float, float]:
    """Unlabeled / labeled attachment scores over all words of the docs."""
    if len(pred.sentences) != len(gold.sentences):
        raise ValueError("docs have different sentence counts")
    total = correct_heads = correct_both = 0
    for ps, gs in zip(pred.sentences, gold.sentences):
        if len(ps) != len(gs):
            raise ValueError("sentence length mismatch between pred and gold")
        for pt, gt in zip(ps, gs):
            total += 1
            if pt.head == gt.head:
                correct_heads += 1
                if pt.deprel == gt.deprel:
                    correct_both += 1
    if total == 0:
        raise ValueError("empty docs")
    return correct_heads / total, correct_both / total


def annotate_sentence(model: ParserModel, tokens: Sequence[Token],
                      decoder: str = "greedy") -> list[Token]:
    """Return tokens with head/deprel filled; decoder is greedy or mst."""
    if decoder not in ("greedy", "mst"):
        raise ValueError(f"unknown decoder {decoder!r}")
    words = [t.form for t in tokens]
    arc = score_arcs(words, model)
    heads = decode_greedy(arc) if decoder == "greedy" else decode_mst(arc)
    rels = decode_rels(score_rels(words, heads, model), model)
    return [tok.with_(head=h, deprel=r) for tok, h, r in zip(tokens, heads, rels)]
