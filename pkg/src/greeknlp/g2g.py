"""Greeklish-to-Greek transliteration.

Greeklish has no consensus spelling: a Greek character may surface as
different Latin-keyboard characters through visual similarity, phonetics,
shared keys, or digit lookalikes. The mapping table enumerates those
alternatives; a lattice over the input realizes every combination; a
character language model picks the most Greek-looking path via beam
search. The same table drives synthetic Greeklish generation for building
training/evaluation data.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from importlib.resources import files
from typing import Optional

from .charlm import CharNgramLM
from .doc import normalize

CHANNELS = ("visual", "phonetic", "keyboard", "digit")
COVERAGE_LETTERS = tuple("αβγδεζηθικλμνξοπρστυφχψω")  # required table coverage
GREEK_LETTERS = COVERAGE_LETTERS + ("ς",)


class MappingTableError(ValueError):
    """Bad mapping-table content."""


@dataclass(frozen=True)
class MappingEntry:
    latin: str
    greek: str
    channel: str
    weight: float  # log-domain score <= 0

    def __post_init__(self) -> None:
        if not self.latin or len(self.latin) > 3:
            raise MappingTableError(f"latin side must be 1-3 chars, got {self.latin!r}")
        if not self.greek or len(self.greek) > 2:
            raise MappingTableError(f"greek side must be 1-2 chars, got {self.greek!r}")
        if self.channel not in CHANNELS:
            raise MappingTableError(f"unknown channel {self.channel!r}")
        if not math.isfinite(self.weight) or self.weight > 0:
            raise MappingTableError(f"weight must be finite and <= 0, got {self.weight}")


@dataclass(frozen=True)
class MappingTable:
    entries: tuple[MappingEntry, ...]

    def __post_init__(self) -> None:
        covered = {e.greek for e in self.entries}
        missing = [g for g in COVERAGE_LETTERS if g not in covered]
        if missing:
            raise MappingTableError(f"no mapping for Greek letters: {missing}")

    @property
    def by_latin_prefix(self) -> dict[str, tuple[MappingEntry, ...]]:
        cached = self.__dict__.get("_by_latin")
        if cached is None:
            grouped: dict[str, list[MappingEntry]] = {}
            for e in self.entries:
                grouped.setdefault(e.latin, []).append(e)
            cached = {k: tuple(v) for k, v in grouped.items()}
            self.__dict__["_by_latin"] = cached
        return cached

    @property
    def inverse(self) -> dict[str, tuple[str, ...]]:
        """Greek unit -> latin variants, deduplicated, in table order."""
        cached = self.__dict__.get("_inverse")
        if cached is None:
            grouped: dict[str, list[str]] = {}
            for e in self.entries:
                variants = grouped.setdefault(e.greek, [])
                if e.latin not in variants:
                    variants.append(e.latin)
            cached = {k: tuple(v) for k, v in grouped.items()}
            self.__dict__["_inverse"] = cached
        return cached

    @property
    def max_latin_len(self) -> int:
        return max(len(e.latin) for e in self.entries)

    @property
    def max_greek_unit_len(self) -> int:
        return max(len(e.greek) for e in self.entries)

    @property
    def max_expansion_ratio(self) -> float:
        return max(len(e.greek) / len(e.latin) for e in self.entries)

    @classmethod
    def parse(cls, text: str) -> "MappingTable":
        """TSV: latin<TAB>greek<TAB>channel<TAB>weight; # starts a comment."""
        entries = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise MappingTableError(f"line {line_no}: expected 4 columns, got {len(cols)}")
            latin, greek, channel, weight = cols
            try:
                entries.append(MappingEntry(latin, greek, channel, float(weight)))
            except (ValueError, MappingTableError) as exc:
                raise MappingTableError(f"line {line_no}: {exc}") from None
        return cls(tuple(entries))

    @classmethod
    def load(cls, path) -> "MappingTable":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def default(cls) -> "MappingTable":
        return cls.parse(files("greeknlp.data").joinpath("g2g_table.tsv").read_text("utf-8"))

    def dump(self) -> str:
        lines = ["# latin\tgreek\tchannel\tweight"]
        lines.extend(f"{e.latin}\t{e.greek}\t{e.channel}\t{e.weight}" for e in self.entries)
        return "\n".join(lines) + "\n"


# --- synthetic Greeklish ------------------------------------------------------

def synth_greeklish(greek: str, table: MappingTable, seed: int) -> str:
    """Render normalized Greek as Greeklish with seeded uniform choices.

    The input is segmented into the longest Greek units the table knows
    (digraphs before single letters); each unit is replaced independently by
    a uniformly random latin variant. Non-Greek characters pass through.
    Deterministic for a given (input, seed).
    """
    rng = random.Random(seed)
    inverse = table.inverse
    max_unit = table.max_greek_unit_len
    out: list[str] = []
    pos = 0
    while pos < len(greek):
        unit = None
        for length in range(min(max_unit, len(greek) - pos), 0, -1):
            cand = greek[pos:pos + length]
            if cand in inverse:
                unit = cand
                break
        if unit is None:
            ch = greek[pos]
            if ch in GREEK_LETTERS:
                raise MappingTableError(f"no latin variants for Greek character {ch!r}")
            out.append(ch)
            pos += 1
            continue
        out.append(rng.choice(inverse[unit]))
        pos += len(unit)
    return "".join(out)


# --- lattice -------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeEdge:
    start: int
    end: int
    greek: str
    weight: float


@dataclass(frozen=True)
class TransliterationLattice:
    """DAG over input positions 0..m whose paths spell candidate outputs."""

    length: int
    edges: tuple[LatticeEdge, ...]

    @property
    def outgoing(self) -> dict[int, tuple[LatticeEdge, ...]]:
        cached = self.__dict__.get("_outgoing")
        if cached is None:
            grouped: dict[int, list[LatticeEdge]] = {}
            for e in self.edges:
                grouped.setdefault(e.start, []).append(e)
            cached = {k: tuple(sorted(v, key=lambda e: (e.end, e.greek)))
                      for k, v in grouped.items()}
            self.__dict__["_outgoing"] = cached
        return cached

    def paths(self, limit: Optional[int] = None) -> list[tuple[str, float]]:
        """All (text, edge-weight sum) paths 0 -> m; DFS, optionally capped."""
        results: list[tuple[str, float]] = []
        stack: list[tuple[int, str, float]] = [(0, "", 0.0)]
        while stack:
            node, text, weight = stack.pop()
            if node == self.length:
                results.append((text, weight))
                if limit is not None and len(results) > limit:
                    raise ValueError(f"more than {limit} paths")
                continue
            for e in reversed(self.outgoing.get(node, ())):
                stack.append((e.end, text + e.greek, weight + e.weight))
        return results

    def count_paths(self) -> int:
        counts = [0] * (self.length + 1)
        counts[self.length] = 1
        for node in range(self.length - 1, -1, -1):
            counts[node] = sum(counts[e.end] for e in self.outgoing.get(node, ()))
        return counts[0]


def build_lattice(greeklish: str, table: MappingTable,
                  pass_through_weight: float = 0.0) -> TransliterationLattice:
    """One edge per table entry matching at each position, plus identity
    pass-through edges, so every input always has at least one rendering
    and mapped characters keep their literal alternative."""
    edges: list[LatticeEdge] = []
    by_latin = table.by_latin_prefix
    max_len = table.max_latin_len
    for pos in range(len(greeklish)):
        for length in range(1, min(max_len, len(greeklish) - pos) + 1):
            chunk = greeklish[pos:pos + length]
            for entry in by_latin.get(chunk, ()):
                edges.append(LatticeEdge(pos, pos + length, entry.greek, entry.weight))
        edges.append(LatticeEdge(pos, pos + 1, greeklish[pos], pass_through_weight))
    # Dedup identical (start, end, greek), keeping the best weight.
    best: dict[tuple[int, int, str], float] = {}
    for e in edges:
        key = (e.start, e.end, e.greek)
        if key not in best or e.weight > best[key]:
            best[key] = e.weight
    unique = tuple(LatticeEdge(s, t, g, w) for (s, t, g), w in sorted(best.items()))
    return TransliterationLattice(len(greeklish), unique)


# --- decoding -------------------------------------------------------------------

def _lm_extend(lm: CharNgramLM, context: str, text: str) -> tuple[float, str]:
    logp = 0.0
    ctx = context
    for ch in text:
        logp += math.log(lm._prob(ch, ctx))
        ctx = (ctx + ch)[-(lm.order - 1):] if lm.order > 1 else ""
    return logp, ctx


def g2g_decode(greeklish: str, table: MappingTable, lm: CharNgramLM,
               beam_width: Optional[int] = 8, lm_weight: float = 1.0) -> str:
    """Best Greek rendering of a Greeklish string.

    Normalizes the input (lowercase, accents stripped), builds the lattice,
    and beam-searches left to right keeping ``beam_width`` best
    (score, LM-context) states per node; path score is the edge-weight sum
    plus ``lm_weight`` times the LM log-probability (including the end
    symbol). Ties break toward the lexicographically smaller output.
    Unmapped characters pass through unchanged.
    """
    text = normalize(greeklish)
    lattice = build_lattice(text, table)
    if lattice.length == 0:
        return ""
    init_ctx = "\x02" * (lm.order - 1)
    # states per node: {lm_context: (score, output)}
    states: list[dict[str, tuple[float, str]]] = [dict() for _ in range(lattice.length + 1)]
    states[0][init_ctx] = (0.0, "")

    def better(a: tuple[float, str], b: tuple[float, str]) -> bool:
        return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])

    for node in range(lattice.length):
        if not states[node]:
            continue
        ranked = sorted(states[node].items(),
                        key=lambda kv: (-kv[1][0], kv[1][1]))
        if beam_width is not None:
            ranked = ranked[:beam_width]
        for ctx, (score, output) in ranked:
            for edge in lattice.outgoing.get(node, ()):
                logp, new_ctx = _lm_extend(lm, ctx, edge.greek)
                cand = (score + edge.weight + lm_weight * logp, output + edge.greek)
                cur = states[edge.end].get(new_ctx)
                if cur is None or better(cand, cur):
                    states[edge.end][new_ctx] = cand
    final: list[tuple[float, str]] = []
    for ctx, (score, output) in states[lattice.length].items():
        eos_logp = math.log(lm._prob("\x03", ctx))
        final.append((score + lm_weight * eos_logp, output))
    best_score = max(s for s, _ in final)
    return min(out for s, out in final if s == best_score)


def brute_force_decode(greeklish: str, table: MappingTable, lm: CharNgramLM,
                       lm_weight: float = 1.0, max_paths: int = 100000) -> str:
    """Exhaustive path-enumeration argmax; the oracle twin of g2g_decode."""
    text = normalize(greeklish)
    lattice = build_lattice(text, table)
    if lattice.length == 0:
        return ""
    scored = [(w + lm_weight * lm.score(out), out)
              for out, w in lattice.paths(limit=max_paths)]
    best = max(s for s, _ in scored)
    return min(out for s, out in scored if s == best)
