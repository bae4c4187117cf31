"""Character n-gram language model with Witten-Bell smoothing.

Used to rank candidate Greek renderings during transliteration decoding.
Probabilities are over the training alphabet plus an end-of-text symbol;
contexts are padded with a begin-of-text symbol. Witten-Bell backoff with
a uniform base distribution guarantees every alphabet character positive
probability and exact normalization per context.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

BOS = "\x02"
EOS = "\x03"


@dataclass
class CharNgramLM:
    order: int
    # counts[k][context] is a Counter of next-character counts at order k+1,
    # where context is the preceding k characters (k = 0..order-1).
    counts: list[dict[str, Counter]] = field(default_factory=list)
    alphabet: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.counts:
            self.counts = [defaultdict(Counter) for _ in range(self.order)]

    # -- training ------------------------------------------------------------

    @classmethod
    def train(cls, corpus: Iterable[str], order: int = 5) -> "CharNgramLM":
        """Count n-grams of orders 1..order over the corpus lines."""
        lm = cls(order)
        alphabet: set[str] = set()
        n_lines = 0
        for line in corpus:
            line = line.rstrip("\n")
            if not line:
                continue
            n_lines += 1
            alphabet.update(line)
            seq = BOS * (order - 1) + line + EOS
            for pos in range(order - 1, len(seq)):
                ch = seq[pos]
                for k in range(order):
                    lm.counts[k][seq[pos - k:pos]][ch] += 1
        if n_lines == 0:
            raise ValueError("empty corpus")
        lm.alphabet = tuple(sorted(alphabet | {EOS}))
        return lm

    # -- probabilities ---------------------------------------------------------

    def prob(self, char: str, context: str) -> float:
        """Witten-Bell P(char | context), context truncated to order-1 chars."""
        context = (BOS * (self.order - 1) + context)[-(self.order - 1):] if self.order > 1 else ""
        return self._prob(char, context)

    def _prob(self, char: str, context: str) -> float:
        if not context:
            counter = self.counts[0][""]
            total = sum(counter.values())
            distinct = len(counter)
            uniform = 1.0 / len(self.alphabet)
            return (counter[char] + distinct * uniform) / (total + distinct)
        counter = self.counts[len(context)].get(context)
        lower = self._prob(char, context[1:])
        if not counter:
            return lower
        total = sum(counter.values())
        distinct = len(counter)
        return (counter[char] + distinct * lower) / (total + distinct)

    def logp(self, char: str, context: str) -> float:
        return math.log(self.prob(char, context))

    def score(self, text: str) -> float:
        """Log-probability of the full text, including the end symbol."""
        total = 0.0
        ctx = BOS * (self.order - 1)
        for ch in text + EOS:
            total += math.log(self._prob(ch, ctx))
            ctx = (ctx + ch)[-(self.order - 1):] if self.order > 1 else ""
        return total

    # -- serialization -----------------------------------------------------------

    def to_manifest(self) -> dict:
        return {
            "order": self.order,
            "alphabet": "".join(self.alphabet),
            "counts": [
                {ctx: dict(counter) for ctx, counter in level.items()}
                for level in self.counts
            ],
        }

    @classmethod
    def from_manifest(cls, data: dict) -> "CharNgramLM":
        lm = cls(int(data["order"]))
        lm.alphabet = tuple(data["alphabet"])
        lm.counts = []
        for level in data["counts"]:
            table: dict[str, Counter] = defaultdict(Counter)
            for ctx, counter in level.items():
                table[ctx] = Counter({c: int(v) for c, v in counter.items()})
            lm.counts.append(table)
        return lm


def train_charlm(corpus: Iterable[str], order: int = 5) -> CharNgramLM:
    """Train a Witten-Bell smoothed character LM; errors on an empty corpus."""
    return CharNgramLM.train(corpus, order)
