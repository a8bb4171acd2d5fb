"""Seeded execution of probabilistic programs.

Deterministic redexes are contracted leftmost-outermost; a measurement redex
branches. ``outcome_tree`` explores every branch once, so sampling many shots
only walks a small tree instead of re-running the engine.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FuelExhausted, LinealError
from .rewrite import EngineConfig, iter_redexes, normalize, FUEL_EXHAUSTED
from .terms import LINEAL, Term, alpha_ac_eq, canonicalize, replace_at


@dataclass(frozen=True)
class OutcomeDistribution:
    """Final terms with their probabilities (summing to 1 within eps)."""

    outcomes: tuple[tuple[Term, float], ...]
    seed: Optional[int] = None
    dialect: str = LINEAL

    def probability(self, t: Term) -> float:
        return sum(p for u, p in self.outcomes if alpha_ac_eq(u, t))

    def to_dict(self) -> dict:
        from .syntax import pretty

        return {
            "outcomes": [{"term": pretty(t, self.dialect), "p": p} for t, p in self.outcomes],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def merge_outcomes(pairs) -> list[tuple[Term, float]]:
    merged: list[list] = []
    for t, p in pairs:
        for slot in merged:
            if alpha_ac_eq(slot[0], t):
                slot[1] += p
                break
        else:
            merged.append([t, p])
    return [(t, p) for t, p in merged]


@dataclass
class Node:
    """Either a leaf (``term`` normal) or a branch over measurement outcomes."""

    term: Term
    branches: list[tuple[float, "Node"]] = field(default_factory=list)
    steps: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.branches


def _advance(t: Term, cfg: EngineConfig, budget: int):
    """Contract deterministic redexes until normal or a measurement is next."""
    used = 0
    while True:
        redex = next(iter_redexes(t, cfg), None)
        if redex is None or redex.probabilistic:
            return t, redex, used
        if used >= budget:
            raise FuelExhausted(cfg.fuel, t)
        t = replace_at(t, redex.pos, redex.contract()[0][1])
        used += 1


def outcome_tree(t: Term, cfg: Optional[EngineConfig] = None) -> Node:
    """Every measurement branch of ``t``; fuel bounds each root-to-leaf path."""
    cfg = cfg or EngineConfig()
    return _explore(canonicalize(t), cfg, cfg.fuel)


def _explore(t: Term, cfg: EngineConfig, budget: int) -> Node:
    t, redex, used = _advance(t, cfg, budget)
    node = Node(t, steps=used)
    if redex is None:
        return node
    budget -= used
    if budget <= 0:
        raise FuelExhausted(cfg.fuel, t)
    for p, reduct in redex.contract():
        child = _explore(replace_at(t, redex.pos, reduct), cfg, budget - 1)
        node.branches.append((p, child))
    return node


def _leaves(node: Node, weight: float = 1.0):
    if node.is_leaf:
        yield node.term, weight
    for p, child in node.branches:
        yield from _leaves(child, weight * p)


def distribution(t: Term, cfg: Optional[EngineConfig] = None) -> OutcomeDistribution:
    """Exact distribution of normal forms of ``t``."""
    cfg = cfg or EngineConfig()
    leaves = merge_outcomes(_leaves(outcome_tree(t, cfg)))
    return OutcomeDistribution(tuple(leaves), None, cfg.dialect)


def _walk(node: Node, rng) -> Term:
    while not node.is_leaf:
        u = rng.random()
        acc = 0.0
        chosen = node.branches[-1][1]
        for p, child in node.branches:
            acc += p
            if u < acc:
                chosen = child
                break
        node = chosen
    return node.term


def run(t: Term, seed: int, cfg: Optional[EngineConfig] = None) -> Term:
    """Normal form of ``t`` with each measurement resolved by the seeded
    generator; the same seed always gives the same result."""
    cfg = cfg or EngineConfig()
    trace = normalize(t, cfg, rng=np.random.default_rng(seed))
    if trace.outcome == FUEL_EXHAUSTED:
        raise FuelExhausted(cfg.fuel, trace.final)
    return trace.final


def sample(t: Term, shots: int, seed: int, cfg: Optional[EngineConfig] = None) -> list[tuple[Term, int]]:
    """Counts of normal forms over ``shots`` runs, in first-seen order."""
    if shots < 1:
        raise LinealError("shots must be positive")
    cfg = cfg or EngineConfig()
    tree = outcome_tree(t, cfg)
    leaves: list[Term] = []
    counts: Counter = Counter()
    for shot in range(shots):
        # shot i replays run(t, [seed, i]), independent of the other shots
        leaf = _walk(tree, np.random.default_rng([seed, shot]))
        for i, known in enumerate(leaves):
            if known is leaf or alpha_ac_eq(known, leaf):
                counts[i] += 1
                break
        else:
            leaves.append(leaf)
            counts[len(leaves) - 1] += 1
    return [(leaf, counts[i]) for i, leaf in enumerate(leaves)]
