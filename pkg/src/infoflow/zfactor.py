"""Reduction of dependent binary Z-factors to independent binary X-factors.

n dependent binaries Z_1..Z_n reduce to 2^n - 1 independent binaries
X_1..X_{2^n-1} arranged on a binary tree: node k branches to 2k (X_k
active) and co-branches to 2k+1 (co-factor 1-X_k active).  Z_j's
expression has 2^{j-1} terms, one per depth-(j-1) leaf, each a path
product of factors/co-factors ending in (z_j X_leaf + zbar_j Xbar_leaf).
X_0 = 1 by convention, so Z_1 has an empty path.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateDistributionError, InvalidInputError

__all__ = [
    "XTerm",
    "ReductionTree",
    "build_reduction",
    "evaluate_reduction",
    "x_probs_from_joint",
    "joint_from_x_probs",
    "render_reduction",
]

MAX_EXPRESSION_FACTORS = 20


@dataclass(frozen=True)
class XTerm:
    """One summand of a reduction expression.

    ``prefix`` is the path product: (node, negated) pairs from the root,
    where negated means the co-factor 1 - X_node.  ``leaf`` is the node
    of the final (z X + zbar Xbar) pair.
    """

    prefix: tuple
    leaf: int


@dataclass(frozen=True)
class ReductionTree:
    """Reduction expressions for Z_1..Z_n over X_1..X_{2^n - 1}."""

    n: int
    expressions: tuple  # expressions[j-1] = tuple of XTerm for Z_j

    @property
    def n_x_factors(self) -> int:
        return 2 ** self.n - 1

    def terms(self, j: int) -> tuple:
        if not (1 <= j <= self.n):
            raise InvalidInputError(f"Z index {j} outside 1..{self.n}")
        return self.expressions[j - 1]


def _path_to_leaf(leaf: int, depth: int) -> tuple:
    """(node, negated) prefix from the root (node 1) down to the leaf's parent.

    Going from node k to child 2k keeps X_k; to child 2k+1 keeps the
    co-factor.  The leaf's binary digits after the leading 1 encode the
    turns taken.
    """
    bits = bin(leaf)[3:]  # drop '0b1'
    prefix = []
    node = 1
    for b in bits[:depth]:
        prefix.append((node, b == "1"))
        node = 2 * node + (1 if b == "1" else 0)
    return tuple(prefix)


def build_reduction(n: int) -> ReductionTree:
    """Reduction expressions for n dependent binaries.

    Terms for Z_j are listed in increasing leaf order 2^{j-1}..2^j - 1,
    matching the branch/co-branch completion order.
    """
    if n < 1:
        raise InvalidInputError("need at least one Z-factor")
    if n > MAX_EXPRESSION_FACTORS:
        raise InvalidInputError(
            f"explicit expressions supported for n <= {MAX_EXPRESSION_FACTORS}")
    expressions = []
    for j in range(1, n + 1):
        depth = j - 1
        terms = tuple(XTerm(prefix=_path_to_leaf(leaf, depth), leaf=leaf)
                      for leaf in range(2 ** depth, 2 ** j))
        expressions.append(terms)
    return ReductionTree(n=n, expressions=tuple(expressions))


def evaluate_reduction(tree: ReductionTree,
                       x_assignment: Mapping[int, int] | Sequence[int]) -> list[bool]:
    """Evaluate all Z_j for a complete X assignment.

    Returns one boolean per Z_j: True when Z_j takes its primary value
    z_j (the active leaf factor is 1).  Exactly one term per expression
    is active, which ``active_term_counts`` makes checkable.
    """
    x = _as_assignment(tree, x_assignment)
    out = []
    for j in range(1, tree.n + 1):
        node = 1
        for _ in range(j - 1):
            node = 2 * node if x[node] else 2 * node + 1
        out.append(bool(x[node]))
    return out


def active_term_counts(tree: ReductionTree,
                       x_assignment: Mapping[int, int] | Sequence[int]) -> list[int]:
    """Number of nonzero X-terms per expression (1 for any assignment)."""
    x = _as_assignment(tree, x_assignment)
    counts = []
    for j in range(1, tree.n + 1):
        count = 0
        for term in tree.terms(j):
            active = all((not x[node]) if negated else x[node]
                         for node, negated in term.prefix)
            if active:
                count += 1
        counts.append(count)
    return counts


def _as_assignment(tree, x_assignment) -> dict[int, int]:
    if isinstance(x_assignment, Mapping):
        x = {int(k): int(v) for k, v in x_assignment.items()}
    else:
        vals = list(x_assignment)
        x = {k + 1: int(v) for k, v in enumerate(vals)}
    missing = [k for k in range(1, tree.n_x_factors + 1) if k not in x]
    if missing:
        raise InvalidInputError(f"incomplete X assignment; missing nodes {missing}")
    bad = [k for k, v in x.items() if v not in (0, 1)]
    if bad:
        raise InvalidInputError(f"X values must be 0/1; offending nodes {bad}")
    return x


# ---------------------------------------------------------------------------
# Probability mappings
# ---------------------------------------------------------------------------

def _normalize_joint(joint: Mapping) -> tuple[int, dict[tuple, float]]:
    patterns = {tuple(bool(b) for b in k): float(v) for k, v in joint.items()}
    sizes = {len(k) for k in patterns}
    if len(sizes) != 1:
        raise InvalidInputError("all sign patterns must have the same length")
    n = sizes.pop()
    if len(patterns) != 2 ** n:
        raise InvalidInputError(f"need all {2 ** n} sign patterns for n = {n}")
    if any(v < 0.0 for v in patterns.values()):
        raise InvalidInputError("joint probabilities must be nonnegative")
    total = sum(patterns.values())
    if abs(total - 1.0) > 1e-9:
        raise InvalidInputError("joint probabilities must sum to 1")
    return n, {k: v / total for k, v in patterns.items()}


def x_probs_from_joint(joint: Mapping) -> dict[int, float]:
    """Conditional-probability tree p_X from a joint Z distribution.

    Pattern keys are length-n sequences of truth values, True meaning
    Z_j = z_j.  Node k at depth d carries
    P(Z_{d+1} = z | Z_1..Z_d followed the path to k); a zero-mass
    conditioning path raises with the offending node.
    """
    n, q = _normalize_joint(joint)
    p_x: dict[int, float] = {}
    for depth in range(n):
        for leaf in range(2 ** depth, 2 ** (depth + 1)):
            bits = bin(leaf)[3:]
            # bit '0' = branch = conditioning on z; '1' = co-branch = zbar.
            prefix = tuple(b == "0" for b in bits)
            cond_mass = sum(v for k, v in q.items() if k[:depth] == prefix)
            if cond_mass <= 0.0:
                raise DegenerateDistributionError(
                    f"conditioning path for node {leaf} has zero probability "
                    "mass; p_X is undefined there", node=leaf)
            num = sum(v for k, v in q.items()
                      if k[:depth] == prefix and k[depth])
            if num == 0.0 or num == cond_mass:
                # A branch or co-branch of this node carries zero mass;
                # deeper conditional probabilities would divide by it.
                raise DegenerateDistributionError(
                    f"node {leaf} has a zero-mass branch (p_X would be "
                    f"{num / cond_mass:g}); the joint distribution is "
                    "degenerate there", node=leaf)
            p_x[leaf] = num / cond_mass
    return p_x


def joint_from_x_probs(tree: ReductionTree,
                       p_x: Mapping[int, float]) -> dict[tuple, float]:
    """Joint Z distribution induced by independent X's with given p_X.

    Each sign pattern's probability is the product of node probabilities
    (or co-probabilities) along its unique path.
    """
    for k in range(1, tree.n_x_factors + 1):
        if k not in p_x:
            raise InvalidInputError(f"missing p_X for node {k}")
        if not (0.0 <= p_x[k] <= 1.0):
            raise InvalidInputError(f"p_X[{k}] outside [0, 1]")
    out = {}
    for pattern in itertools.product((True, False), repeat=tree.n):
        prob = 1.0
        node = 1
        for take_z in pattern:
            prob *= p_x[node] if take_z else 1.0 - p_x[node]
            node = 2 * node if take_z else 2 * node + 1
        out[pattern] = prob
    return out


def sample_z_patterns(tree: ReductionTree, p_x: Mapping[int, float],
                      rng: np.random.Generator, size: int) -> np.ndarray:
    """Sample Z sign patterns by drawing the X's independently.

    Returns a (size, n) boolean array; column j is True when Z_{j+1}
    takes its primary value.
    """
    nodes = np.arange(1, tree.n_x_factors + 1)
    probs = np.array([p_x[k] for k in nodes])
    draws = rng.random((size, nodes.size)) < probs
    out = np.empty((size, tree.n), dtype=bool)
    current = np.ones(size, dtype=int)
    for j in range(tree.n):
        active = draws[np.arange(size), current - 1]
        out[:, j] = active
        current = np.where(active, 2 * current, 2 * current + 1)
    return out


def render_reduction(tree: ReductionTree) -> str:
    """Text form of the reduction equations, one line per Z-factor.

    Co-factors print as ~X_k and the co-value as ~z_j.
    """
    lines = []
    for j in range(1, tree.n + 1):
        parts = []
        for term in tree.terms(j):
            bits = []
            for node, negated in term.prefix:
                bits.append(f"~X{node}" if negated else f"X{node}")
            leaf = f"(z{j} X{term.leaf} + ~z{j} ~X{term.leaf})"
            parts.append(" ".join(bits + [leaf]) if bits else leaf)
        lines.append(f"Z{j} = " + " + ".join(parts))
    return "\n".join(lines)
