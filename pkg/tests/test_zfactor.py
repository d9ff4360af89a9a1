import itertools

import numpy as np
import pytest
from scipy.stats import chi2

from infoflow.errors import DegenerateDistributionError, InvalidInputError
from infoflow.zfactor import (
    XTerm,
    active_term_counts,
    build_reduction,
    evaluate_reduction,
    joint_from_x_probs,
    render_reduction,
    sample_z_patterns,
    x_probs_from_joint,
)


def term(prefix, leaf):
    return XTerm(prefix=tuple(prefix), leaf=leaf)


# the five reference expressions, transcribed term-for-term; prefixes are
# (node, negated) pairs and terms are listed in increasing leaf order
REFERENCE = {
    1: [term([], 1)],
    2: [term([(1, False)], 2), term([(1, True)], 3)],
    3: [
        term([(1, False), (2, False)], 4),
        term([(1, False), (2, True)], 5),
        term([(1, True), (3, False)], 6),
        term([(1, True), (3, True)], 7),
    ],
    4: [
        term([(1, False), (2, False), (4, False)], 8),
        term([(1, False), (2, False), (4, True)], 9),
        term([(1, False), (2, True), (5, False)], 10),
        term([(1, False), (2, True), (5, True)], 11),
        term([(1, True), (3, False), (6, False)], 12),
        term([(1, True), (3, False), (6, True)], 13),
        term([(1, True), (3, True), (7, False)], 14),
        term([(1, True), (3, True), (7, True)], 15),
    ],
    5: [
        term([(1, False), (2, False), (4, False), (8, False)], 16),
        term([(1, False), (2, False), (4, False), (8, True)], 17),
        term([(1, False), (2, False), (4, True), (9, False)], 18),
        term([(1, False), (2, False), (4, True), (9, True)], 19),
        term([(1, False), (2, True), (5, False), (10, False)], 20),
        term([(1, False), (2, True), (5, False), (10, True)], 21),
        term([(1, False), (2, True), (5, True), (11, False)], 22),
        term([(1, False), (2, True), (5, True), (11, True)], 23),
        term([(1, True), (3, False), (6, False), (12, False)], 24),
        term([(1, True), (3, False), (6, False), (12, True)], 25),
        term([(1, True), (3, False), (6, True), (13, False)], 26),
        term([(1, True), (3, False), (6, True), (13, True)], 27),
        term([(1, True), (3, True), (7, False), (14, False)], 28),
        term([(1, True), (3, True), (7, False), (14, True)], 29),
        term([(1, True), (3, True), (7, True), (15, False)], 30),
        term([(1, True), (3, True), (7, True), (15, True)], 31),
    ],
}


class TestBuildReduction:
    def test_reproduces_reference_expressions(self):
        tree = build_reduction(5)
        for j in range(1, 6):
            assert list(tree.terms(j)) == REFERENCE[j]

    def test_term_counts(self):
        tree = build_reduction(6)
        for j in range(1, 7):
            assert len(tree.terms(j)) == 2 ** (j - 1)

    def test_x_factor_count(self):
        for n in (1, 2, 3, 7):
            assert build_reduction(n).n_x_factors == 2 ** n - 1

    def test_embedding(self):
        big = build_reduction(6)
        for j in range(1, 6):
            small = build_reduction(j)
            assert big.expressions[:j] == small.expressions

    def test_invalid_size(self):
        with pytest.raises(InvalidInputError):
            build_reduction(0)

    def test_render_shape(self):
        text = render_reduction(build_reduction(3))
        lines = text.splitlines()
        assert lines[0] == "Z1 = (z1 X1 + ~z1 ~X1)"
        assert lines[1] == ("Z2 = X1 (z2 X2 + ~z2 ~X2) "
                            "+ ~X1 (z2 X3 + ~z2 ~X3)")
        assert "~X1 ~X3 (z3 X7 + ~z3 ~X7)" in lines[2]


class TestEvaluate:
    def test_first_branch_everywhere(self):
        tree = build_reduction(2)
        out = evaluate_reduction(tree, {1: 1, 2: 1, 3: 0})
        assert out == [True, True]

    def test_cobranch_path(self):
        tree = build_reduction(2)
        out = evaluate_reduction(tree, {1: 0, 2: 1, 3: 0})
        assert out == [False, False]  # Z2 follows node 3, which is 0

    def test_exhaustive_single_active_term(self):
        tree = build_reduction(3)
        for bits in itertools.product((0, 1), repeat=7):
            assignment = {k + 1: b for k, b in enumerate(bits)}
            counts = active_term_counts(tree, assignment)
            assert counts == [1, 1, 1]
            # the walk agrees with evaluating the active term's leaf
            outcome = evaluate_reduction(tree, assignment)
            for j in range(1, 4):
                active = [t for t in tree.terms(j)
                          if all((not assignment[n]) if neg else assignment[n]
                                 for n, neg in t.prefix)]
                assert len(active) == 1
                assert outcome[j - 1] == bool(assignment[active[0].leaf])

    def test_incomplete_assignment_rejected(self):
        tree = build_reduction(3)
        with pytest.raises(InvalidInputError):
            evaluate_reduction(tree, {1: 1})


class TestProbabilityMaps:
    def test_independent_z_factors(self):
        # independent Zs: every node at depth j has p = a_j
        a = [0.3, 0.6, 0.85]
        joint = {}
        for bits in itertools.product((True, False), repeat=3):
            q = 1.0
            for b, aj in zip(bits, a):
                q *= aj if b else 1 - aj
            joint[bits] = q
        p_x = x_probs_from_joint(joint)
        for depth, aj in enumerate(a):
            for node in range(2 ** depth, 2 ** (depth + 1)):
                assert p_x[node] == pytest.approx(aj, abs=1e-14)

    def test_worked_inverse_formulas(self):
        rng = np.random.default_rng(2)
        q = rng.dirichlet(np.ones(8))
        patterns = list(itertools.product((True, False), repeat=3))
        joint = dict(zip(patterns, q))
        p_x = x_probs_from_joint(joint)

        def mass(prefix):
            return sum(v for k, v in joint.items()
                       if all(k[i] == b for i, b in enumerate(prefix)))

        assert p_x[1] == pytest.approx(mass([True]), abs=1e-14)
        assert p_x[2] == pytest.approx(mass([True, True]) / mass([True]), abs=1e-14)
        assert p_x[3] == pytest.approx(mass([False, True]) / mass([False]), abs=1e-14)
        assert p_x[4] == pytest.approx(
            mass([True, True, True]) / mass([True, True]), abs=1e-14)
        assert p_x[7] == pytest.approx(
            mass([False, False, True]) / mass([False, False]), abs=1e-14)

    def test_forward_path_product(self):
        tree = build_reduction(3)
        rng = np.random.default_rng(3)
        p_x = {k: float(rng.uniform(0.1, 0.9)) for k in range(1, 8)}
        joint = joint_from_x_probs(tree, p_x)
        want = (1 - p_x[1]) * p_x[3] * (1 - p_x[6])
        assert joint[(False, True, False)] == pytest.approx(want, abs=1e-15)
        assert sum(joint.values()) == pytest.approx(1.0, abs=1e-13)

    def test_unit_mass_when_all_p_one(self):
        tree = build_reduction(3)
        joint = joint_from_x_probs(tree, {k: 1.0 for k in range(1, 8)})
        assert joint[(True, True, True)] == 1.0
        assert sum(v for k, v in joint.items() if k != (True,) * 3) == 0.0

    def test_round_trip_random_joints(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 4):
            tree = build_reduction(n)
            patterns = list(itertools.product((True, False), repeat=n))
            for _ in range(200):
                q = rng.dirichlet(np.ones(2 ** n)) + 1e-6
                q /= q.sum()
                joint = dict(zip(patterns, q))
                p_x = x_probs_from_joint(joint)
                back = joint_from_x_probs(tree, p_x)
                err = max(abs(back[k] - joint[k]) for k in patterns)
                assert err < 1e-13

    def test_comonotone_pair_degenerate(self):
        joint = {(True, True): 0.6, (False, False): 0.4,
                 (True, False): 0.0, (False, True): 0.0}
        with pytest.raises(DegenerateDistributionError) as err:
            x_probs_from_joint(joint)
        assert err.value.node is not None

    def test_sampling_reproduces_joint(self):
        # chi-square goodness of fit at 10^6 samples
        rng = np.random.default_rng(17)
        n = 4
        tree = build_reduction(n)
        patterns = list(itertools.product((True, False), repeat=n))
        q = rng.dirichlet(2.0 * np.ones(2 ** n)) + 5e-3
        q /= q.sum()
        joint = dict(zip(patterns, q))
        p_x = x_probs_from_joint(joint)
        draws = sample_z_patterns(tree, p_x, rng, 1_000_000)
        counts = {}
        keys, inverse = np.unique(draws, axis=0, return_counts=True)
        for row, c in zip(keys, inverse):
            counts[tuple(bool(b) for b in row)] = int(c)
        total = sum(counts.values())
        stat = 0.0
        for pat in patterns:
            expected = joint[pat] * total
            observed = counts.get(pat, 0)
            stat += (observed - expected) ** 2 / expected
        p_value = chi2.sf(stat, df=2 ** n - 1)
        assert p_value > 0.001
