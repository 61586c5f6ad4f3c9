import unittest
import itertools
import numpy as np
from hypothesis import given, settings, strategies as st

from hopbandit.strategy import (Strategy, StrategySpace, RegretTrace,
                                SpaceTooLargeError, build_covering_set,
                                enumerate_strategies, hindsight_best,
                                optimal_loss, pseudo_regret_update, lex_rank)

class TestStrategy(unittest.TestCase):

    def test_init(self):

        s = Strategy([3, 0, 2])
        self.assertEqual(s.members, (0, 2, 3))
        self.assertEqual(len(s), 3)
        self.assertTrue(2 in s)
        self.assertFalse(1 in s)
        np.testing.assert_array_equal(s.mask(5),
                                      [True, False, True, True, False])

        # Duplicates and out of range.
        self.assertRaises(ValueError, Strategy, [1, 1])
        self.assertRaises(ValueError, Strategy, [0, 4], n=4)
        self.assertRaises(ValueError, Strategy, [-1, 2], n=4)

    def test_equality(self):

        self.assertEqual(Strategy([1, 0]), Strategy((0, 1)))
        self.assertNotEqual(Strategy([1, 2]), Strategy([0, 1]))
        self.assertEqual(len({Strategy([0, 1]), Strategy([1, 0])}), 1)

class TestStrategySpace(unittest.TestCase):

    def test_init(self):

        self.assertEqual(StrategySpace(8, 4).N, 70)
        self.assertEqual(StrategySpace(60, 4).N, 487635)
        self.assertTrue(StrategySpace(64, 24).enumerable)
        self.assertFalse(StrategySpace(200, 100).enumerable)

        self.assertRaises(ValueError, StrategySpace, 1, 1)
        self.assertRaises(ValueError, StrategySpace, 4, 0)
        self.assertRaises(ValueError, StrategySpace, 4, 5)

    def test_strategy_matrix(self):

        space = StrategySpace(5, 2)
        mat = space.strategy_matrix()
        self.assertEqual(mat.shape, (10, 2))
        np.testing.assert_array_equal(mat[0], [0, 1])
        np.testing.assert_array_equal(mat[-1], [3, 4])

        for i, row in enumerate(mat):
            self.assertEqual(lex_rank(Strategy(row), 5), i)

        self.assertRaises(SpaceTooLargeError, space.strategy_matrix, cap=9)

        with self.assertRaises(SpaceTooLargeError) as cm:
            StrategySpace(64, 12).strategy_matrix()
        self.assertIn('space too large', str(cm.exception))

    def test_validate(self):

        space = StrategySpace(4, 2)
        space.validate(Strategy([0, 3]))
        self.assertRaises(ValueError, space.validate, Strategy([0]))
        self.assertRaises(ValueError, space.validate, Strategy([1, 4]))

class TestCovering(unittest.TestCase):

    def test_exact_division(self):

        cover = build_covering_set(StrategySpace(8, 4))
        self.assertEqual(cover.blocks, [Strategy([0, 1, 2, 3]),
                                        Strategy([4, 5, 6, 7])])
        self.assertEqual(cover.owner[5], 1)

    def test_padding(self):

        cover = build_covering_set(StrategySpace(3, 2))
        self.assertEqual(cover.blocks, [Strategy([0, 1]), Strategy([2, 0])])
        np.testing.assert_array_equal(cover.owner, [0, 0, 1])

    def test_single_block(self):

        cover = build_covering_set(StrategySpace(4, 4))
        self.assertEqual(len(cover), 1)
        np.testing.assert_array_equal(cover.owner, [0, 0, 0, 0])

    @given(st.integers(2, 30), st.data())
    @settings(max_examples=50, deadline=None)
    def test_covers_all(self, n, data):

        k_r = data.draw(st.integers(1, n))
        cover = build_covering_set(StrategySpace(n, k_r))

        self.assertEqual(len(cover), -(-n // k_r))
        seen = np.zeros(n, dtype=bool)
        for block in cover.blocks:
            self.assertEqual(len(block), k_r)
            seen[block.indices] = True
        self.assertTrue(seen.all())

        for f in range(n):
            self.assertIn(f, cover.blocks[cover.owner[f]])

    def test_exploration_mass(self):

        cover = build_covering_set(StrategySpace(3, 2))
        mass = cover.exploration_mass([0.1, 0.2, 0.3])
        np.testing.assert_allclose(mass, [0.3, 0.3])

class TestEnumerate(unittest.TestCase):

    def test_enumerate(self):

        out = enumerate_strategies(StrategySpace(3, 2), cap=10)
        self.assertEqual(out, [Strategy([0, 1]), Strategy([0, 2]),
                               Strategy([1, 2])])
        self.assertEqual(len(enumerate_strategies(StrategySpace(8, 4),
                                                  cap=100)), 70)
        self.assertRaises(SpaceTooLargeError, enumerate_strategies,
                          StrategySpace(8, 4), cap=69)

class TestRegret(unittest.TestCase):

    def test_hindsight_best(self):

        best, total = hindsight_best([5, 1, 3, 2], 2)
        self.assertEqual(best, Strategy([1, 3]))
        self.assertEqual(total, 3)

        best, total = hindsight_best([1., 1., 1., 1.], 2)
        self.assertEqual(best, Strategy([0, 1]))

    def test_hindsight_brute_force(self):

        rng = np.random.default_rng(4)
        totals = rng.integers(0, 20, size=6).astype(float)
        brute = min(totals[list(c)].sum()
                    for c in itertools.combinations(range(6), 3))
        self.assertEqual(hindsight_best(totals, 3)[1], brute)

    def test_pseudo_regret(self):

        mu = np.array([0.5, 0.5, 0.3, 0.5])
        self.assertAlmostEqual(optimal_loss(mu, 2), 0.8)

        trace = RegretTrace()
        pseudo_regret_update(trace, 1, Strategy([0, 1]), mu)
        self.assertAlmostEqual(trace.pseudo, 0.2)

        trace = RegretTrace()
        pseudo_regret_update(trace, 1, Strategy([0, 2]), mu)
        self.assertAlmostEqual(trace.pseudo, 0.)

        trace = RegretTrace()
        for t in range(1, 11):
            pseudo_regret_update(trace, t, Strategy([0, 1]), mu)
        self.assertAlmostEqual(trace.pseudo, 2.)

    def test_trace_record(self):

        trace = RegretTrace(policy='p', environment='STOCHASTIC')
        trace.pseudo = 1.5
        trace.record(1, 2., cumulative_loss=3.)
        trace.record(10, 4.)
        self.assertRaises(ValueError, trace.record, 10, 5.)

        t, pseudo, hind, loss = trace.as_arrays()
        np.testing.assert_array_equal(t, [1, 10])
        np.testing.assert_array_equal(pseudo, [1.5, 1.5])
        np.testing.assert_array_equal(hind, [2., 4.])
        self.assertEqual(loss[0], 3.)
        self.assertTrue(np.isnan(loss[1]))

if __name__ == '__main__':
    unittest.main()
