import unittest
import itertools
import numpy as np

from hopbandit.baselines import (CombUCB1, ThompsonSampling, AntiJamExp3,
                                 OraclePolicy, MiniBatch, minibatch_size,
                                 top_k)
from hopbandit.policy import AUFHExp3
from hopbandit.strategy import Strategy, StrategySpace, SpaceTooLargeError

class TestCombUCB1(unittest.TestCase):

    def test_sweep(self):

        space = StrategySpace(5, 2)
        pol = CombUCB1(space)
        played = []
        for t in range(3):
            s = pol.select()
            played.append(s)
            pol.update(s, np.ones(2))
        self.assertEqual(played, pol.covering.blocks)
        self.assertTrue(np.all(pol.counts >= 1))

    def test_index(self):

        space = StrategySpace(4, 2)
        pol = CombUCB1(space)
        for block in list(pol.covering.blocks):
            losses = np.array([0. if f == 2 else 1. for f in block.members])
            pol.update(block, losses)

        idx = pol.index(pol.t + 1)
        self.assertEqual(int(np.argmax(idx)), 2)
        self.assertEqual(np.sum(idx == idx.max()), 1)
        self.assertIn(2, pol.select())

        # Equal means, fewer pulls wins.
        pol = CombUCB1(space)
        pol.counts[:] = [5, 1, 5, 5]
        pol.reward_sums[:] = 0.5 * pol.counts
        pol.t = 16
        self.assertEqual(pol.select(), Strategy([0, 1]))

    def test_enumeration_oracle(self):

        rng = np.random.default_rng(2)
        space = StrategySpace(6, 2)
        pol = CombUCB1(space)
        pol.counts[:] = rng.integers(1, 20, size=6)
        pol.reward_sums[:] = rng.uniform(0, 1, size=6) * pol.counts
        pol.t = 60

        idx = pol.index(61)
        best = max(itertools.combinations(range(6), 2),
                   key=lambda c: idx[list(c)].sum())
        self.assertEqual(pol.select(), Strategy(best))

    def test_top_k_ties(self):
        self.assertEqual(top_k([1., 1., 1., 1.], 2), Strategy([0, 1]))
        self.assertEqual(top_k([0., 2., 1., 2.], 2), Strategy([1, 3]))

class TestThompson(unittest.TestCase):

    def test_concentrated(self):

        pol = ThompsonSampling(StrategySpace(2, 1))
        pol.alpha[:] = [100., 1.]
        pol.beta[:] = [1., 100.]
        rng = np.random.default_rng(0)
        hits = sum(pol.select(rng) == Strategy([0]) for _ in range(10000))
        self.assertTrue(hits > 9900)

    def test_symmetric(self):

        pol = ThompsonSampling(StrategySpace(4, 2))
        rng = np.random.default_rng(1)
        counts = np.zeros(4)
        ndraw = 8000
        for _ in range(ndraw):
            counts[pol.select(rng).indices] += 1
        np.testing.assert_allclose(counts / ndraw, 0.5, atol=0.03)

    def test_update(self):

        pol = ThompsonSampling(StrategySpace(3, 2))
        pol.update(Strategy([0, 2]), np.array([0., 1.]))
        np.testing.assert_array_equal(pol.alpha, [2., 1., 1.])
        np.testing.assert_array_equal(pol.beta, [1., 1., 2.])

class TestAntiJamExp3(unittest.TestCase):

    def test_probabilities(self):

        pol = AntiJamExp3(StrategySpace(4, 2))
        np.testing.assert_allclose(pol.probabilities(), 1. / 6)
        self.assertEqual(pol.gamma(1), 1.)

        pol = AntiJamExp3(StrategySpace(2, 1))
        pol.log_weights[:] = [0., 0.]
        np.testing.assert_allclose(pol.probabilities(t=10 ** 8), [0.5, 0.5])

    def test_update(self):

        pol = AntiJamExp3(StrategySpace(5, 2))
        rng = np.random.default_rng(3)
        for t in range(200):
            s = pol.select(rng)
            # Channel 0 is always lost.
            pol.update(s, np.array([1. if f == 0 else 0. for f in s]))
        p = pol.probabilities()
        self.assertAlmostEqual(p.sum(), 1.)
        self.assertEqual(pol.log_weights.max(), 0.)
        with_zero = np.any(pol.strategies == 0, axis=1)
        self.assertTrue(p[with_zero].max() < p[~with_zero].max())

    def test_too_large(self):
        self.assertRaises(SpaceTooLargeError, AntiJamExp3,
                          StrategySpace(64, 12))

class TestOracle(unittest.TestCase):

    def test_fixed(self):
        s = Strategy([1, 2])
        pol = OraclePolicy(s)
        pol.update(s, np.ones(2))
        self.assertEqual(pol.select(np.random.default_rng(0)), s)

class TestMiniBatch(unittest.TestCase):

    def test_size(self):

        self.assertEqual(minibatch_size(16, 4, 10 ** 6), 21)
        self.assertEqual(minibatch_size(16, 4, 1), 1)

    def test_identity(self):

        space = StrategySpace(6, 2)
        inner = AUFHExp3(space)
        wrapped = MiniBatch(lambda: AUFHExp3(space), space, tau=1)
        rng_a = np.random.default_rng(4)
        rng_b = np.random.default_rng(4)
        loss_rng = np.random.default_rng(5)

        for t in range(100):
            a = inner.select(rng_a)
            b = wrapped.select(rng_b)
            self.assertEqual(a, b)
            losses = loss_rng.integers(0, 2, size=2).astype(float)
            inner.update(a, losses)
            wrapped.update(b, losses)

        np.testing.assert_array_equal(inner.state.log_weights,
                                      wrapped.inner.state.log_weights)

    def test_frozen(self):

        space = StrategySpace(6, 2)
        wrapped = MiniBatch(lambda: AUFHExp3(space), space, tau=5)
        rng = np.random.default_rng(6)
        played = []
        for t in range(20):
            s = wrapped.select(rng)
            played.append(s)
            wrapped.update(s, np.array([1., 0.]))

        for b in range(4):
            self.assertEqual(len(set(played[5 * b:5 * (b + 1)])), 1)
        # Inner policy updated once per batch with the batch mean.
        self.assertEqual(wrapped.inner.state.round, 4)

    def test_doubling(self):

        space = StrategySpace(5, 2)
        wrapped = MiniBatch(lambda: AUFHExp3(space), space)
        self.assertTrue(wrapped.doubling)
        rng = np.random.default_rng(7)
        for t in range(1, 32):
            s = wrapped.select(rng)
            wrapped.update(s, np.zeros(2))
        # Epochs of 1, 2, 4, 8 and 16 rounds.
        self.assertEqual(wrapped.epoch, 5)
        self.assertEqual(wrapped._epoch_left, 0)

    def test_horizon(self):

        space = StrategySpace(16, 4)
        wrapped = MiniBatch(lambda: AUFHExp3(space), space, horizon=10 ** 6)
        self.assertEqual(wrapped.tau, 21)
        self.assertRaises(ValueError, MiniBatch, lambda: None, space, tau=0)

if __name__ == '__main__':
    unittest.main()
