import unittest
import numpy as np

from hopbandit import tools

class TestTools(unittest.TestCase):

    def test_derive_seed(self):

        a = tools.derive_seed(0, 'policy', 'EMP', 3)
        self.assertEqual(a, tools.derive_seed(0, 'policy', 'EMP', 3))
        self.assertNotEqual(a, tools.derive_seed(0, 'policy', 'EMP', 4))
        self.assertNotEqual(a, tools.derive_seed(1, 'policy', 'EMP', 3))
        self.assertNotEqual(a, tools.derive_seed(0, 'policy', 'ACC', 3))
        self.assertTrue(0 <= a < 2 ** 64)

    def test_counter_stream(self):

        s1 = tools.CounterStream(7, 0, 3, chunk=16)
        s2 = tools.CounterStream(7, 0, 3, chunk=16)

        # Random access gives the same rows as sequential access.
        seq = np.array([s1.row(i) for i in range(40)])
        np.testing.assert_array_equal(s2.row(35), seq[35])
        np.testing.assert_array_equal(s2.row(2), seq[2])

        self.assertEqual(seq.shape, (40, 3))
        self.assertTrue(np.all((seq >= 0) & (seq < 1)))

        other = tools.CounterStream(7, 1, 3, chunk=16)
        self.assertFalse(np.array_equal(other.row(0), seq[0]))

    def test_log_checkpoints(self):

        cps = tools.log_checkpoints(10 ** 4)
        self.assertEqual(cps[0], 1)
        self.assertEqual(cps[-1], 10 ** 4)
        self.assertTrue(np.all(np.diff(cps) > 0))
        self.assertIn(1000, cps)

        self.assertEqual(tools.log_checkpoints(1), [1])
        self.assertEqual(tools.log_checkpoints(37)[-1], 37)
        self.assertRaises(ValueError, tools.log_checkpoints, 0)

    def test_scale_checkpoints(self):

        cps = tools.scale_checkpoints([10, 100, 1000], 1000, 100)
        self.assertEqual(cps, [1, 10, 100])
        cps = tools.scale_checkpoints([1, 2, 3, 1000], 1000, 10)
        self.assertEqual(cps, [1, 10])

    def test_inverse_cdf(self):

        p = np.array([0.2, 0., 0.5, 0.3])
        self.assertEqual(tools.inverse_cdf(p, 0.), 0)
        self.assertEqual(tools.inverse_cdf(p, 0.19), 0)
        self.assertEqual(tools.inverse_cdf(p, 0.21), 2)
        self.assertEqual(tools.inverse_cdf(p, 0.71), 3)
        self.assertEqual(tools.inverse_cdf(p, 0.999999), 3)
        self.assertEqual(tools.inverse_cdf([0.5, 0.5, 0.], 0.9999999), 1)

    def test_packet_rate(self):

        # No losses: k_r packets of 1000 bits per second.
        self.assertAlmostEqual(tools.packet_rate(0., 10, 2), 2e-3)
        self.assertAlmostEqual(tools.packet_rate(10., 10, 2), 1e-3)
        rate = tools.packet_rate(np.array([[0., 20.]]), np.array([[10, 10]]),
                                 2)
        np.testing.assert_allclose(rate, [[2e-3, 0.]])

    def test_linear_fit(self):

        x = np.arange(10.)
        a, b, r2 = tools.linear_fit(x, 3. + 2. * x)
        self.assertAlmostEqual(a, 3.)
        self.assertAlmostEqual(b, 2.)
        self.assertAlmostEqual(r2, 1.)

if __name__ == '__main__':
    unittest.main()
