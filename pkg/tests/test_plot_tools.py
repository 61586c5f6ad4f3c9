import os
import shutil
import tempfile
import unittest
import numpy as np

from hopbandit.plot_tools import plot_regret, plot_regret_csv, read_results_csv

CSV = '''run_id,policy,regime,n,k_r,checkpoint,regret_mean,regret_std,metric,pseudo_mean,pseudo_std,hindsight_mean,hindsight_std
abc,EMP,STOCHASTIC,8,4,10,1.5,0.5,pseudo,1.5,0.5,2,1
abc,EMP,STOCHASTIC,8,4,100,3,1,pseudo,3,1,4,1
abc,UCB,STOCHASTIC,8,4,10,2,0,pseudo,2,0,2,0
abc,UCB,STOCHASTIC,8,4,100,4,0.25,pseudo,4,0.25,5,1
'''

class TestPlotTools(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        self.csv = os.path.join(self.tmpdir, 'results.csv')
        with open(self.csv, 'w') as handle:
            handle.write(CSV)

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_read(self):

        curves, metric = read_results_csv(self.csv)
        self.assertEqual(metric, 'pseudo')
        self.assertEqual(list(curves), ['EMP', 'UCB'])
        t, mean, std = curves['UCB']
        np.testing.assert_array_equal(t, [10, 100])
        np.testing.assert_array_equal(mean, [2., 4.])
        np.testing.assert_array_equal(std, [0., 0.25])

    def test_plot(self):

        curves = dict(EMP=(np.array([1, 10, 100]), np.array([0., 1., 2.]),
                           np.array([0., .5, .5])))
        filename = plot_regret(curves, self.tmpdir, 'curves', tight=True)
        self.assertEqual(filename, os.path.join(self.tmpdir, 'curves.png'))
        self.assertTrue(os.path.getsize(filename) > 0)

        filename = plot_regret_csv(self.csv, self.tmpdir, 'from_csv',
                                   logx=False, title='stochastic')
        self.assertTrue(os.path.isfile(filename))

if __name__ == '__main__':
    unittest.main()
