import os
import json
import shutil
import tempfile
import unittest
import numpy as np

from hopbandit.experiment import (ExperimentConfig, PolicySpec, Experiment,
                                  MPIBase, ENVELOPES, apply_overrides,
                                  run_experiment, run_single, check_envelope,
                                  timing_bench, fit_dp_cost, persist_results,
                                  persist_timing, packet_rate_summary,
                                  write_manifest, CSV_HEADER)
from hopbandit.environment import EnvironmentSpec, make_environment
from hopbandit.strategy import StrategySpace, ConfigError
from hopbandit.baselines import MiniBatch
from hopbandit.policy import AUFHExp3

def _config(**kwargs):
    d = dict(environment=dict(regime='STOCHASTIC', n=6, delta=0.2, seed=1),
             policies=[dict(name='EMP', kind='aufh', variant='EMP'),
                       dict(name='UCB', kind='combucb1')],
             k_r=2, horizon=300, repetitions=3,
             checkpoints=[10, 100, 300], master_seed=5)
    d.update(kwargs)
    return d

class TestMPIBase(unittest.TestCase):

    def test_serial(self):

        base = MPIBase(mpi=False)
        self.assertFalse(base.mpi)
        self.assertEqual(base.mpi_rank, 0)
        self.assertEqual(base.mpi_size, 1)
        arr = [1, 2, 3]
        self.assertEqual(base.distribute_array(arr), arr)
        self.assertEqual(base.gather_list(arr), arr)
        base.barrier()

    def test_partition(self):

        class Comm(object):
            def __init__(self, rank, size):
                self.rank, self.size = rank, size
            def Get_rank(self):
                return self.rank
            def Get_size(self):
                return self.size

        cells = list(range(11))
        shares = []
        for rank in range(4):
            base = MPIBase(mpi=False)
            base.mpi, base._comm = True, Comm(rank, 4)
            shares.append(base.distribute_array(cells))

        self.assertEqual([len(s) for s in shares], [3, 3, 3, 2])
        self.assertEqual([c for s in shares for c in s], cells)

class TestPolicySpec(unittest.TestCase):

    def test_build(self):

        space = StrategySpace(6, 2)
        env = make_environment(EnvironmentSpec('STOCHASTIC', 6))

        pol = PolicySpec('a', variant='ACC', method='enumerate').build(space,
                                                                       env)
        self.assertIsInstance(pol, AUFHExp3)
        self.assertEqual(pol.method, 'enumerate')

        pol = PolicySpec('b', minibatch='auto').build(space, env,
                                                       horizon=10 ** 4)
        self.assertIsInstance(pol, MiniBatch)

        pol = PolicySpec('c', variant='KNOWN_GAP',
                         known_gaps='environment').build(space, env)
        np.testing.assert_allclose(pol.schedule.known_gaps, env.gaps)

        pol = PolicySpec('d', kind='oracle').build(space, env)
        self.assertEqual(pol.select(None), env.optimal_strategy(2))

    def test_errors(self):

        self.assertRaises(ConfigError, PolicySpec, 'a', kind='foo')
        self.assertRaises(ConfigError, PolicySpec, 'a', kind='combucb1',
                          variant='EMP')
        self.assertRaises(ConfigError, PolicySpec, 'a', minibatch=0)
        self.assertRaises(ConfigError, PolicySpec, 'a', variant='FOO')

        space = StrategySpace(6, 2)
        env = make_environment(EnvironmentSpec('ADVERSARIAL_OBLIVIOUS', 6))
        self.assertRaises(ConfigError, PolicySpec('o', kind='oracle').build,
                          space, env)

class TestConfig(unittest.TestCase):

    def test_from_dict(self):

        config = ExperimentConfig.from_dict(_config())
        self.assertEqual(config.k_r, 2)
        self.assertEqual([p.name for p in config.policies], ['EMP', 'UCB'])
        self.assertEqual(config.checkpoints, [10, 100, 300])

        again = ExperimentConfig.from_dict(config.to_dict())
        self.assertEqual(again.to_dict(), config.to_dict())
        self.assertEqual(again.run_id, config.run_id)

        config = ExperimentConfig.from_dict(_config(horizon=1e3,
                                                     checkpoints=None))
        self.assertEqual(config.horizon, 1000)
        self.assertEqual(config.checkpoints[-1], 1000)

    def test_errors(self):

        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(foo=1))
        d = _config()
        del d['k_r']
        self.assertRaises(ConfigError, ExperimentConfig.from_dict, d)
        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(k_r=7))
        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(checkpoints=[10, 10]))
        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(checkpoints=[10, 400]))
        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(horizon=10.5))
        self.assertRaises(ConfigError, ExperimentConfig.from_dict,
                          _config(policies=[dict(name='a'), dict(name='a')]))

    def test_manifest_sections_ignored(self):

        d = _config(version='0.1', run_id='abc', seeds={})
        config = ExperimentConfig.from_dict(d)
        self.assertEqual(config.repetitions, 3)

    def test_overrides(self):

        d = apply_overrides(_config(), ['environment.delta=0.1',
                                        'policies.0.c=10', 'horizon=1e3',
                                        'policies.1.name=UCB1'])
        self.assertEqual(d['environment']['delta'], 0.1)
        self.assertEqual(d['policies'][0]['c'], 10)
        self.assertEqual(d['horizon'], 1000.)
        self.assertEqual(d['policies'][1]['name'], 'UCB1')
        # Input is left untouched.
        self.assertEqual(_config()['environment']['delta'], 0.2)

        self.assertRaises(ConfigError, apply_overrides, _config(), ['horizon'])
        self.assertRaises(ConfigError, apply_overrides, _config(),
                          ['policies.5.c=1'])

    def test_load(self):

        tmpdir = tempfile.mkdtemp()
        try:
            good = os.path.join(tmpdir, 'good.json')
            with open(good, 'w') as handle:
                json.dump(_config(), handle)
            config = ExperimentConfig.load(good, ['master_seed=9'])
            self.assertEqual(config.master_seed, 9)

            bad = os.path.join(tmpdir, 'bad.json')
            with open(bad, 'w') as handle:
                handle.write('{\n  "k_r": 2,\n  "horizon": \n}\n')
            with self.assertRaises(ConfigError) as cm:
                ExperimentConfig.load(bad)
            self.assertIn('bad.json:4:', str(cm.exception))

            self.assertRaises(ConfigError, ExperimentConfig.load,
                              os.path.join(tmpdir, 'missing.json'))
        finally:
            shutil.rmtree(tmpdir)

    def test_with_horizon(self):

        config = ExperimentConfig.from_dict(_config()).with_horizon(30)
        self.assertEqual(config.horizon, 30)
        self.assertEqual(config.checkpoints, [1, 10, 30])

    def test_seeds(self):

        config = ExperimentConfig.from_dict(_config())
        table = config.seed_table()
        self.assertEqual(len(table['environment']), 3)
        self.assertEqual(len(set(table['EMP'])), 3)
        self.assertNotEqual(table['EMP'], table['UCB'])

class TestRun(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.config = ExperimentConfig.from_dict(_config())
        cls.results = run_experiment(cls.config, verbose=0, mpi=False)

    def test_stats(self):

        st = self.results['EMP']
        self.assertEqual(st.repetitions, 3)
        self.assertEqual(st.metric, 'pseudo')
        np.testing.assert_array_equal(st.checkpoints, [10, 100, 300])
        self.assertEqual(st.pseudo_mean.shape, (3,))
        self.assertTrue(np.all(np.diff(st.pseudo_mean) >= 0))
        self.assertTrue(np.all(st.pseudo_std >= 0))
        self.assertTrue(st.select_time > 0)
        self.assertRaises(KeyError, self.results.__getitem__, 'foo')

    def test_repetition_invariance(self):

        # Repetition r does not depend on how many repetitions run.
        config = ExperimentConfig.from_dict(_config(repetitions=1))
        cell_a = run_single(config, 0, 0)
        cell_b = run_single(self.config, 0, 0)
        np.testing.assert_array_equal(cell_a['trace'].as_arrays()[2],
                                      cell_b['trace'].as_arrays()[2])

    def test_deterministic(self):

        again = run_experiment(self.config, verbose=0, mpi=False)
        self.assertEqual(list(again.rows()), list(self.results.rows()))

    def test_threads(self):

        par = Experiment(self.config, threads=2, mpi=False).run(verbose=0)
        self.assertEqual(list(par.rows()), list(self.results.rows()))

    def test_oracle(self):

        config = ExperimentConfig.from_dict(_config(
            policies=[dict(name='oracle', kind='oracle')]))
        res = run_experiment(config, verbose=0, mpi=False)
        np.testing.assert_array_equal(res['oracle'].pseudo_mean, 0.)

    def test_adversarial_metric(self):

        config = ExperimentConfig.from_dict(_config(
            environment=dict(regime='ADVERSARIAL_OBLIVIOUS', n=6),
            policies=[dict(name='EMP')]))
        res = run_experiment(config, verbose=0, mpi=False)
        st = res['EMP']
        self.assertEqual(st.metric, 'hindsight')
        self.assertTrue(np.all(np.isnan(st.pseudo_mean)))
        np.testing.assert_array_equal(st.regret_mean, st.hindsight_mean)

    def test_infeasible(self):

        config = ExperimentConfig.from_dict(_config(
            environment=dict(regime='STOCHASTIC', n=20),
            k_r=10, cap=1000, horizon=20, checkpoints=[20], repetitions=1,
            policies=[dict(name='EMP'),
                      dict(name='EMP-enum', method='enumerate'),
                      dict(name='EXP3', kind='exp3')]))
        with self.assertWarns(RuntimeWarning):
            res = run_experiment(config, verbose=0, mpi=False)
        self.assertEqual([st.name for st in res.stats], ['EMP'])
        self.assertEqual(sorted(res.failures), ['EMP-enum', 'EXP3'])
        self.assertIn('space too large', res.failures['EXP3'])

class TestEnvelope(unittest.TestCase):

    def test_values(self):

        env = ENVELOPES['theorem1']
        params = dict(n=8, k_r=4)
        self.assertAlmostEqual(float(env(10 ** 4, params)),
                               16. * np.sqrt(10 ** 4 * 8 * np.log(8)))
        self.assertAlmostEqual(float(env(10 ** 4, params)), 6526., delta=1.)
        self.assertEqual(float(env(0, params)), 0.)

    def test_check(self):

        config = ExperimentConfig.from_dict(_config(
            environment=dict(regime='ADVERSARIAL_OBLIVIOUS', n=6),
            policies=[dict(name='EMP')], horizon=1000,
            checkpoints=[10, 100, 1000], repetitions=2))
        st = run_experiment(config, verbose=0, mpi=False)['EMP']
        report = check_envelope(st, 'theorem1')
        self.assertTrue(report['passed'])
        self.assertEqual(len(report['rows']), 3)
        self.assertEqual(report['kind'], 'absolute')

        self.assertRaises(ValueError, check_envelope, st, 'theorem3')

    def test_order_check(self):

        config = ExperimentConfig.from_dict(_config(
            policies=[dict(name='oracle', kind='oracle')]))
        st = run_experiment(config, verbose=0, mpi=False)['oracle']
        report = check_envelope(st, 'theorem4')
        self.assertTrue(report['passed'])
        self.assertEqual(report['kind'], 'order')

class TestTiming(unittest.TestCase):

    def test_bench(self):

        rows = timing_bench([(8, 2), (10, 3), (64, 12)], rounds=20, warmup=5,
                            cap=10 ** 4)
        self.assertEqual(len(rows), 6)
        big = [r for r in rows if r['n'] == 64]
        self.assertEqual([r['status'] for r in big], ['infeasible', 'ok'])
        self.assertIsNone(big[0]['median_us'])
        self.assertTrue(big[1]['median_us'] > 0)

        a, b, r2 = fit_dp_cost(rows)
        self.assertTrue(np.isfinite(b))

class TestPersist(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_write_manifest(self):

        config = ExperimentConfig.from_dict(_config())
        fname = write_manifest(config, os.path.join(self.tmpdir, 'a', 'b'))
        with open(fname, 'rb') as handle:
            raw = handle.read()
        self.assertNotIn(b'\r', raw)
        self.assertTrue(raw.endswith(b'}\n'))
        d = json.loads(raw.decode())
        self.assertEqual(d['run_id'], config.run_id)
        self.assertEqual(ExperimentConfig.from_dict(d).run_id, config.run_id)

    def test_files(self):

        config = ExperimentConfig.from_dict(_config(packet_rate=True,
                                                    repetitions=2))
        res = run_experiment(config, verbose=0, mpi=False)
        out = os.path.join(self.tmpdir, 'run')
        files = persist_results(res, out)
        names = sorted(os.path.basename(f) for f in files)
        self.assertEqual(names, ['manifest.json', 'packet_rate.csv',
                                 'plot_results.py', 'results.csv',
                                 'timings.csv'])

        with open(os.path.join(out, 'results.csv'), 'rb') as handle:
            raw = handle.read()
        self.assertNotIn(b'\r', raw)
        lines = raw.decode().splitlines()
        self.assertEqual(lines[0].split(','), CSV_HEADER)
        self.assertEqual(len(lines), 1 + 2 * 3)
        self.assertTrue(lines[1].startswith(config.run_id + ',EMP,STOCHASTIC'))

        with open(os.path.join(out, 'manifest.json')) as handle:
            manifest = json.load(handle)
        self.assertIn('seeds', manifest)
        self.assertIn('version', manifest)

        # Running the manifest again reproduces the CSV.
        again = run_experiment(ExperimentConfig.from_dict(manifest),
                               verbose=0, mpi=False)
        out2 = os.path.join(self.tmpdir, 'again')
        persist_results(again, out2, plot_script=False)
        with open(os.path.join(out2, 'results.csv'), 'rb') as handle:
            self.assertEqual(handle.read(), raw)

        rows = packet_rate_summary(res)
        self.assertEqual(len(rows), 6)
        for row in rows:
            self.assertTrue(0. <= float(row[5]) <= 2e-3)

    def test_timing_file(self):

        rows = [dict(n=8, k_r=2, method='dp', median_us=3.5, status='ok'),
                dict(n=64, k_r=12, method='enumerate', median_us=None,
                     status='infeasible')]
        fname = persist_timing(rows, self.tmpdir)
        with open(fname) as handle:
            lines = handle.read().splitlines()
        self.assertEqual(lines[1], '8,2,dp,3.5,ok')
        self.assertEqual(lines[2], '64,12,enumerate,,infeasible')

if __name__ == '__main__':
    unittest.main()
