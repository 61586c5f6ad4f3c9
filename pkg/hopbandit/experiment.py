'''
Experiment orchestration: run (policy x repetition) cells against an
environment, aggregate regret traces, check theoretical envelopes,
time the two algorithm forms and write results to disk.
'''
import os
import sys
import json
import csv
import copy
import time
import hashlib
from warnings import warn
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .strategy import (StrategySpace, RegretTrace, ConfigError,
                       SpaceTooLargeError, hindsight_best,
                       pseudo_regret_update)
from .environment import EnvironmentSpec, make_environment
from .policy import AUFHExp3, Schedule
from .baselines import (CombUCB1, ThompsonSampling, AntiJamExp3,
                        OraclePolicy, MiniBatch)
from . import tools

STOCHASTIC_TYPE = ('STOCHASTIC', 'MIXED', 'CONTAMINATED')

class MPIBase(object):
    '''
    Splits experiment cells over MPI ranks when the job was started
    under mpirun and mpi4py imports; a single rank otherwise.
    '''

    def __init__(self, mpi=True, comm=None, **kwargs):
        '''
        Keyword arguments
        -----------------
        mpi : bool
            Allow MPI. It is only used if an Open MPI or MPICH
            launcher variable is set (default : True)
        comm : MPI communicator, None
            If None, MPI.COMM_WORLD (default : None)
        '''

        super(MPIBase, self).__init__(**kwargs)

        self.mpi = False
        self._comm = None
        launched = os.getenv('OMPI_COMM_WORLD_SIZE') or os.getenv('PMI_SIZE')
        if not (mpi and launched):
            return

        try:
            from mpi4py import MPI
        except ImportError:
            warn('mpi4py not importable, running cells on a single rank',
                 RuntimeWarning)
            return

        self.mpi = True
        self._comm = comm if comm is not None else MPI.COMM_WORLD

    @property
    def mpi_rank(self):
        return self._comm.Get_rank() if self.mpi else 0

    @property
    def mpi_size(self):
        return self._comm.Get_size() if self.mpi else 1

    def barrier(self):
        if self.mpi:
            self._comm.Barrier()

    def distribute_array(self, cells):
        '''
        Contiguous share of cells for this rank, the first
        len(cells) % mpi_size ranks taking one extra cell.
        '''

        if not self.mpi:
            return cells

        quot, rem = divmod(len(cells), self.mpi_size)
        rank = self.mpi_rank
        start = rank * quot + min(rank, rem)
        return cells[start:start + quot + (rank < rem)]

    def gather_list(self, list_loc):
        '''
        Concatenate the local lists of all ranks, in rank order,
        on every rank.
        '''

        if not self.mpi:
            return list_loc

        gathered = self._comm.allgather(list_loc)
        return [item for sub in gathered for item in sub]

class PolicySpec(object):
    '''
    Named policy description: kind plus kind-specific options.

    Kinds and options:
        aufh     : variant, c, xi_form, eta_override, known_gaps
                   (array or 'environment'), method ('dp' or
                   'enumerate')
        combucb1 : -
        thompson : -
        exp3     : -
        oracle   : - (stochastic-type environments only)
    All kinds accept minibatch: int tau, 'auto' (tau from the
    horizon) or 'doubling'.
    '''

    KINDS = ('aufh', 'combucb1', 'thompson', 'exp3', 'oracle')
    _AUFH_OPTS = ('variant', 'c', 'xi_form', 'eta_override', 'known_gaps',
                  'method')

    def __init__(self, name, kind='aufh', **options):

        if kind not in self.KINDS:
            raise ConfigError('Unknown policy kind {}, options: {}'.format(
                kind, self.KINDS))

        allowed = ('minibatch',)
        if kind == 'aufh':
            allowed = allowed + self._AUFH_OPTS
        for key in options:
            if key not in allowed:
                raise ConfigError('policy {}: option {} not used by kind '
                                  '{}'.format(name, key, kind))

        mb = options.get('minibatch')
        if mb is not None and mb not in ('auto', 'doubling') and \
                not (isinstance(mb, (int, np.integer)) and mb >= 1):
            raise ConfigError("policy {}: minibatch should be an integer >= 1,"
                              " 'auto' or 'doubling'".format(name))

        self.name = str(name)
        self.kind = kind
        self.options = options

        if kind == 'aufh':
            # Validate eagerly.
            self.schedule()

    def schedule(self, env=None):
        '''
        Schedule of an aufh policy. known_gaps='environment' is
        resolved from env.
        '''

        opts = dict((k, v) for k, v in self.options.items()
                    if k in ('variant', 'c', 'xi_form', 'eta_override',
                             'known_gaps'))
        gaps = opts.get('known_gaps')
        if isinstance(gaps, str):
            if gaps != 'environment':
                raise ConfigError("known_gaps should be a list or "
                                  "'environment'")
            if env is None:
                opts['known_gaps'] = None
            elif not hasattr(env, 'gaps'):
                raise ConfigError('policy {}: environment {} has no known '
                                  'gaps'.format(self.name, env.spec.regime))
            else:
                opts['known_gaps'] = env.gaps
        return Schedule(**opts)

    def build(self, space, env, horizon=None, cap=10**6):
        '''
        Instantiate the policy for one run.

        Arguments
        ---------
        space : StrategySpace
        env : Environment

        Keyword arguments
        -----------------
        horizon : int, None
            Used by minibatch='auto' (default : None)
        cap : int
            Enumeration cap (default : 10**6)
        '''

        def factory():
            if self.kind == 'aufh':
                return AUFHExp3(space, self.schedule(env),
                                method=self.options.get('method', 'dp'),
                                cap=cap)
            if self.kind == 'combucb1':
                return CombUCB1(space)
            if self.kind == 'thompson':
                return ThompsonSampling(space)
            if self.kind == 'exp3':
                return AntiJamExp3(space, cap=cap)
            if not hasattr(env, 'optimal_strategy'):
                raise ConfigError('oracle policy needs a stochastic '
                                  'environment')
            return OraclePolicy(env.optimal_strategy(space.k_r))

        mb = self.options.get('minibatch')
        if mb is None:
            return factory()
        if mb == 'doubling':
            return MiniBatch(factory, space)
        if mb == 'auto':
            return MiniBatch(factory, space, horizon=horizon)
        return MiniBatch(factory, space, tau=int(mb))

    def to_dict(self):
        opts = dict(name=self.name, kind=self.kind)
        for key, val in self.options.items():
            if isinstance(val, np.ndarray):
                val = val.tolist()
            opts[key] = val
        return opts

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        try:
            name = d.pop('name')
        except KeyError:
            raise ConfigError('policy entry without name: {}'.format(d))
        return cls(name, **d)

    def __repr__(self):
        return 'PolicySpec({})'.format(self.to_dict())

class ExperimentConfig(object):
    '''
    Full description of one experiment.
    '''

    _KEYS = ('environment', 'policies', 'k_r', 'horizon', 'repetitions',
             'checkpoints', 'master_seed', 'cap', 'packet_rate')
    _DERIVED = ('version', 'run_id', 'seeds')

    def __init__(self, environment, policies, k_r, horizon, repetitions=10,
                 checkpoints=None, master_seed=0, cap=10**6,
                 packet_rate=False):
        '''
        Arguments
        ---------
        environment : EnvironmentSpec
        policies : list of PolicySpec
        k_r : int
        horizon : int

        Keyword arguments
        -----------------
        repetitions : int
            (default : 10)
        checkpoints : list of int, None
            If None, log-spaced with 10 per decade (default : None)
        master_seed : int
            (default : 0)
        cap : int
            Enumeration cap (default : 10**6)
        packet_rate : bool
            Also write the received-packet rate summary
            (default : False)
        '''

        self.environment = environment
        self.policies = list(policies)
        self.k_r = _as_int(k_r, 'k_r')
        self.horizon = _as_int(horizon, 'horizon')
        self.repetitions = _as_int(repetitions, 'repetitions')
        self.master_seed = _as_int(master_seed, 'master_seed')
        self.cap = _as_int(cap, 'cap')
        self.packet_rate = bool(packet_rate)

        if self.repetitions < 1:
            raise ConfigError('repetitions should be >= 1')
        if self.horizon < 1:
            raise ConfigError('horizon should be >= 1')
        if not 1 <= self.k_r <= environment.n:
            raise ConfigError('Need 1 <= k_r <= n')
        if not self.policies:
            raise ConfigError('Need at least one policy')
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ConfigError('Policy names should be unique: {}'.format(
                names))

        if checkpoints is None:
            checkpoints = tools.log_checkpoints(self.horizon)
        checkpoints = [_as_int(c, 'checkpoints') for c in checkpoints]
        if any(b <= a for a, b in zip(checkpoints[:-1], checkpoints[1:])):
            raise ConfigError('checkpoints should be strictly increasing')
        if not checkpoints or checkpoints[0] < 1 or \
                checkpoints[-1] > self.horizon:
            raise ConfigError('checkpoints should lie in [1, horizon]')
        self.checkpoints = checkpoints

    @property
    def space(self):
        return StrategySpace(self.environment.n, self.k_r)

    def environment_seed(self, rep):
        return tools.derive_seed(self.master_seed, 'environment',
                                 self.environment.seed, rep)

    def policy_seed(self, name, rep):
        return tools.derive_seed(self.master_seed, 'policy', name, rep)

    def seed_table(self):
        '''Derived seeds of all repetitions, for the manifest.'''
        table = dict(environment=[self.environment_seed(r)
                                  for r in range(self.repetitions)])
        for p in self.policies:
            table[p.name] = [self.policy_seed(p.name, r)
                             for r in range(self.repetitions)]
        return table

    def with_horizon(self, horizon):
        '''
        Copy with a new horizon; checkpoints are scaled
        proportionally.
        '''
        d = self.to_dict()
        d['checkpoints'] = tools.scale_checkpoints(self.checkpoints,
                                                   self.horizon, horizon)
        d['horizon'] = int(horizon)
        return ExperimentConfig.from_dict(d)

    def to_dict(self):
        return dict(environment=self.environment.to_dict(),
                    policies=[p.to_dict() for p in self.policies],
                    k_r=self.k_r, horizon=self.horizon,
                    repetitions=self.repetitions,
                    checkpoints=list(self.checkpoints),
                    master_seed=self.master_seed, cap=self.cap,
                    packet_rate=self.packet_rate)

    @property
    def run_id(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_dict(cls, d):
        '''
        Build a config from a (JSON-like) dictionary. Derived manifest
        sections are ignored.
        '''

        d = dict(d)
        for key in cls._DERIVED:
            d.pop(key, None)
        for key in d:
            if key not in cls._KEYS:
                raise ConfigError('Unknown config key: {}'.format(key))
        for key in ('environment', 'policies', 'k_r', 'horizon'):
            if key not in d:
                raise ConfigError('Missing config key: {}'.format(key))

        if not isinstance(d['environment'], dict):
            raise ConfigError('environment should be a mapping')
        if not isinstance(d['policies'], list):
            raise ConfigError('policies should be a list')

        d['environment'] = EnvironmentSpec.from_dict(d['environment'])
        d['policies'] = [PolicySpec.from_dict(p) for p in d['policies']]

        return cls(**d)

    @classmethod
    def load(cls, filename, overrides=None):
        '''
        Read a JSON config file and apply dotted key=value overrides.

        Arguments
        ---------
        filename : str

        Keyword arguments
        -----------------
        overrides : list of str, None
            e.g. ['environment.delta=0.1', 'policies.0.c=10']
            (default : None)
        '''

        d = read_json(filename)

        if overrides:
            d = apply_overrides(d, overrides)

        return cls.from_dict(d)

    def __repr__(self):
        return 'ExperimentConfig({})'.format(self.to_dict())

def read_json(filename):
    '''
    Read a JSON document; parse errors are reported as ConfigError
    with line and column.
    '''
    try:
        with open(filename, 'r') as handle:
            return json.load(handle)
    except IOError as e:
        raise ConfigError('Cannot read config {}: {}'.format(filename, e))
    except ValueError as e:
        raise ConfigError('{}:{}:{}: {}'.format(
            filename, getattr(e, 'lineno', '?'), getattr(e, 'colno', '?'),
            getattr(e, 'msg', e)))

def _as_int(val, name):
    try:
        fval = float(val)
    except (TypeError, ValueError):
        raise ConfigError('{} should be an integer, got {!r}'.format(name, val))
    if fval != int(fval):
        raise ConfigError('{} should be an integer, got {!r}'.format(name, val))
    return int(fval)

def parse_value(text):
    '''Parse an override value as JSON, falling back to a string.'''
    try:
        return json.loads(text)
    except ValueError:
        return text

def apply_overrides(d, overrides):
    '''
    Apply dotted key=value overrides to a nested dictionary.
    Integer path components index into lists.

    Arguments
    ---------
    d : dict
    overrides : list of str

    Returns
    -------
    d_new : dict
        Modified deep copy.
    '''

    d = copy.deepcopy(d)

    for item in overrides:
        if '=' not in item:
            raise ConfigError('Override {!r} is not of form key=value'.format(
                item))
        key, text = item.split('=', 1)
        path = key.strip().split('.')
        node = d
        for part in path[:-1]:
            try:
                node = node[int(part)] if isinstance(node, list) else \
                    node.setdefault(part, {})
            except (IndexError, ValueError):
                raise ConfigError('Override {!r}: no element {}'.format(
                    item, part))
        last = path[-1]
        if isinstance(node, list):
            try:
                node[int(last)] = parse_value(text)
            except (IndexError, ValueError):
                raise ConfigError('Override {!r}: no element {}'.format(
                    item, last))
        else:
            node[last] = parse_value(text)

    return d

def run_single(config, pidx, rep):
    '''
    Run one policy for one repetition.

    Arguments
    ---------
    config : ExperimentConfig
    pidx : int
        Index into config.policies.
    rep : int

    Returns
    -------
    cell : dict
        policy, repetition, trace (RegretTrace), select_time and
        update_time (seconds, summed over rounds).
    '''

    pspec = config.policies[pidx]
    space = config.space
    env_spec = config.environment.replace(seed=config.environment_seed(rep))
    env = make_environment(env_spec)
    policy = pspec.build(space, env, horizon=config.horizon, cap=config.cap)
    rng = np.random.default_rng(config.policy_seed(pspec.name, rep))

    trace = RegretTrace(policy=pspec.name, environment=env_spec.regime,
                        repetition=rep)
    totals = np.zeros(space.n)
    cum_loss = 0.
    sel_time = 0.
    upd_time = 0.
    cps = config.checkpoints
    cidx = 0
    k_r = space.k_r

    perf = time.perf_counter
    for t in range(1, config.horizon + 1):

        t0 = perf()
        chosen = policy.select(rng)
        t1 = perf()
        fb = env.step(t, chosen)
        t2 = perf()
        policy.update(chosen, fb.observed)
        t3 = perf()

        sel_time += t1 - t0
        upd_time += t3 - t2

        totals += fb.losses
        cum_loss += fb.observed.sum()
        if fb.expected is None:
            trace.pseudo = np.nan
        else:
            pseudo_regret_update(trace, t, chosen, fb.expected)

        if t == cps[cidx]:
            best = hindsight_best(totals, k_r)[1]
            trace.record(t, cum_loss - best, cumulative_loss=cum_loss)
            cidx += 1
            if cidx == len(cps):
                break

    return dict(policy=pspec.name, pidx=pidx, repetition=rep, trace=trace,
                select_time=sel_time, update_time=upd_time,
                rounds=config.horizon)

def _run_cell(config_dict, pidx, rep):
    # Process-pool entry point, configs travel as plain dicts.
    return run_single(ExperimentConfig.from_dict(config_dict), pidx, rep)

class PolicyStats(object):
    '''
    Regret statistics of one policy over repetitions.
    '''

    def __init__(self, name, regime, params, traces, select_time=np.nan,
                 update_time=np.nan):
        '''
        Arguments
        ---------
        name : str
        regime : str
        params : dict
            n, k_r, delta, memory, zeta used by envelopes.
        traces : list of RegretTrace
            One per repetition, in repetition order.

        Keyword arguments
        -----------------
        select_time, update_time : float
            Mean wall-clock seconds per round.
        '''

        self.name = name
        self.regime = regime
        self.params = params
        self.traces = traces
        self.select_time = select_time
        self.update_time = update_time

        arrs = [tr.as_arrays() for tr in traces]
        self.checkpoints = arrs[0][0]
        pseudo = np.array([a[1] for a in arrs])
        hind = np.array([a[2] for a in arrs])
        loss = np.array([a[3] for a in arrs])

        self.pseudo_mean = pseudo.mean(axis=0)
        self.pseudo_std = pseudo.std(axis=0)
        self.hindsight_mean = hind.mean(axis=0)
        self.hindsight_std = hind.std(axis=0)
        self.loss = loss

        if regime in STOCHASTIC_TYPE:
            self.metric = 'pseudo'
            self.regret_mean, self.regret_std = self.pseudo_mean, \
                self.pseudo_std
        else:
            # Adaptive jammers are scored against the best fixed
            # strategy on the realized sequence.
            self.metric = 'hindsight' if regime == 'ADVERSARIAL_OBLIVIOUS' \
                else 'hindsight_fixed'
            self.regret_mean, self.regret_std = self.hindsight_mean, \
                self.hindsight_std

    @property
    def repetitions(self):
        return len(self.traces)

class ExperimentResults(object):
    '''
    Aggregated output of an experiment.
    '''

    def __init__(self, config, stats, failures=None):
        '''
        Arguments
        ---------
        config : ExperimentConfig
        stats : list of PolicyStats
            In config.policies order, infeasible policies omitted.

        Keyword arguments
        -----------------
        failures : dict, None
            Policy name -> reason for policies that could not run.
        '''
        self.config = config
        self.stats = stats
        self.failures = {} if failures is None else failures

    def __getitem__(self, name):
        for st in self.stats:
            if st.name == name:
                return st
        raise KeyError(name)

    def rows(self):
        '''
        Rows of the results CSV, one per (policy, checkpoint).
        '''

        cfg = self.config
        run_id = cfg.run_id
        for st in self.stats:
            for j, t in enumerate(st.checkpoints):
                yield [run_id, st.name, st.regime, cfg.environment.n,
                       cfg.k_r, int(t), _fmt(st.regret_mean[j]),
                       _fmt(st.regret_std[j]), st.metric,
                       _fmt(st.pseudo_mean[j]), _fmt(st.pseudo_std[j]),
                       _fmt(st.hindsight_mean[j]), _fmt(st.hindsight_std[j])]

CSV_HEADER = ['run_id', 'policy', 'regime', 'n', 'k_r', 'checkpoint',
              'regret_mean', 'regret_std', 'metric', 'pseudo_mean',
              'pseudo_std', 'hindsight_mean', 'hindsight_std']

def _fmt(x):
    return '{:.12g}'.format(float(x))

class Experiment(MPIBase):
    '''
    Runs all (policy, repetition) cells of a config, distributed
    over MPI ranks or local worker processes.
    '''

    def __init__(self, config, threads=1, **kwargs):
        '''
        Arguments
        ---------
        config : ExperimentConfig

        Keyword arguments
        -----------------
        threads : int
            Local worker processes when not using MPI (default : 1)
        kwargs : {mpi_opts}
        '''

        self.config = config
        self.threads = max(1, int(threads))

        super(Experiment, self).__init__(**kwargs)

    def feasible_policies(self):
        '''
        Indices of policies that can be built for this space, and
        reasons for those that cannot.
        '''

        cfg = self.config
        env = make_environment(cfg.environment)
        ok = []
        failures = {}
        for pidx, pspec in enumerate(cfg.policies):
            try:
                pspec.build(cfg.space, env, horizon=cfg.horizon, cap=cfg.cap)
                ok.append(pidx)
            except SpaceTooLargeError as e:
                warn('policy {} infeasible: {}'.format(pspec.name, e),
                     RuntimeWarning)
                failures[pspec.name] = str(e)

        return ok, failures

    def run(self, verbose=1):
        '''
        Keyword arguments
        -----------------
        verbose : int
            Prints status reports (0 : nothing, 1: some,
            2: all) (default : 1)

        Returns
        -------
        results : ExperimentResults
        '''

        cfg = self.config
        pidxs, failures = self.feasible_policies()
        cells = [(p, r) for p in pidxs for r in range(cfg.repetitions)]

        if verbose and self.mpi_rank == 0:
            print('Running {:d} cells: {} regime, n={}, k_r={}, horizon={}'.format(
                len(cells), cfg.environment.regime, cfg.environment.n,
                cfg.k_r, cfg.horizon))
            sys.stdout.flush()
        self.barrier()

        cells_loc = self.distribute_array(cells)

        if self.threads > 1 and not self.mpi and len(cells_loc) > 1:
            cdict = cfg.to_dict()
            with ProcessPoolExecutor(max_workers=self.threads) as pool:
                futures = [pool.submit(_run_cell, cdict, p, r)
                           for p, r in cells_loc]
                out_loc = []
                for (p, r), fut in zip(cells_loc, futures):
                    out_loc.append(fut.result())
                    if verbose == 2:
                        print('[rank {:03d}]: done {} rep {:d}'.format(
                            self.mpi_rank, cfg.policies[p].name, r))
        else:
            out_loc = []
            for p, r in cells_loc:
                if verbose:
                    print('[rank {:03d}]: working on: {}, rep {:d}'.format(
                        self.mpi_rank, cfg.policies[p].name, r))
                out_loc.append(run_single(cfg, p, r))

        out = self.gather_list(out_loc)
        out.sort(key=lambda c: (c['pidx'], c['repetition']))

        return self.aggregate(out, pidxs, failures)

    def aggregate(self, cells, pidxs, failures):

        cfg = self.config
        env = cfg.environment
        params = dict(n=env.n, k_r=cfg.k_r, delta=env.delta,
                      memory=env.memory, zeta=env.zeta, k_j=env.k_j)
        stats = []
        for pidx in pidxs:
            mine = [c for c in cells if c['pidx'] == pidx]
            rounds = float(sum(c['rounds'] for c in mine))
            stats.append(PolicyStats(
                cfg.policies[pidx].name, env.regime, params,
                [c['trace'] for c in mine],
                select_time=sum(c['select_time'] for c in mine) / rounds,
                update_time=sum(c['update_time'] for c in mine) / rounds))

        return ExperimentResults(cfg, stats, failures=failures)

def run_experiment(config, threads=1, verbose=1, **kwargs):
    '''
    Run an experiment and return its ExperimentResults.
    '''
    return Experiment(config, threads=threads, **kwargs).run(verbose=verbose)

class BoundEnvelope(object):
    '''
    Regret bound as a function of t and the problem parameters.
    Absolute envelopes are compared directly with the mean regret;
    order envelopes only give the shape, checked through the trend
    of regret / shape.
    '''

    def __init__(self, tag, bound, regimes, kind='order'):
        '''
        Arguments
        ---------
        tag : str
        bound : callable
            bound(t, params) -> float array, params a dict with n,
            k_r, delta, memory, zeta, k_j.
        regimes : tuple of str
        kind : str
            'absolute' or 'order' (default : order)
        '''
        self.tag = tag
        self.bound = bound
        self.regimes = tuple(regimes)
        self.kind = kind

    def __call__(self, t, params):
        return self.bound(np.asarray(t, dtype=float), params)

def _log(t):
    return np.log(np.maximum(t, 1.))

ENVELOPES = dict(
    theorem1=BoundEnvelope(
        'theorem1',
        lambda t, p: 4. * p['k_r'] * np.sqrt(t * p['n'] * np.log(p['n'])),
        ('ADVERSARIAL_OBLIVIOUS', 'STOCHASTIC', 'MIXED', 'CONTAMINATED'),
        kind='absolute'),
    theorem2=BoundEnvelope(
        'theorem2',
        lambda t, p: (p['memory'] + 1) * (4. * p['k_r'] * np.sqrt(
            p['n'] * np.log(p['n']))) ** (2. / 3) * t ** (2. / 3),
        ('ADVERSARIAL_ADAPTIVE',)),
    theorem3=BoundEnvelope(
        'theorem3',
        lambda t, p: (p['n'] - 1) * p['k_r'] * _log(t) ** 2 / p['delta'],
        ('STOCHASTIC',)),
    theorem4=BoundEnvelope(
        'theorem4',
        lambda t, p: (p['n'] - 1) * p['k_r'] * _log(t) ** 3 / p['delta'],
        ('STOCHASTIC',)),
    theorem5=BoundEnvelope(
        'theorem5',
        lambda t, p: (p['n'] - (p['k_j'] or 0)) * p['k_r'] * _log(t) ** 3
        / p['delta'],
        ('MIXED',)),
    theorem6=BoundEnvelope(
        'theorem6',
        lambda t, p: (p['n'] - (p['k_j'] or 0)) * p['k_r'] * _log(t) ** 3
        / p['delta'],
        ('MIXED',)),
    theorem7=BoundEnvelope(
        'theorem7',
        lambda t, p: p['n'] * p['k_r'] * _log(t) ** 3
        / ((1. - 2. * (p['zeta'] or 0.)) * p['delta']),
        ('CONTAMINATED',)),
)

def check_envelope(stats, envelope, last=5):
    '''
    Compare mean regret with a bound envelope.

    Arguments
    ---------
    stats : PolicyStats
    envelope : BoundEnvelope or str
        Envelope or key of ENVELOPES.

    Keyword arguments
    -----------------
    last : int
        Checkpoints used by order checks (default : 5)

    Returns
    -------
    report : dict
        tag, kind, rows (list of (t, mean, bound, passed)),
        slope (order checks), passed.
    '''

    if isinstance(envelope, str):
        envelope = ENVELOPES[envelope]

    if stats.regime not in envelope.regimes:
        raise ValueError('envelope {} refused for regime {}'.format(
            envelope.tag, stats.regime))

    t = stats.checkpoints.astype(float)
    mean = stats.regret_mean
    bound = envelope(t, stats.params)

    report = dict(tag=envelope.tag, kind=envelope.kind, slope=None)

    if envelope.kind == 'absolute':
        ok = mean <= bound
        report['rows'] = [(int(a), float(b), float(c), bool(d))
                          for a, b, c, d in zip(t, mean, bound, ok)]
        report['passed'] = bool(np.all(ok))
        return report

    sel = np.flatnonzero(bound > 0)[-last:]
    ratio = mean[sel] / bound[sel]
    noise = stats.regret_std[sel] / bound[sel]
    if sel.size >= 2:
        slope = np.polyfit(np.log(t[sel]), ratio, 1)[0]
        rise = slope * (np.log(t[sel[-1]]) - np.log(t[sel[0]]))
    else:
        slope, rise = 0., 0.

    report['slope'] = float(slope)
    report['rows'] = [(int(t[j]), float(mean[j]), float(bound[j]),
                       bool(rise <= noise.max() + 1e-12))
                      for j in sel]
    report['passed'] = bool(rise <= noise.max() + 1e-12) if sel.size else True

    return report

def timing_bench(grid, schedule=None, rounds=1000, warmup=100, cap=10**6,
                 methods=('enumerate', 'dp'), seed=0, verbose=0):
    '''
    Median per-round (select + update) wall-clock time of
    AUFH-EXP3++ on a stochastic environment.

    Arguments
    ---------
    grid : list of (n, k_r)

    Keyword arguments
    -----------------
    schedule : Schedule, None
        If None, Schedule.emp() (default : None)
    rounds : int
        Timed rounds after warm-up (default : 1000)
    warmup : int
        Untimed rounds, also triggers numba compilation
        (default : 100)
    cap : int
        Enumeration cap, larger spaces are reported infeasible
        (default : 10**6)
    methods : tuple of str
        (default : ('enumerate', 'dp'))
    seed : int
        (default : 0)
    verbose : int
        (default : 0)

    Returns
    -------
    rows : list of dict
        n, k_r, method, median_us (None if infeasible), status.
    '''

    rows = []
    for n, k_r in grid:
        space = StrategySpace(n, k_r)
        env = make_environment(EnvironmentSpec('STOCHASTIC', n, seed=seed))
        for method in methods:
            sched = Schedule.emp() if schedule is None else schedule
            try:
                policy = AUFHExp3(space, sched, method=method, cap=cap)
            except SpaceTooLargeError:
                rows.append(dict(n=n, k_r=k_r, method=method, median_us=None,
                                 status='infeasible'))
                if verbose:
                    print('({}, {}) {}: infeasible'.format(n, k_r, method))
                continue

            rng = np.random.default_rng(seed)
            times = np.empty(rounds)
            for t in range(1, warmup + rounds + 1):
                t0 = time.perf_counter()
                chosen = policy.select(rng)
                t1 = time.perf_counter()
                fb = env.step(t, chosen)
                t2 = time.perf_counter()
                policy.update(chosen, fb.observed)
                t3 = time.perf_counter()
                if t > warmup:
                    times[t - warmup - 1] = (t1 - t0) + (t3 - t2)

            med = float(np.median(times)) * 1e6
            rows.append(dict(n=n, k_r=k_r, method=method, median_us=med,
                             status='ok'))
            if verbose:
                print('({}, {}) {}: {:.1f} us'.format(n, k_r, method, med))
                sys.stdout.flush()

    return rows

def fit_dp_cost(rows, method='dp'):
    '''
    Fit median time = a + b n k_r over the rows of one method.

    Returns
    -------
    a, b, r2 : float
    '''
    sel = [r for r in rows if r['method'] == method and r['status'] == 'ok']
    x = [r['n'] * r['k_r'] for r in sel]
    y = [r['median_us'] for r in sel]
    if len(set(x)) < 2:
        return np.nan, np.nan, np.nan
    return tools.linear_fit(x, y)

def write_csv(filename, header, rows):
    with open(filename, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)

def persist_timing(rows, path):
    '''Write timing_bench rows to <path>/timing.csv.'''
    if not os.path.isdir(path):
        os.makedirs(path)
    filename = os.path.join(path, 'timing.csv')
    write_csv(filename, ['n', 'k_r', 'method', 'median_us', 'status'],
              [[r['n'], r['k_r'], r['method'],
                '' if r['median_us'] is None else _fmt(r['median_us']),
                r['status']] for r in rows])
    return filename

def packet_rate_summary(results, bits_per_packet=1000, slot_duration=1.):
    '''
    Received data rate (Mbps) per policy and checkpoint, mean and
    std over repetitions.

    Returns
    -------
    rows : list of list
        policy, regime, n, k_r, checkpoint, rate_mean, rate_std
    '''

    cfg = results.config
    rows = []
    for st in results.stats:
        rate = tools.packet_rate(st.loss, st.checkpoints[None, :], cfg.k_r,
                                 bits_per_packet=bits_per_packet,
                                 slot_duration=slot_duration)
        for j, t in enumerate(st.checkpoints):
            rows.append([st.name, st.regime, cfg.environment.n, cfg.k_r,
                         int(t), _fmt(rate[:, j].mean()),
                         _fmt(rate[:, j].std())])
    return rows

PLOT_SCRIPT = """\
'''
Plot mean (solid) and mean + std (dashed) regret from results.csv.
Usage: python plot_results.py [output_dir]
'''
import os
import sys
from hopbandit.plot_tools import plot_regret_csv

here = os.path.dirname(os.path.abspath(__file__))
out = sys.argv[1] if len(sys.argv) > 1 else here
plot_regret_csv(os.path.join(here, 'results.csv'), out, 'regret')
"""

def manifest(config):
    '''Resolved config plus version, run id and derived seeds.'''
    from . import __version__

    d = config.to_dict()
    d['version'] = __version__
    d['run_id'] = config.run_id
    d['seeds'] = config.seed_table()
    return d

def write_manifest(config, path):
    '''
    Write manifest.json (config plus version, run id and seeds) to
    path, creating the directory if needed.

    Returns
    -------
    filename : str
    '''

    if not os.path.isdir(path):
        os.makedirs(path)
    fname = os.path.join(path, 'manifest.json')
    with open(fname, 'w', newline='\n') as handle:
        json.dump(manifest(config), handle, indent=2, sort_keys=True)
        handle.write('\n')
    return fname

def persist_results(results, path, plot_script=True):
    '''
    Write results.csv, manifest.json, timings.csv and, optionally,
    packet_rate.csv and a plot script.

    Arguments
    ---------
    results : ExperimentResults
    path : str
        Output directory, created if needed.

    Keyword arguments
    -----------------
    plot_script : bool
        Also write plot_results.py (default : True)

    Returns
    -------
    files : list of str
    '''

    try:
        if not os.path.isdir(path):
            os.makedirs(path)
    except OSError as e:
        raise IOError('Cannot create output directory {}: {}'.format(path, e))

    files = []
    opj = os.path.join

    fname = opj(path, 'results.csv')
    write_csv(fname, CSV_HEADER, results.rows())
    files.append(fname)

    files.append(write_manifest(results.config, path))

    fname = opj(path, 'timings.csv')
    write_csv(fname, ['policy', 'select_us', 'update_us'],
              [[st.name, _fmt(st.select_time * 1e6),
                _fmt(st.update_time * 1e6)] for st in results.stats])
    files.append(fname)

    if results.config.packet_rate:
        fname = opj(path, 'packet_rate.csv')
        write_csv(fname, ['policy', 'regime', 'n', 'k_r', 'checkpoint',
                          'rate_mbps_mean', 'rate_mbps_std'],
                  packet_rate_summary(results))
        files.append(fname)

    if plot_script:
        fname = opj(path, 'plot_results.py')
        with open(fname, 'w') as handle:
            handle.write(PLOT_SCRIPT)
        files.append(fname)

    return files
