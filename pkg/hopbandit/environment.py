'''
Wireless channel environments. Each environment draws per-channel
losses in {0, 1} for every round and reveals to the policy only the
losses on the channels it listened to.

Randomness comes from `tools.CounterStream`, so the losses of round t
are a function of (seed, t) and of nothing the policy did, except for
the adaptive jammer, which also reads the recent strategies.
'''
from collections import namedtuple, deque
from warnings import warn

import numpy as np

from .strategy import ConfigError, Strategy
from .tools import CounterStream

REGIMES = ('STOCHASTIC', 'ADVERSARIAL_OBLIVIOUS', 'ADVERSARIAL_ADAPTIVE',
           'MIXED', 'CONTAMINATED')

# Stream identifiers sharing one environment seed.
_BERNOULLI = 0
_RELOCATE = 1
_BEST = 2
_SUBSET = 3

Feedback = namedtuple('Feedback', ['observed', 'losses', 'expected'])
Feedback.__doc__ = '''
Outcome of one round.

observed : losses on the chosen channels (ascending order)
losses   : realized losses of all n channels
expected : expected losses of all n channels, None when undefined
'''

_REQUIRED = dict(STOCHASTIC=(),
                 ADVERSARIAL_OBLIVIOUS=(),
                 ADVERSARIAL_ADAPTIVE=('memory', 'k_j'),
                 MIXED=('k_j',),
                 CONTAMINATED=('contamination',))

_OPTIONAL = dict(STOCHASTIC=(),
                 ADVERSARIAL_OBLIVIOUS=(),
                 ADVERSARIAL_ADAPTIVE=(),
                 MIXED=(),
                 CONTAMINATED=('zeta', 'switch_round'))

_REGIME_FIELDS = ('k_j', 'zeta', 'switch_round', 'memory', 'contamination')

class EnvironmentSpec(object):
    '''
    Regime tag plus the parameters that regime needs.
    '''

    def __init__(self, regime, n, delta=0.2, seed=0, k_j=None, zeta=None,
                 switch_round=None, memory=None, contamination=None):
        '''
        Arguments
        ---------
        regime : str
            One of REGIMES.
        n : int
            Number of channels.

        Keyword arguments
        -----------------
        delta : float
            Gap of the best channel, in [0, 1/2) (default : 0.2)
        seed : int
            Environment seed (default : 0)
        k_j : int, None
            Jammed channels (MIXED) or jammer size (ADAPTIVE)
        zeta : float, None
            Attacking strength, CONTAMINATED formal mode
        switch_round : int, None
            Contamination onset tau. Formal mode: default 0,
            experimental mode: round at which the best channel
            moves, default 2500.
        memory : int, None
            Jammer memory m (ADAPTIVE)
        contamination : str, None
            'formal' or 'experimental' (CONTAMINATED)
        '''

        regime = str(regime).upper()
        if regime not in REGIMES:
            raise ConfigError('Unknown regime {}, options: {}'.format(
                regime, REGIMES))
        if int(n) != n or n < 2:
            raise ConfigError('Need integer n >= 2, got {}'.format(n))
        if not 0. <= delta < 0.5:
            raise ConfigError('delta should lie in [0, 0.5), got {}'.format(
                delta))

        self.regime = regime
        self.n = int(n)
        self.delta = float(delta)
        self.seed = int(seed)
        self.k_j = k_j
        self.zeta = zeta
        self.switch_round = switch_round
        self.memory = memory
        self.contamination = contamination

        self._check_fields()

    def _check_fields(self):

        required = _REQUIRED[self.regime]
        allowed = required + _OPTIONAL[self.regime]

        for name in _REGIME_FIELDS:
            val = getattr(self, name)
            if name in required and val is None:
                raise ConfigError('{} regime requires field {}'.format(
                    self.regime, name))
            if name not in allowed and val is not None:
                raise ConfigError('field {} not used by {} regime'.format(
                    name, self.regime))

        if self.k_j is not None:
            if int(self.k_j) != self.k_j or self.k_j < 0:
                raise ConfigError('k_j should be a non-negative integer')
            if self.k_j >= self.n:
                raise ConfigError(
                    'k_j={} >= n={}: jamming all channels is the adversarial '
                    'regime'.format(self.k_j, self.n))
            self.k_j = int(self.k_j)

        if self.memory is not None:
            if int(self.memory) != self.memory or self.memory < 1:
                raise ConfigError('memory should be an integer >= 1')
            self.memory = int(self.memory)

        if self.regime != 'CONTAMINATED':
            return

        if self.contamination not in ('formal', 'experimental'):
            raise ConfigError("contamination should be 'formal' or "
                              "'experimental'")

        if self.contamination == 'formal':
            if self.zeta is None:
                raise ConfigError('formal contamination requires zeta')
            if not 0. <= self.zeta < 0.5:
                raise ConfigError(
                    'zeta={} >= 1/2: severely contaminated, no guarantee '
                    'applies'.format(self.zeta))
            if self.zeta > 0.25:
                warn('zeta={} exceeds 1/4, not moderately contaminated'.format(
                    self.zeta), RuntimeWarning)
            if self.switch_round is None:
                self.switch_round = 0
        else:
            if self.zeta is not None:
                raise ConfigError('experimental contamination takes no zeta')
            if self.switch_round is None:
                self.switch_round = 2500

        if int(self.switch_round) != self.switch_round or self.switch_round < 0:
            raise ConfigError('switch_round should be a non-negative integer')
        self.switch_round = int(self.switch_round)

    @property
    def moderate(self):
        '''True if zeta <= 1/4 (formal contamination only).'''
        return self.zeta is not None and self.zeta <= 0.25

    def replace(self, **kwargs):
        '''Copy of this spec with some fields changed.'''
        opts = self.to_dict()
        opts.update(kwargs)
        return EnvironmentSpec(**opts)

    def to_dict(self):
        opts = dict(regime=self.regime, n=self.n, delta=self.delta,
                    seed=self.seed)
        for name in _REGIME_FIELDS:
            val = getattr(self, name)
            if val is not None:
                opts[name] = val
        return opts

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError('environment: {}'.format(e))

    def __repr__(self):
        return 'EnvironmentSpec({})'.format(self.to_dict())

class Environment(object):
    '''
    Base class. Subclasses implement `step(t, chosen)`.
    '''

    def __init__(self, spec):

        self.spec = spec
        self.n = spec.n
        self.delta = spec.delta
        self._bern = _stream(spec.seed, _BERNOULLI, self.n)

    def _uniforms(self, t):
        return self._bern.row(t - 1)

    def step(self, t, chosen):
        '''
        Arguments
        ---------
        t : int
            Round index, starting at 1.
        chosen : Strategy

        Returns
        -------
        feedback : Feedback
        '''
        raise NotImplementedError

    def _feedback(self, chosen, losses, expected):
        return Feedback(losses[chosen.indices], losses, expected)

def _stream(seed, stream, width):
    return CounterStream(seed, stream, width)

def _pick(u, size):
    return min(int(u * size), size - 1)

class StochasticEnvironment(Environment):
    '''
    Bernoulli rewards with bias 0.5 on every channel except one
    best channel with bias 0.5 + delta; loss = 1 - reward.
    '''

    def __init__(self, spec):

        super(StochasticEnvironment, self).__init__(spec)

        self.best = _pick(_stream(spec.seed, _BEST, 2).row(0)[0], self.n)
        self.expected = np.full(self.n, 0.5)
        self.expected[self.best] -= self.delta

    @property
    def gaps(self):
        '''Per-channel gaps mu(f) - min mu.'''
        return self.expected - self.expected.min()

    def optimal_strategy(self, k_r):
        '''k_r channels of smallest expected loss.'''
        return Strategy(np.argsort(self.expected, kind='stable')[:k_r])

    def losses(self, t):
        '''Realized losses of round t.'''
        return (self._uniforms(t) >= 1. - self.expected).astype(float)

    def step(self, t, chosen):
        return self._feedback(chosen, self.losses(t), self.expected)

class ObliviousEnvironment(Environment):
    '''
    Oblivious jammer: Bernoulli(0.5) rewards with a best channel
    of bias 0.5 + delta_t, where the best channel index and
    delta_t ~ U[0.1, 0.3] are redrawn every two rounds. Losses are
    fixed by the seed before play.
    '''

    delta_range = (0.1, 0.3)
    period = 2

    def __init__(self, spec, channels=None):
        '''
        Keyword arguments
        -----------------
        channels : array-like, None
            Channels subject to the jammer. If None, all.
            (default : None)
        '''

        super(ObliviousEnvironment, self).__init__(spec)

        self.channels = np.arange(self.n) if channels is None else \
            np.asarray(channels, dtype=int)
        self._reloc = _stream(spec.seed, _RELOCATE, 2)

    def relocation(self, t):
        '''
        Best channel and its gap in round t.
        '''
        u = self._reloc.row((t - 1) // self.period)
        best = self.channels[_pick(u[0], self.channels.size)]
        lo, hi = self.delta_range
        return int(best), lo + (hi - lo) * u[1]

    def means(self, t):
        '''Per-round expected losses.'''
        best, delta_t = self.relocation(t)
        mu = np.full(self.n, 0.5)
        mu[best] -= delta_t
        return mu

    def losses(self, t):
        return (self._uniforms(t) >= 1. - self.means(t)).astype(float)

    def step(self, t, chosen):
        return self._feedback(chosen, self.losses(t), None)

class AdaptiveEnvironment(StochasticEnvironment):
    '''
    m-memory-bounded reactive jammer: jams the k_j channels most
    often used in the last m strategies (ties to the lower index),
    setting their loss to 1. Other channels are stochastic.
    '''

    def __init__(self, spec):

        super(AdaptiveEnvironment, self).__init__(spec)

        self.memory = spec.memory
        self.k_j = spec.k_j
        self.window = deque(maxlen=self.memory)
        self._counts = np.zeros(self.n, dtype=np.int64)

    def targets(self):
        '''Channels jammed in the coming round.'''
        if self.k_j == 0:
            return np.zeros(0, dtype=int)
        order = np.argsort(-self._counts, kind='stable')[:self.k_j]
        return np.sort(order[self._counts[order] > 0])

    def _push(self, chosen):
        if len(self.window) == self.memory:
            self._counts[self.window[0].indices] -= 1
        self.window.append(chosen)
        self._counts[chosen.indices] += 1

    def step(self, t, chosen):

        losses = self.losses(t)
        losses[self.targets()] = 1.
        self._push(chosen)

        return self._feedback(chosen, losses, None)

class MixedEnvironment(StochasticEnvironment):
    '''
    A fixed set of k_j channels, drawn once from the seed among the
    channels other than the stochastic best channel, follows the
    oblivious jammer; the rest are stochastic.
    '''

    def __init__(self, spec):

        super(MixedEnvironment, self).__init__(spec)

        others = np.delete(np.arange(self.n), self.best)
        u = _stream(spec.seed, _SUBSET, others.size).row(0)
        self.jammed = np.sort(others[np.argsort(u, kind='stable')[:spec.k_j]])
        self._jammer = ObliviousEnvironment(spec.replace(
            regime='STOCHASTIC', k_j=None), channels=self.jammed)

    @property
    def adversarial_flags(self):
        flags = np.zeros(self.n, dtype=bool)
        flags[self.jammed] = True
        return flags

    def step(self, t, chosen):

        if self.jammed.size == 0:
            return self._feedback(chosen, self.losses(t), self.expected)

        mu = self.expected.copy()
        mu[self.jammed] = self._jammer.means(t)[self.jammed]
        losses = (self._uniforms(t) >= 1. - mu).astype(float)

        return self._feedback(chosen, losses, mu)

class ContaminatedEnvironment(StochasticEnvironment):
    '''
    Stochastic channels with contamination.

    formal       : after round tau, pre-selected (t, f) locations are
                   flipped to the worst case: loss 0 on suboptimal
                   channels, loss 1 on the best channel. The number of
                   locations of channel f up to round t is
                   floor((t - tau) gap(f) zeta), with gap delta for
                   the best channel.
    experimental : the best channel moves to a different channel
                   once, at round switch_round.
    '''

    def __init__(self, spec):

        super(ContaminatedEnvironment, self).__init__(spec)

        self.mode = spec.contamination
        self.switch_round = spec.switch_round
        self.zeta = spec.zeta

        if self.mode == 'experimental':
            u = _stream(spec.seed, _BEST, 2).row(0)[1]
            self.best_after = (self.best + 1 + _pick(u, self.n - 1)) % self.n
            self.expected_after = np.full(self.n, 0.5)
            self.expected_after[self.best_after] -= self.delta
        else:
            gaps = self.gaps.copy()
            gaps[self.best] = self.delta
            self.rates = gaps * self.zeta

    def location_counts(self, t):
        '''
        Contaminated locations per channel in rounds 1..t:
        floor((t - tau) gap(f) zeta) with tau = switch_round. The
        default tau = 0 gives floor(t gap(f) zeta).
        '''
        s = max(int(t) - self.switch_round, 0)
        return np.floor(s * self.rates + 1e-9).astype(np.int64)

    def contaminated(self, t):
        '''Boolean mask of channels contaminated in round t.'''
        if t <= self.switch_round:
            return np.zeros(self.n, dtype=bool)
        return self.location_counts(t) > self.location_counts(t - 1)

    def means(self, t):
        if self.mode == 'experimental' and t >= self.switch_round:
            return self.expected_after
        return self.expected

    def step(self, t, chosen):

        mu = self.means(t)
        losses = (self._uniforms(t) >= 1. - mu).astype(float)

        if self.mode == 'formal' and self.zeta > 0:
            hit = self.contaminated(t)
            if hit.any():
                losses[hit] = 0.
                if hit[self.best]:
                    losses[self.best] = 1.

        return self._feedback(chosen, losses, mu)

_ENVIRONMENTS = dict(STOCHASTIC=StochasticEnvironment,
                     ADVERSARIAL_OBLIVIOUS=ObliviousEnvironment,
                     ADVERSARIAL_ADAPTIVE=AdaptiveEnvironment,
                     MIXED=MixedEnvironment,
                     CONTAMINATED=ContaminatedEnvironment)

def make_environment(spec):
    '''
    Instantiate the environment class of a spec's regime.
    '''
    return _ENVIRONMENTS[spec.regime](spec)
