'''
Comparison policies: CombUCB1, combinatorial Thompson sampling,
EXP3 over the enumerated strategy set (Anti-Jam-EXP3), an oracle,
and the mini-batch wrapper that turns any policy into one that
changes its strategy only every tau rounds.

All policies share the protocol of `policy.AUFHExp3`:
select(rng) -> Strategy, update(chosen, losses). Baselines work on
rewards g = 1 - loss internally.
'''
import numpy as np
from scipy.special import logsumexp

from .strategy import Strategy, build_covering_set
from . import tools

def top_k(index, k_r):
    '''
    The k_r channels with the largest index values, ties broken
    towards the lower channel index.
    '''
    return Strategy(np.argsort(-np.asarray(index), kind='stable')[:k_r])

class CombUCB1(object):
    '''
    CombUCB1: after one sweep over the covering set, play the k_r
    channels maximizing mean reward + sqrt(1.5 ln t / T(f)).
    '''

    radius = 1.5

    def __init__(self, space, covering=None):

        self.space = space
        self.covering = build_covering_set(space) if covering is None \
            else covering
        self.counts = np.zeros(space.n, dtype=np.int64)
        self.reward_sums = np.zeros(space.n)
        self.t = 0

    @property
    def means(self):
        with np.errstate(invalid='ignore', divide='ignore'):
            return self.reward_sums / self.counts

    def index(self, t):
        '''UCB index of all channels at round t.'''
        return self.means + np.sqrt(self.radius * np.log(t) / self.counts)

    def select(self, rng=None):

        t = self.t + 1
        if t <= len(self.covering):
            return self.covering.blocks[t - 1]

        return top_k(self.index(t), self.space.k_r)

    def update(self, chosen, losses):

        idx = chosen.indices
        self.counts[idx] += 1
        self.reward_sums[idx] += 1. - np.asarray(losses, dtype=float)
        self.t += 1

class ThompsonSampling(object):
    '''
    Combinatorial Thompson sampling with Beta(1, 1) priors: draw
    theta(f) ~ Beta(alpha(f), beta(f)) and play the top k_r.
    '''

    def __init__(self, space):

        self.space = space
        self.alpha = np.ones(space.n)
        self.beta = np.ones(space.n)

    def select(self, rng):
        theta = rng.beta(self.alpha, self.beta)
        return top_k(theta, self.space.k_r)

    def update(self, chosen, losses):

        rewards = 1. - np.asarray(losses, dtype=float)
        idx = chosen.indices
        self.alpha[idx] += rewards
        self.beta[idx] += 1. - rewards

class AntiJamExp3(object):
    '''
    EXP3 over all N strategies, without sharing information between
    strategies with common channels. Mixes in uniform exploration
    gamma_t = min{1, sqrt(N ln N / ((e - 1) t))} and uses learning
    rate gamma_t / N on the strategy loss (normalized by k_r).
    '''

    def __init__(self, space, cap=10**6):

        self.space = space
        self.strategies = space.strategy_matrix(cap)
        self.N = self.strategies.shape[0]
        self.log_weights = np.zeros(self.N)
        self.t = 0
        self._p = None
        self._idx = None

    def gamma(self, t):
        if self.N == 1:
            return 1.
        return min(1., np.sqrt(self.N * np.log(self.N) / ((np.e - 1.) * t)))

    def probabilities(self, t=None):
        '''Strategy distribution of round t (default: next round).'''
        t = self.t + 1 if t is None else t
        gamma = self.gamma(t)
        w = np.exp(self.log_weights - logsumexp(self.log_weights))
        return (1. - gamma) * w + gamma / self.N

    def select(self, rng):

        self._p = self.probabilities()
        self._idx = tools.inverse_cdf(self._p, rng.random())
        return Strategy(self.strategies[self._idx])

    def update(self, chosen, losses):

        self.t += 1
        loss = np.sum(losses) / float(self.space.k_r)
        est = loss / self._p[self._idx]
        self.log_weights[self._idx] -= self.gamma(self.t) / self.N * est
        # Keep the largest log-weight at zero.
        self.log_weights -= self.log_weights.max()

class OraclePolicy(object):
    '''
    Always plays a fixed strategy, e.g. the optimal set of a
    stochastic environment.
    '''

    def __init__(self, strategy):
        self.strategy = strategy

    def select(self, rng=None):
        return self.strategy

    def update(self, chosen, losses):
        pass

def minibatch_size(n, k_r, horizon):
    '''
    Batch size round((4 k_r sqrt(n ln n))^(-1/3) horizon^(1/3)),
    at least 1.
    '''
    scale = 4. * k_r * np.sqrt(n * np.log(n))
    return max(1, int(round(scale ** (-1. / 3) * horizon ** (1. / 3))))

class MiniBatch(object):
    '''
    Mini-batching wrapper: the inner policy picks a strategy once per
    batch of tau rounds and is updated once with the per-channel
    average loss of the batch.

    Without a horizon, a doubling schedule is used: epoch j lasts
    2**j rounds, uses tau = minibatch_size(n, k_r, 2**j) and starts
    from a fresh inner policy.
    '''

    def __init__(self, factory, space, tau=None, horizon=None):
        '''
        Arguments
        ---------
        factory : callable
            factory() -> new inner policy.
        space : StrategySpace

        Keyword arguments
        -----------------
        tau : int, None
            Batch size. If None, derived from horizon.
            (default : None)
        horizon : int, None
            Total rounds, used for tau if tau is None. If both are
            None use the doubling schedule. (default : None)
        '''

        self.factory = factory
        self.space = space
        self.doubling = tau is None and horizon is None

        if tau is None and horizon is not None:
            tau = minibatch_size(space.n, space.k_r, horizon)
        if tau is not None and tau < 1:
            raise ValueError('tau should be >= 1')

        self.epoch = 0
        self._epoch_left = 1
        self.tau = 1 if self.doubling else int(tau)
        self.inner = factory()

        self._frozen = None
        self._left = 0
        self._acc = None
        self._nacc = 0

    def _next_epoch(self):
        length = 2 ** self.epoch
        self.tau = minibatch_size(self.space.n, self.space.k_r, length)
        self.inner = self.factory()
        self._epoch_left = length
        self.epoch += 1

    def select(self, rng):

        if self._left == 0:
            if self.doubling:
                if self._epoch_left <= 0 or self._frozen is None:
                    self._next_epoch()
                self._left = min(self.tau, self._epoch_left)
            else:
                self._left = self.tau
            self._frozen = self.inner.select(rng)
            self._acc = np.zeros(self.space.k_r)
            self._nacc = 0

        return self._frozen

    def update(self, chosen, losses):

        self._acc += losses
        self._nacc += 1
        self._left -= 1
        if self.doubling:
            self._epoch_left -= 1

        if self._left == 0:
            self.inner.update(self._frozen, self._acc / self._nacc)
