'''
Dynamic-programming implementation of the exponential-weights
distribution over k_r-subsets. Strategy weights are products of
channel weights, so subset sums obey a two-term recursion over
channels and the full distribution never has to be stored.

Tables are kept in log space relative to the largest channel
log-weight; the row index of both tables is the 1-based channel
index used in the recursions.
'''
import math

import numpy as np
from numba import jit

from .strategy import Strategy

@jit(nopython=True, cache=True)
def _logaddexp(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))

@jit(nopython=True, cache=True)
def _suffix_table(logw, k_r):
    # suf[fb, kb] = log W(fb, kb), fb = 1..n+1
    n = logw.shape[0]
    suf = np.full((n + 2, k_r + 1), -np.inf)
    for fb in range(1, n + 2):
        suf[fb, 0] = 0.
    for fb in range(n, 0, -1):
        for kb in range(1, k_r + 1):
            suf[fb, kb] = _logaddexp(suf[fb + 1, kb],
                                     logw[fb - 1] + suf[fb + 1, kb - 1])
    return suf

@jit(nopython=True, cache=True)
def _prefix_table(logw, k_r):
    # pre[fb, kb] = log Wbar(fb, kb), fb = 0..n
    n = logw.shape[0]
    pre = np.full((n + 1, k_r + 1), -np.inf)
    for fb in range(0, n + 1):
        pre[fb, 0] = 0.
    for fb in range(1, n + 1):
        for kb in range(1, k_r + 1):
            pre[fb, kb] = _logaddexp(pre[fb - 1, kb],
                                     logw[fb - 1] + pre[fb - 1, kb - 1])
    return pre

@jit(nopython=True, cache=True)
def _weight_marginals(logw, suf, pre, k_r):
    # Share of total weight carried by subsets containing each channel.
    n = logw.shape[0]
    out = np.zeros(n)
    log_total = suf[1, k_r]
    for f in range(1, n + 1):
        acc = -np.inf
        for k in range(0, k_r):
            acc = _logaddexp(acc, pre[f - 1, k] + logw[f - 1]
                             + suf[f + 1, k_r - k - 1])
        out[f - 1] = math.exp(acc - log_total)
    return out

@jit(nopython=True, cache=True)
def _sample(logw, suf, k_r, uniforms):
    n = logw.shape[0]
    chosen = np.empty(k_r, dtype=np.int64)
    k = 0
    for f in range(1, n + 1):
        slots = k_r - k
        if slots == 0:
            break
        if slots >= n - f + 1:
            accept = True
        else:
            p_acc = math.exp(logw[f - 1] + suf[f + 1, slots - 1]
                             - suf[f, slots])
            accept = uniforms[f - 1] < p_acc
        if accept:
            chosen[k] = f - 1
            k += 1
    return chosen

@jit(nopython=True, cache=True)
def _path_log_probability(logw, suf, k_r, mask):
    n = logw.shape[0]
    logp = 0.
    k = 0
    for f in range(1, n + 1):
        slots = k_r - k
        if slots == 0:
            if mask[f - 1]:
                return -np.inf
            continue
        if slots >= n - f + 1:
            if not mask[f - 1]:
                return -np.inf
            k += 1
            continue
        log_acc = logw[f - 1] + suf[f + 1, slots - 1] - suf[f, slots]
        if log_acc > 0.:
            log_acc = 0.
        if mask[f - 1]:
            logp += log_acc
            k += 1
        else:
            logp += math.log(-math.expm1(log_acc)) if log_acc < 0. else -np.inf
    if k != k_r:
        return -np.inf
    return logp

class DPTables(object):
    '''
    Suffix table W(fb, kb) (total weight of kb-subsets of channels
    fb..n) and prefix table Wbar(fb, kb) (kb-subsets of 1..fb) for
    one set of channel weights.
    '''

    def __init__(self, log_suffix, log_prefix, log_weights, offset):
        '''
        Arguments
        ---------
        log_suffix : array-like
            Shape (n + 2, k_r + 1), rows 1..n+1 used.
        log_prefix : array-like
            Shape (n + 1, k_r + 1).
        log_weights : array-like
            Channel log-weights after subtracting offset.
        offset : float
            Log-scale offset shared by all entries.
        '''

        self.log_suffix = log_suffix
        self.log_prefix = log_prefix
        self.log_weights = log_weights
        self.offset = offset
        self.n = log_weights.size
        self.k_r = log_suffix.shape[1] - 1

    def _scale(self):
        return np.exp(np.arange(self.k_r + 1) * self.offset)

    @property
    def suffix(self):
        '''W(fb, kb) in linear scale (may overflow for extreme weights).'''
        return np.exp(self.log_suffix) * self._scale()

    @property
    def prefix(self):
        '''Wbar(fb, kb) in linear scale.'''
        return np.exp(self.log_prefix) * self._scale()

    @property
    def log_total(self):
        '''log W(1, k_r), including the offset.'''
        return self.log_suffix[1, self.k_r] + self.k_r * self.offset

def build_tables(channel_weights, k_r, log_domain=False):
    '''
    Fill the suffix and prefix tables in O(n k_r).

    Arguments
    ---------
    channel_weights : array-like
        Positive channel weights, or their logarithms if
        log_domain is set.
    k_r : int

    Keyword arguments
    -----------------
    log_domain : bool
        Interpret channel_weights as log-weights (default : False)

    Returns
    -------
    tables : DPTables
    '''

    w = np.asarray(channel_weights, dtype=float)

    if log_domain:
        if not np.all(np.isfinite(w)):
            raise ValueError('log-weights must be finite')
        logw = w
    else:
        if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
            raise ValueError('channel weights must be positive and finite')
        logw = np.log(w)

    if not 1 <= k_r <= logw.size:
        raise ValueError('Need 1 <= k_r <= n')

    offset = float(logw.max())
    logw = np.ascontiguousarray(logw - offset)

    suf = _suffix_table(logw, int(k_r))
    pre = _prefix_table(logw, int(k_r))

    return DPTables(suf, pre, logw, offset)

def sample_strategy(tables, rng):
    '''
    Draw a strategy channel by channel: channel f is accepted with
    probability w(f) W(f+1, r-1) / W(f, r), r the number of open
    slots; it is forced in once the remaining channels equal r.

    Arguments
    ---------
    tables : DPTables
    rng : numpy.random.Generator

    Returns
    -------
    strategy : Strategy
        Exactly k_r channels, distributed as w(i) / W(1, k_r).
    '''

    uniforms = rng.random(tables.n)
    chosen = _sample(tables.log_weights, tables.log_suffix, tables.k_r,
                     uniforms)
    return Strategy(chosen)

def path_probability(tables, strategy):
    '''
    Probability that sample_strategy returns strategy, computed as the
    product of the accept/skip probabilities along its path.
    '''
    mask = strategy.mask(tables.n)
    return math.exp(_path_log_probability(tables.log_weights,
                                          tables.log_suffix, tables.k_r,
                                          mask))

def weight_marginals(tables):
    '''
    Per-channel share of W(1, k_r) carried by subsets containing the
    channel, i.e. the exponential-weights part of q_t(f).
    '''
    return _weight_marginals(tables.log_weights, tables.log_suffix,
                             tables.log_prefix, tables.k_r)

def marginals(tables, epsilons, covering):
    '''
    Channel marginals q_t(f) of the full mixture distribution.

    Arguments
    ---------
    tables : DPTables
    epsilons : array-like
        Per-channel exploration parameters eps_t(f).
    covering : CoveringSet

    Returns
    -------
    q : array-like
        Length n, sums to k_r.
    '''

    eps = np.asarray(epsilons, dtype=float)
    q = (1. - eps.sum()) * weight_marginals(tables)

    mass = covering.exploration_mass(eps)
    cmat = covering.matrix
    q += np.bincount(cmat.ravel(), weights=np.repeat(mass, cmat.shape[1]),
                     minlength=tables.n)

    return q
