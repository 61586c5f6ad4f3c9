'''
The AUFH-EXP3++ channel-access policy: exponential weights over
channels with importance-weighted loss estimates, a learning rate
eta_t and per-channel exploration eps_t(f) spread over a covering
set. The reference form works on the enumerated strategy vector,
the 'dp' form on the channel-wise tables of `sampler`.
'''
import numpy as np

from .strategy import (Strategy, ConfigError, build_covering_set, lex_rank)
from . import sampler
from . import tools

VARIANTS = ('EMP', 'ACC', 'KNOWN_GAP')
XI_FORMS = ('avg', 'experimental', 'known_gap')

class Schedule(object):
    '''
    Learning-rate and exploration schedule of AUFH-EXP3++.
    '''

    def __init__(self, variant='EMP', c=18., xi_form='avg',
                 eta_override=None, known_gaps=None):
        '''
        Keyword arguments
        -----------------
        variant : str
            Options:
                EMP       : eta_t = beta_t
                ACC       : eta_t = 1
                KNOWN_GAP : eta_t = beta_t, xi from known gaps
            (default : EMP)
        c : float
            Exploration constant, > 0 (default : 18.)
        xi_form : str
            Exploration form for EMP/ACC. Options:
                avg          : c ln(t)^2 / (t gap^2)
                experimental : ln(t gap^2) / (32 t gap^2)
            Ignored for KNOWN_GAP (default : avg)
        eta_override : float, None
            Constant learning rate replacing the variant's
            (default : None)
        known_gaps : array-like, None
            Per-channel gaps, required for KNOWN_GAP. (default : None)
        '''

        variant = str(variant).upper()
        if variant not in VARIANTS:
            raise ConfigError('Unknown schedule variant {}, options: {}'.format(
                variant, VARIANTS))
        if not c > 0:
            raise ConfigError('Exploration constant c should be > 0')
        if variant == 'KNOWN_GAP':
            xi_form = 'known_gap'
        elif xi_form not in XI_FORMS[:2]:
            raise ConfigError('Unknown xi_form {}, options: {}'.format(
                xi_form, XI_FORMS[:2]))
        if eta_override is not None and not eta_override > 0:
            raise ConfigError('eta_override should be > 0')

        self.variant = variant
        self.c = float(c)
        self.xi_form = xi_form
        self.eta_override = eta_override
        self.known_gaps = None if known_gaps is None else \
            np.asarray(known_gaps, dtype=float)

    @classmethod
    def emp(cls, **kwargs):
        return cls('EMP', **kwargs)

    @classmethod
    def acc(cls, **kwargs):
        return cls('ACC', **kwargs)

    @classmethod
    def known_gap(cls, gaps, **kwargs):
        return cls('KNOWN_GAP', known_gaps=gaps, **kwargs)

    def to_dict(self):
        opts = dict(variant=self.variant, c=self.c, xi_form=self.xi_form)
        if self.eta_override is not None:
            opts['eta_override'] = self.eta_override
        if self.known_gaps is not None:
            opts['known_gaps'] = self.known_gaps.tolist()
        return opts

    def __repr__(self):
        return 'Schedule({})'.format(self.to_dict())

class PolicyState(object):
    '''
    Per-channel state of AUFH-EXP3++ after `round` completed rounds.
    '''

    def __init__(self, n):

        self.log_weights = np.zeros(n)
        self.cum_est_loss = np.zeros(n)
        self.play_counts = np.zeros(n, dtype=np.int64)
        self.gap_estimates = np.zeros(n)
        self.round = 0

    @property
    def n(self):
        return self.log_weights.size

    def copy(self):
        new = PolicyState(self.n)
        new.log_weights = self.log_weights.copy()
        new.cum_est_loss = self.cum_est_loss.copy()
        new.play_counts = self.play_counts.copy()
        new.gap_estimates = self.gap_estimates.copy()
        new.round = self.round
        return new

    def to_dict(self):
        return dict(log_weights=self.log_weights.tolist(),
                    cum_est_loss=self.cum_est_loss.tolist(),
                    play_counts=self.play_counts.tolist(),
                    gap_estimates=self.gap_estimates.tolist(),
                    round=self.round)

    @classmethod
    def from_dict(cls, d):
        state = cls(len(d['log_weights']))
        state.log_weights = np.asarray(d['log_weights'], dtype=float)
        state.cum_est_loss = np.asarray(d['cum_est_loss'], dtype=float)
        state.play_counts = np.asarray(d['play_counts'], dtype=np.int64)
        state.gap_estimates = np.asarray(d['gap_estimates'], dtype=float)
        state.round = int(d['round'])
        return state

def beta(t, n):
    '''
    beta_t = 1/2 sqrt(ln n / (t n)).
    '''
    return 0.5 * np.sqrt(np.log(n) / (t * float(n)))

def eta(t, n, schedule):
    '''
    Learning rate eta_t of a schedule.
    '''
    if schedule.eta_override is not None:
        return float(schedule.eta_override)
    if schedule.variant == 'ACC':
        assert 1. >= beta(t, n)
        return 1.
    return beta(t, n)

def _gaps(schedule, state):

    if schedule.variant == 'KNOWN_GAP':
        if schedule.known_gaps is None:
            raise ConfigError('KNOWN_GAP schedule needs known_gaps')
        if schedule.known_gaps.size != state.n:
            raise ConfigError('known_gaps should have one entry per channel')
        return schedule.known_gaps
    return state.gap_estimates

def xis(t, schedule, state):
    '''
    Exploration parameters xi_t(f) for all channels, mapped to
    [0, inf]: a zero gap gives inf, a logarithm of an argument
    below one gives 0.

    Arguments
    ---------
    t : int
        Current round (>= 1).
    schedule : Schedule
    state : PolicyState
        Holds the gap estimates of round t - 1.

    Returns
    -------
    xi : array-like
    '''

    gaps = _gaps(schedule, state)
    d = t * gaps ** 2
    out = np.full(gaps.size, np.inf)
    pos = d > 0

    if schedule.xi_form == 'avg':
        out[pos] = schedule.c * np.log(t) ** 2 / d[pos]
    else:
        with np.errstate(divide='ignore'):
            logd = np.log(d[pos])
        logd[logd < 0] = 0.
        if schedule.xi_form == 'known_gap':
            out[pos] = schedule.c * logd / d[pos]
        else:
            out[pos] = logd / (32. * d[pos])

    return out

def xi(t, f, schedule, state):
    '''
    Exploration parameter xi_t(f) of a single channel.
    '''
    return float(xis(t, schedule, state)[f])

def epsilons(t, schedule, state):
    '''
    eps_t(f) = min{1 / (2n), beta_t, xi_t(f)} for all channels.
    '''
    n = state.n
    cap = min(0.5 / n, beta(t, n))
    return np.minimum(cap, xis(t, schedule, state))

def epsilon(t, f, schedule, state):
    '''
    eps_t(f) of a single channel.
    '''
    return float(epsilons(t, schedule, state)[f])

def covering_rows(space, covering):
    '''
    Rows of the lexicographic strategy matrix holding the
    covering blocks.
    '''
    return np.array([lex_rank(b, space.n) for b in covering.blocks],
                    dtype=int)

def strategy_distribution(state, schedule, space, covering, cap=10**6,
                          strategies=None, rows=None):
    '''
    Strategy probabilities p_t(i): the exponential-weights
    distribution scaled by 1 - sum eps_t, plus on each covering
    block the eps_t mass of the channels it owns.

    Arguments
    ---------
    state : PolicyState
    schedule : Schedule
    space : StrategySpace
    covering : CoveringSet

    Keyword arguments
    -----------------
    cap : int
        Enumeration cap (default : 10**6)
    strategies : array-like, None
        Precomputed strategy matrix (default : None)
    rows : array-like, None
        Precomputed covering_rows (default : None)

    Returns
    -------
    p : array-like
        Length N, in lexicographic strategy order.
    '''

    if strategies is None:
        try:
            strategies = space.strategy_matrix(cap)
        except ValueError as e:
            raise type(e)('{}; use the dp sampler'.format(e))
    if rows is None:
        rows = covering_rows(space, covering)

    eps = epsilons(state.round + 1, schedule, state)

    logw = state.log_weights[strategies].sum(axis=1)
    w = np.exp(logw - logw.max())
    p = (1. - eps.sum()) * w / w.sum()
    p[rows] += covering.exploration_mass(eps)

    return p

def marginals_enumerated(p, strategies, n):
    '''
    q_t(f) = sum of p_t(i) over strategies containing f.
    '''
    k_r = strategies.shape[1]
    return np.bincount(strategies.ravel(), weights=np.repeat(p, k_r),
                       minlength=n)

def marginal_probability(state, schedule, space, covering, f, cap=10**6,
                         strategies=None, rows=None):
    '''
    Marginal probability q_t(f) that channel f is in the drawn
    strategy, summed over the enumerated distribution.
    '''

    if strategies is None:
        strategies = space.strategy_matrix(cap)
    p = strategy_distribution(state, schedule, space, covering, cap=cap,
                              strategies=strategies, rows=rows)
    return float(marginals_enumerated(p, strategies, space.n)[f])

def estimate_losses(chosen, losses, marginals):
    '''
    Importance-weighted loss estimates: loss / q_t(f) on the
    channels of the chosen strategy, zero elsewhere.

    Arguments
    ---------
    chosen : Strategy
    losses : array-like
        Observed losses on the members of chosen (ascending order).
    marginals : array-like
        q_t(f) for all channels.

    Returns
    -------
    est : array-like
        Length n.
    '''

    idx = chosen.indices
    q = np.asarray(marginals, dtype=float)[idx]
    if np.any(q <= 0):
        raise RuntimeError('Chosen channel with q_t(f) = 0: {}, q={}'.format(
            chosen, q))

    est = np.zeros(len(marginals))
    est[idx] = np.asarray(losses, dtype=float) / q

    return est

def update(state, schedule, chosen, estimated):
    '''
    Add estimated losses to the cumulative estimates and
    recompute log-weights as -eta_{t+1} L_t(f), shifted so that
    the largest is zero. Updates state in place.

    Arguments
    ---------
    state : PolicyState
    schedule : Schedule
    chosen : Strategy
    estimated : array-like
        Output of estimate_losses for this round.

    Returns
    -------
    state : PolicyState
    '''

    state.cum_est_loss += estimated
    state.play_counts[chosen.indices] += 1
    state.round += 1

    logw = -eta(state.round + 1, state.n, schedule) * state.cum_est_loss
    logw -= logw.max()
    state.log_weights = logw

    return state

def update_gap_estimates(state):
    '''
    Empirical gaps min{1, (L_t(f) - min_f' L_t(f')) / t}. Updates
    state in place.
    '''

    t = state.round
    if t < 1:
        raise ValueError('Gap estimates need at least one round')

    gaps = (state.cum_est_loss - state.cum_est_loss.min()) / float(t)
    state.gap_estimates = np.minimum(1., gaps)

    return state

def step(state, schedule, space, covering, feedback, rng, cap=10**6,
         strategies=None, rows=None):
    '''
    One round of the reference algorithm: draw a strategy from p_t,
    observe its losses, update the estimates, weights and gaps.

    Arguments
    ---------
    state : PolicyState
    schedule : Schedule
    space : StrategySpace
    covering : CoveringSet
    feedback : callable
        feedback(strategy) -> losses on the strategy's members.
    rng : numpy.random.Generator

    Returns
    -------
    chosen : Strategy
    state : PolicyState
    '''

    if strategies is None:
        strategies = space.strategy_matrix(cap)

    p = strategy_distribution(state, schedule, space, covering, cap=cap,
                              strategies=strategies, rows=rows)
    q = marginals_enumerated(p, strategies, space.n)
    chosen = Strategy(strategies[tools.inverse_cdf(p, rng.random())])

    est = estimate_losses(chosen, feedback(chosen), q)
    update(state, schedule, chosen, est)
    update_gap_estimates(state)

    return chosen, state

class AUFHExp3(object):
    '''
    AUFH-EXP3++ policy object, either on the enumerated strategy
    space or with the dynamic-programming sampler.
    '''

    def __init__(self, space, schedule=None, method='dp', cap=10**6,
                 covering=None):
        '''
        Arguments
        ---------
        space : StrategySpace

        Keyword arguments
        -----------------
        schedule : Schedule, None
            If None, use Schedule.emp() (default : None)
        method : str
            Options:
                dp        : channel-by-channel sampler, O(n k_r)
                enumerate : full strategy vector, O(N k_r)
            (default : dp)
        cap : int
            Enumeration cap for method 'enumerate' (default : 10**6)
        covering : CoveringSet, None
            If None, use build_covering_set(space) (default : None)
        '''

        if method not in ('dp', 'enumerate'):
            raise ValueError('method should be dp or enumerate')

        self.space = space
        self.schedule = Schedule.emp() if schedule is None else schedule
        self.method = method
        self.covering = build_covering_set(space) if covering is None \
            else covering
        self.state = PolicyState(space.n)

        if method == 'enumerate':
            self._strategies = space.strategy_matrix(cap)
            self._rows = covering_rows(space, self.covering)

        # Fail early on a bad schedule configuration.
        epsilons(1, self.schedule, self.state)

        self._q = None

    def select(self, rng):
        '''
        Draw the strategy of the next round and remember the
        channel marginals needed for the update.
        '''

        state = self.state

        if self.method == 'enumerate':
            p = strategy_distribution(state, self.schedule, self.space,
                                      self.covering,
                                      strategies=self._strategies,
                                      rows=self._rows)
            self._q = marginals_enumerated(p, self._strategies, self.space.n)
            idx = tools.inverse_cdf(p, rng.random())
            return Strategy(self._strategies[idx])

        eps = epsilons(state.round + 1, self.schedule, state)
        tables = sampler.build_tables(state.log_weights, self.space.k_r,
                                      log_domain=True)
        self._q = sampler.marginals(tables, eps, self.covering)

        total = eps.sum()
        u = rng.random()
        if u < total:
            mass = self.covering.exploration_mass(eps)
            return self.covering.blocks[tools.inverse_cdf(mass, u / total)]

        return sampler.sample_strategy(tables, rng)

    def update(self, chosen, losses):
        '''
        Feed back the losses observed on the chosen strategy.
        '''
        if self._q is None:
            raise RuntimeError('update() called before select()')

        est = estimate_losses(chosen, losses, self._q)
        update(self.state, self.schedule, chosen, est)
        update_gap_estimates(self.state)
        self._q = None
