'''
Channel-access strategies, covering sets and regret accounting shared by
the policies, environments and the experiment harness.
'''
import itertools

import numpy as np
from scipy.special import comb

INT64_MAX = np.iinfo(np.int64).max

class SpaceTooLargeError(ValueError):
    '''
    Raised when a strategy space cannot be enumerated under the
    requested cap.
    '''
    pass

class ConfigError(ValueError):
    '''
    Raised for invalid experiment, environment or schedule settings.
    '''
    pass

class Strategy(object):
    '''
    A set of distinct channel indices selected for reception
    in one time slot. Members are kept in ascending order so
    that equality is structural.
    '''

    __slots__ = ('_members',)

    def __init__(self, members, n=None):
        '''
        Arguments
        ---------
        members : iterable of int
            Channel indices.

        Keyword arguments
        -----------------
        n : int, None
            If given, check that all members lie in [0, n).
            (default : None)
        '''

        members = tuple(sorted(int(f) for f in members))

        if len(set(members)) != len(members):
            raise ValueError('Strategy members must be distinct: {}'.format(
                members))
        if n is not None and members and (members[0] < 0 or members[-1] >= n):
            raise ValueError('Strategy members must lie in [0, {}): {}'.format(
                n, members))

        self._members = members

    @property
    def members(self):
        return self._members

    @property
    def indices(self):
        '''Members as integer numpy array.'''
        return np.asarray(self._members, dtype=int)

    def mask(self, n):
        '''Boolean membership vector of length n.'''
        m = np.zeros(n, dtype=bool)
        m[list(self._members)] = True
        return m

    def __len__(self):
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def __contains__(self, f):
        return f in self._members

    def __eq__(self, other):
        if isinstance(other, Strategy):
            return self._members == other._members
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return eq
        return not eq

    def __hash__(self):
        return hash(self._members)

    def __repr__(self):
        return 'Strategy({})'.format(list(self._members))

class StrategySpace(object):
    '''
    The universe of k_r-subsets of n channels.
    '''

    def __init__(self, n, k_r):
        '''
        Arguments
        ---------
        n : int
            Number of channels (>= 2).
        k_r : int
            Number of channels received per slot (1 <= k_r <= n).
        '''

        if int(n) != n or n < 2:
            raise ValueError('Need integer n >= 2, got {}'.format(n))
        if int(k_r) != k_r or not 1 <= k_r <= n:
            raise ValueError('Need integer 1 <= k_r <= n, got k_r={}'.format(k_r))

        self.n = int(n)
        self.k_r = int(k_r)
        self._size = int(comb(self.n, self.k_r, exact=True))
        self._matrix = None

    @property
    def N(self):
        '''Exact strategy count binomial(n, k_r).'''
        return self._size

    @property
    def enumerable(self):
        '''False if N does not fit a signed 64-bit integer.'''
        return self._size <= INT64_MAX

    def validate(self, strategy):
        '''
        Raise ValueError if strategy is not a member of this space.
        '''
        if len(strategy) != self.k_r:
            raise ValueError('Strategy {} does not have k_r={} members'.format(
                strategy, self.k_r))
        if strategy.members[0] < 0 or strategy.members[-1] >= self.n:
            raise ValueError('Strategy {} outside [0, {})'.format(
                strategy, self.n))

    def strategy_matrix(self, cap=10**6):
        '''
        All strategies as an (N, k_r) integer array in
        lexicographic order. Cached after the first call.

        Keyword arguments
        -----------------
        cap : int
            Refuse to enumerate more than cap strategies.
            (default : 10**6)

        Returns
        -------
        strategies : array-like
            Integer array of shape (N, k_r).
        '''

        if self._size > cap:
            raise SpaceTooLargeError(
                'space too large: binomial({}, {}) = {} > cap = {}'.format(
                    self.n, self.k_r, self._size, cap))

        if self._matrix is None or self._matrix.shape[0] != self._size:
            flat = np.fromiter(
                itertools.chain.from_iterable(
                    itertools.combinations(range(self.n), self.k_r)),
                dtype=np.int64, count=self._size * self.k_r)
            self._matrix = flat.reshape(self._size, self.k_r)

        return self._matrix

    def __repr__(self):
        return 'StrategySpace(n={}, k_r={})'.format(self.n, self.k_r)

class CoveringSet(object):
    '''
    ceil(n / k_r) strategies whose union covers every channel,
    together with the unique owning block of each channel.
    '''

    def __init__(self, blocks, owner):
        '''
        Arguments
        ---------
        blocks : list of Strategy
        owner : array-like
            Integer array of length n, owner[f] is the index of
            the block that owns channel f.
        '''
        self.blocks = list(blocks)
        self.owner = np.asarray(owner, dtype=int)

    @property
    def matrix(self):
        '''Blocks as (len(blocks), k_r) integer array.'''
        return np.array([b.members for b in self.blocks], dtype=int)

    def exploration_mass(self, eps):
        '''
        Exploration probability attributed to each block: the sum of
        eps over the channels the block owns (padded duplicates
        excluded).

        Arguments
        ---------
        eps : array-like
            Per-channel exploration parameters.

        Returns
        -------
        mass : array-like
            Array of length len(blocks).
        '''
        return np.bincount(self.owner, weights=eps,
                           minlength=len(self.blocks))

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        return 'CoveringSet({})'.format(self.blocks)

class RegretTrace(object):
    '''
    Cumulative pseudo-regret and hindsight regret of one
    (policy, environment, repetition) run, recorded at
    checkpoints.
    '''

    def __init__(self, policy=None, environment=None, repetition=0):

        self.policy = policy
        self.environment = environment
        self.repetition = repetition

        self.checkpoints = []
        self.pseudo_regret = []
        self.hindsight_regret = []
        self.cumulative_loss = []

        # Running sum, updated every round.
        self.pseudo = 0.

    def record(self, t, hindsight, cumulative_loss=np.nan, pseudo=None):
        '''
        Store a snapshot of the regrets at round t.

        Arguments
        ---------
        t : int
            Round index, must exceed the last recorded checkpoint.
        hindsight : float
            Realized loss minus loss of best strategy in hindsight.

        Keyword arguments
        -----------------
        cumulative_loss : float
            Realized cumulative loss of the policy. (default : nan)
        pseudo : float, None
            Pseudo-regret, if None use running value. (default : None)
        '''

        if self.checkpoints and t <= self.checkpoints[-1]:
            raise ValueError('Checkpoints must be strictly increasing: '
                             '{} after {}'.format(t, self.checkpoints[-1]))

        self.checkpoints.append(int(t))
        self.pseudo_regret.append(self.pseudo if pseudo is None else pseudo)
        self.hindsight_regret.append(float(hindsight))
        self.cumulative_loss.append(float(cumulative_loss))

    def as_arrays(self):
        '''
        Returns
        -------
        checkpoints, pseudo, hindsight, cumulative_loss : array-like
        '''
        return (np.asarray(self.checkpoints, dtype=int),
                np.asarray(self.pseudo_regret, dtype=float),
                np.asarray(self.hindsight_regret, dtype=float),
                np.asarray(self.cumulative_loss, dtype=float))

def build_covering_set(space):
    '''
    Partition channels 0..n-1 into consecutive blocks of size k_r.
    If k_r does not divide n, the last block is padded with the
    lowest-index channels it does not contain yet. Padded channels
    keep their original owner.

    Arguments
    ---------
    space : StrategySpace

    Returns
    -------
    covering : CoveringSet
    '''

    n, k_r = space.n, space.k_r
    nblocks = -(-n // k_r)

    owner = np.repeat(np.arange(nblocks), k_r)[:n]
    blocks = []

    for b in range(nblocks):
        members = list(range(b * k_r, min((b + 1) * k_r, n)))
        pad = 0
        while len(members) < k_r:
            if pad not in members:
                members.append(pad)
            pad += 1
        blocks.append(Strategy(members, n=n))

    return CoveringSet(blocks, owner)

def enumerate_strategies(space, cap=10**6):
    '''
    List all strategies of a space in lexicographic order.

    Arguments
    ---------
    space : StrategySpace

    Keyword arguments
    -----------------
    cap : int
        Maximum number of strategies (default : 10**6)

    Returns
    -------
    strategies : list of Strategy
    '''

    if space.N > cap:
        raise SpaceTooLargeError(
            'space too large: binomial({}, {}) = {} > cap = {}'.format(
                space.n, space.k_r, space.N, cap))

    return [Strategy(c) for c in itertools.combinations(range(space.n),
                                                        space.k_r)]

def hindsight_best(loss_totals, k_r):
    '''
    Best fixed strategy on cumulative per-channel losses. Strategy
    loss is additive over channels, so this is the k_r channels with
    the smallest totals (ties to the lower index).

    Arguments
    ---------
    loss_totals : array-like
        Cumulative loss per channel.
    k_r : int

    Returns
    -------
    strategy : Strategy
    total : float
        Summed loss of the strategy.
    '''

    loss_totals = np.asarray(loss_totals, dtype=float)
    if k_r > loss_totals.size:
        raise ValueError('k_r larger than number of channels')

    order = np.argsort(loss_totals, kind='stable')[:k_r]

    return Strategy(order), float(loss_totals[order].sum())

def optimal_loss(expected_losses, k_r):
    '''Summed expected loss of the k_r best channels.'''
    expected_losses = np.asarray(expected_losses, dtype=float)
    if k_r == expected_losses.size:
        return float(expected_losses.sum())
    return float(np.partition(expected_losses, k_r - 1)[:k_r].sum())

def pseudo_regret_update(trace, t, chosen, expected_losses):
    '''
    Add the expected-loss gap of the chosen strategy in round t
    to the running pseudo-regret of a trace.

    Arguments
    ---------
    trace : RegretTrace
    t : int
        Round index (unused in the arithmetic, kept for bookkeeping).
    chosen : Strategy
    expected_losses : array-like
        Per-channel expected losses mu(f), known to the
        environment only.

    Returns
    -------
    trace : RegretTrace
        The same trace, updated in place.
    '''

    expected_losses = np.asarray(expected_losses, dtype=float)
    played = expected_losses[list(chosen.members)].sum()
    trace.pseudo += played - optimal_loss(expected_losses, len(chosen))

    return trace

def lex_rank(strategy, n):
    '''
    Position of a strategy in the lexicographic enumeration of
    all len(strategy)-subsets of n channels.
    '''

    k_r = len(strategy)
    rank = 0
    prev = -1
    for j, c in enumerate(strategy.members):
        for v in range(prev + 1, c):
            rank += int(comb(n - 1 - v, k_r - 1 - j, exact=True))
        prev = c
    return rank
