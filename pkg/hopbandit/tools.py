import hashlib

import numpy as np

def stable_hash(key):
    '''
    Map a string (or int) to a 32-bit integer that does not
    change between interpreter sessions.
    '''
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xffffffff
    digest = hashlib.sha256(str(key).encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')

def derive_seed(master_seed, *keys):
    '''
    Derive an independent 64-bit seed from a master seed and
    a sequence of keys (ints or strings). Identical inputs
    always give identical seeds, so results do not depend on
    the order in which runs are executed.

    Arguments
    ---------
    master_seed : int
    keys : int or str

    Returns
    -------
    seed : int
    '''

    ss = np.random.SeedSequence(entropy=int(master_seed),
                                spawn_key=tuple(stable_hash(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])

class CounterStream(object):
    '''
    Random-access stream of uniform rows. Row i is a pure function
    of (seed, stream, i): rows are produced in chunks by a Philox
    generator whose counter is set from the chunk index, so no
    state carries over from earlier rows.
    '''

    def __init__(self, seed, stream, width, chunk=4096):
        '''
        Arguments
        ---------
        seed : int
        stream : int
            Identifier that separates independent streams sharing
            a seed.
        width : int
            Number of uniforms per row.

        Keyword arguments
        -----------------
        chunk : int
            Rows generated per Philox call (default : 4096)
        '''

        self.key = np.array([int(seed) & 0xffffffffffffffff,
                             int(stream) & 0xffffffffffffffff],
                            dtype=np.uint64)
        self.width = int(width)
        self.chunk = int(chunk)
        self._cidx = -1
        self._rows = None

    def _load(self, cidx):
        counter = np.array([0, cidx, 0, 0], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=self.key,
                                                   counter=counter))
        self._rows = gen.random((self.chunk, self.width))
        self._cidx = cidx

    def row(self, i):
        '''
        Uniforms in [0, 1) of row i (0-based). The returned array is
        a view into the current chunk and must not be modified.
        '''
        cidx, ridx = divmod(int(i), self.chunk)
        if cidx != self._cidx:
            self._load(cidx)
        return self._rows[ridx]

def log_checkpoints(horizon, per_decade=10, start=1):
    '''
    Log-spaced integer round indices from start up to and
    including horizon.

    Arguments
    ---------
    horizon : int

    Keyword arguments
    -----------------
    per_decade : int
        Checkpoints per factor of ten (default : 10)
    start : int
        First checkpoint (default : 1)

    Returns
    -------
    checkpoints : list of int
        Strictly increasing.
    '''

    horizon = int(horizon)
    if horizon < 1:
        raise ValueError('horizon should be >= 1')

    ndec = np.log10(horizon / float(start))
    num = max(int(np.ceil(ndec * per_decade)) + 1, 1)
    cps = np.unique(np.round(np.logspace(np.log10(start), np.log10(horizon),
                                         num)).astype(int))
    cps = cps[(cps >= 1) & (cps <= horizon)]
    if cps.size == 0 or cps[-1] != horizon:
        cps = np.append(cps, horizon)

    return [int(c) for c in cps]

def scale_checkpoints(checkpoints, old_horizon, new_horizon):
    '''
    Rescale checkpoints proportionally to a new horizon, dropping
    duplicates created by rounding.
    '''
    scale = float(new_horizon) / float(old_horizon)
    cps = [max(1, int(round(c * scale))) for c in checkpoints]
    cps = sorted(set(min(c, int(new_horizon)) for c in cps))
    return cps

def inverse_cdf(prob, u):
    '''
    Draw an index from a probability vector with a single uniform.
    Rounding error at the end of the cumulative sum is absorbed by
    the last bucket with non-zero mass.

    Arguments
    ---------
    prob : array-like
        Non-negative, summing to (about) one.
    u : float
        Uniform in [0, 1).

    Returns
    -------
    idx : int
    '''

    cdf = np.cumsum(prob)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side='right'))
    if idx >= cdf.size:
        idx = int(np.flatnonzero(prob > 0)[-1])
    return idx

def packet_rate(cumulative_loss, t, k_r, bits_per_packet=1000,
                slot_duration=1.):
    '''
    Received data rate in Mbps when each of the k_r received
    channels carries one packet per slot and every unit of loss
    is one lost packet.

    Arguments
    ---------
    cumulative_loss : float or array-like
        Realized loss summed over rounds and channels.
    t : int or array-like
        Number of rounds.
    k_r : int

    Keyword arguments
    -----------------
    bits_per_packet : int
        (default : 1000)
    slot_duration : float
        Slot length in seconds (default : 1.)

    Returns
    -------
    rate : float or array-like
        Mbps
    '''

    t = np.asarray(t, dtype=float)
    received = k_r * t - np.asarray(cumulative_loss, dtype=float)
    return received * bits_per_packet / (t * slot_duration) * 1e-6

def linear_fit(x, y):
    '''
    Least-squares fit y = a + b x.

    Returns
    -------
    a, b : float
    r2 : float
        Coefficient of determination.
    '''

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1. - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.

    return float(a), float(b), float(r2)
