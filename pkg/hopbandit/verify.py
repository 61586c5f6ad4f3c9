'''
Fast self-checks of the installed package: the dynamic-programming
sampler against the enumerated distribution, the marginals, the
loss estimator and a short adversarial run against its regret bound.
'''
import sys

import numpy as np

from .strategy import StrategySpace, Strategy, build_covering_set
from .policy import (Schedule, PolicyState, strategy_distribution,
                     marginals_enumerated, epsilons, estimate_losses)
from . import sampler

def _random_state(space, rng, rounds=25):
    state = PolicyState(space.n)
    state.cum_est_loss = rng.uniform(0, rounds, size=space.n)
    state.round = rounds
    state.gap_estimates = np.minimum(
        1., (state.cum_est_loss - state.cum_est_loss.min()) / rounds)
    state.log_weights = -0.3 * state.cum_est_loss
    state.log_weights -= state.log_weights.max()
    return state

def _dp_distribution(state, schedule, space, covering, strategies):
    eps = epsilons(state.round + 1, schedule, state)
    tables = sampler.build_tables(state.log_weights, space.k_r,
                                  log_domain=True)
    p = np.array([sampler.path_probability(tables, Strategy(row))
                  for row in strategies]) * (1. - eps.sum())
    mass = covering.exploration_mass(eps)
    for block, m in zip(covering.blocks, mass):
        hit = np.all(strategies == np.asarray(block.members), axis=1)
        p[hit] += m
    return p, tables, eps

def check_dp_equivalence(spaces=((5, 2), (6, 3), (7, 4)), seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.
    for n, k_r in spaces:
        space = StrategySpace(n, k_r)
        covering = build_covering_set(space)
        strategies = space.strategy_matrix()
        state = _random_state(space, rng)
        sched = Schedule.emp()
        p_ref = strategy_distribution(state, sched, space, covering,
                                      strategies=strategies)
        p_dp = _dp_distribution(state, sched, space, covering,
                                strategies)[0]
        worst = max(worst, np.abs(p_ref - p_dp).max())
    return worst <= 1e-9, 'max |p_dp - p_enum| = {:.3g}'.format(worst)

def check_marginals(spaces=((5, 2), (6, 3), (8, 4)), seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.
    for n, k_r in spaces:
        space = StrategySpace(n, k_r)
        covering = build_covering_set(space)
        strategies = space.strategy_matrix()
        state = _random_state(space, rng)
        sched = Schedule.emp()
        p = strategy_distribution(state, sched, space, covering,
                                  strategies=strategies)
        q_ref = marginals_enumerated(p, strategies, n)
        eps = epsilons(state.round + 1, sched, state)
        tables = sampler.build_tables(state.log_weights, k_r,
                                      log_domain=True)
        q_dp = sampler.marginals(tables, eps, covering)
        worst = max(worst, np.abs(q_ref - q_dp).max(),
                    abs(q_dp.sum() - k_r))
    return worst <= 1e-9, 'max |q_dp - q_enum| = {:.3g}'.format(worst)

def check_unbiased(n=6, k_r=3, seed=2):
    '''Expected loss estimate over the exact distribution.'''
    rng = np.random.default_rng(seed)
    space = StrategySpace(n, k_r)
    covering = build_covering_set(space)
    strategies = space.strategy_matrix()
    state = _random_state(space, rng)
    p = strategy_distribution(state, Schedule.emp(), space, covering,
                              strategies=strategies)
    q = marginals_enumerated(p, strategies, n)
    losses = rng.random(n)

    expected = np.zeros(n)
    for prob, row in zip(p, strategies):
        chosen = Strategy(row)
        expected += prob * estimate_losses(chosen, losses[row], q)

    err = np.abs(expected - losses).max()
    return err <= 1e-9, 'max |E[est] - loss| = {:.3g}'.format(err)

def check_simplex(n=8, k_r=4, seed=3):
    rng = np.random.default_rng(seed)
    space = StrategySpace(n, k_r)
    covering = build_covering_set(space)
    strategies = space.strategy_matrix()
    state = _random_state(space, rng)
    p = strategy_distribution(state, Schedule.acc(), space, covering,
                              strategies=strategies)
    ok = np.all(p >= 0) and abs(p.sum() - 1.) <= 1e-12
    return bool(ok), 'sum p = {!r}, min p = {:.3g}'.format(p.sum(), p.min())

def check_covering(grid=((3, 2), (8, 3), (10, 4), (16, 4), (7, 7))):
    for n, k_r in grid:
        cover = build_covering_set(StrategySpace(n, k_r))
        seen = np.zeros(n, dtype=bool)
        for block in cover.blocks:
            if len(block) != k_r:
                return False, 'block {} of ({}, {}) has wrong size'.format(
                    block, n, k_r)
            seen[block.indices] = True
        if not seen.all() or len(cover) != -(-n // k_r):
            return False, 'channels not covered for ({}, {})'.format(n, k_r)
        for f in range(n):
            if f not in cover.blocks[cover.owner[f]]:
                return False, 'owner of {} does not contain it'.format(f)
    return True, 'checked {} spaces'.format(len(grid))

def check_envelope_short(horizon=2000, repetitions=2):
    '''Bound of the oblivious-adversary guarantee on a short run.'''
    from .experiment import ExperimentConfig, run_experiment, check_envelope

    config = ExperimentConfig.from_dict(dict(
        environment=dict(regime='ADVERSARIAL_OBLIVIOUS', n=6, delta=0.2,
                         seed=0),
        policies=[dict(name='EMP', kind='aufh', variant='EMP')],
        k_r=2, horizon=horizon, repetitions=repetitions))
    results = run_experiment(config, verbose=0, mpi=False)
    report = check_envelope(results['EMP'], 'theorem1')
    return report['passed'], 'final regret {:.1f} <= {:.1f}'.format(
        report['rows'][-1][1], report['rows'][-1][2])

CHECKS = [('covering set', check_covering),
          ('strategy simplex', check_simplex),
          ('dp distribution', check_dp_equivalence),
          ('dp marginals', check_marginals),
          ('unbiased estimator', check_unbiased),
          ('adversarial envelope', check_envelope_short)]

def run_checks(verbose=1):
    '''
    Run all checks.

    Keyword arguments
    -----------------
    verbose : int
        Print one line per check if > 0 (default : 1)

    Returns
    -------
    results : list of (str, bool, str)
        Name, passed, detail.
    '''

    results = []
    for name, func in CHECKS:
        try:
            ok, detail = func()
        except Exception as e:
            ok, detail = False, '{}: {}'.format(type(e).__name__, e)
        results.append((name, bool(ok), detail))
        if verbose:
            print('{:<22s} {}  {}'.format(name, 'ok  ' if ok else 'FAIL',
                                          detail))
            sys.stdout.flush()

    return results
