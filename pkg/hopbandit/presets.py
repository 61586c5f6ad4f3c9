'''
Canned experiment configurations of the channel-hopping study.
Every preset returns fully explicit config dictionaries, one per
(regime, n, k_r) cell, so the written manifests reproduce them.
'''
from collections import OrderedDict

from .strategy import ConfigError

TABLE1_GRID = [(12, 4), (24, 4), (48, 6), (48, 12), (64, 6), (64, 12),
               (64, 24)]

def _policies(extra=()):

    policies = [
        dict(name='AUFH-EXP3++(EMP)', kind='aufh', variant='EMP',
             xi_form='experimental', method='dp'),
        dict(name='AUFH-EXP3++(ACC)', kind='aufh', variant='ACC',
             xi_form='experimental', method='dp'),
        dict(name='CombUCB1', kind='combucb1'),
        dict(name='Thompson', kind='thompson'),
        dict(name='Anti-Jam-EXP3', kind='exp3'),
    ]
    return policies + list(extra)

def _config(environment, k_r, horizon, policies, packet_rate=False):
    return OrderedDict(environment=environment, policies=policies, k_r=k_r,
                       horizon=int(horizon), repetitions=10, master_seed=0,
                       cap=10**6, packet_rate=packet_rate)

def fig2():
    '''Stochastic regime, Delta = 0.2, k_r = 4.'''
    return OrderedDict(
        ('n{}_k{}'.format(n, k_r),
         _config(dict(regime='STOCHASTIC', n=n, delta=0.2, seed=0), k_r,
                 10**7, _policies()))
        for n, k_r in [(8, 4), (16, 4), (60, 4)])

def fig3():
    '''Best channel moves after 2500 rounds, k_r = 2.'''
    return OrderedDict(
        ('n{}_k2'.format(n),
         _config(dict(regime='CONTAMINATED', n=n, delta=0.2, seed=0,
                      contamination='experimental', switch_round=2500),
                 2, 8 * 10**6, _policies()))
        for n in (4, 8, 16))

def fig4():
    '''Oblivious jammer relocating the best channel every other slot.'''
    return OrderedDict(
        ('n{}_k2'.format(n),
         _config(dict(regime='ADVERSARIAL_OBLIVIOUS', n=n, delta=0.2, seed=0),
                 2, 8 * 10**6, _policies()))
        for n in (4, 8, 16))

def fig5():
    '''Adaptive jammer with memory 80.'''
    batched = dict(name='AUFH-EXP3++(EMP, mini-batch)', kind='aufh',
                   variant='EMP', xi_form='experimental', method='dp',
                   minibatch='auto')
    return OrderedDict(
        ('n{}_k2'.format(n),
         _config(dict(regime='ADVERSARIAL_ADAPTIVE', n=n, delta=0.2, seed=0,
                      memory=80, k_j=2),
                 2, 8 * 10**6, _policies([batched])))
        for n in (4, 8, 16))

def fig6():
    '''Received packet rate in every regime after 2e7 slots.'''

    regimes = [
        ('stochastic', dict(regime='STOCHASTIC')),
        ('oblivious', dict(regime='ADVERSARIAL_OBLIVIOUS')),
        ('adaptive', dict(regime='ADVERSARIAL_ADAPTIVE', memory=80, k_j=2)),
        ('mixed', dict(regime='MIXED', k_j=1)),
        ('contaminated', dict(regime='CONTAMINATED',
                              contamination='experimental',
                              switch_round=2500)),
    ]
    out = OrderedDict()
    for label, env in regimes:
        for n in (4, 8, 16):
            environment = dict(env, n=n, delta=0.2, seed=0)
            out['{}_n{}_k2'.format(label, n)] = _config(
                environment, 2, 2 * 10**7, _policies(), packet_rate=True)
    return out

def table1():
    '''Timing grid of both algorithm forms.'''
    return dict(grid=list(TABLE1_GRID), rounds=1000, warmup=100, cap=10**6)

PRESETS = OrderedDict(fig2=fig2, fig3=fig3, fig4=fig4, fig5=fig5, fig6=fig6,
                      table1=table1)

def load_preset(name):
    '''
    Arguments
    ---------
    name : str
        One of PRESETS.

    Returns
    -------
    preset : OrderedDict or dict
        Label -> config dictionary, or the bench settings for table1.
    '''
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError('Unknown preset {}, options: {}'.format(
            name, list(PRESETS)))
