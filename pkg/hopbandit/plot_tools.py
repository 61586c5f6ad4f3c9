import os
import csv
from collections import OrderedDict

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

def plot_regret(curves, write_dir, tag, logx=True, ylabel='regret',
                title=None, tight=False, dpi=150):
    '''
    Plot mean regret (solid) and mean + std (dashed) per policy
    and write to disk.

    Arguments
    ---------
    curves : dict
        Policy name -> (checkpoints, mean, std) arrays.
    write_dir : str
        Path to directory where figure is saved
    tag : str
        Filename = <tag>.png

    Keyword arguments
    -----------------
    logx : bool
        Logarithmic round axis (default : True)
    ylabel : str
        (default : 'regret')
    title : str, None
        (default : None)
    tight : bool
        call savefig with bbox_inches = 'tight'
    dpi : int
        (default : 150)

    Returns
    -------
    filename : str
    '''

    bbox_inches = 'tight' if tight else None
    filename = os.path.join(write_dir, tag + '.png')

    fig, ax = plt.subplots()
    for idx, (name, (t, mean, std)) in enumerate(curves.items()):
        color = 'C{}'.format(idx % 10)
        ax.plot(t, mean, color=color, ls='-', label=name)
        ax.plot(t, np.asarray(mean) + np.asarray(std), color=color, ls='--')

    if logx:
        ax.set_xscale('log')
    ax.set_xlabel('round t')
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)

    fig.savefig(filename, bbox_inches=bbox_inches, dpi=dpi)
    plt.close(fig)

    return filename

def read_results_csv(filename):
    '''
    Read a results.csv into per-policy curves of the primary
    regret metric.

    Returns
    -------
    curves : OrderedDict
        Policy name -> (checkpoints, mean, std).
    metric : str
    '''

    rows = OrderedDict()
    metric = 'regret'
    with open(filename, 'r') as handle:
        for row in csv.DictReader(handle):
            rows.setdefault(row['policy'], []).append(
                (int(row['checkpoint']), float(row['regret_mean']),
                 float(row['regret_std'])))
            metric = row['metric']

    curves = OrderedDict()
    for name, vals in rows.items():
        arr = np.array(vals, dtype=float)
        curves[name] = (arr[:, 0], arr[:, 1], arr[:, 2])

    return curves, metric

def plot_regret_csv(filename, write_dir, tag, **kwargs):
    '''
    Plot the curves stored in a results.csv file.

    Arguments
    ---------
    filename : str
        Path to results.csv
    write_dir : str
    tag : str

    Keyword arguments
    -----------------
    kwargs : {plot_regret_opts}
    '''

    curves, metric = read_results_csv(filename)
    kwargs.setdefault('ylabel', '{} regret'.format(metric))
    return plot_regret(curves, write_dir, tag, **kwargs)
