'''
This package contains tools to learn channel-hopping strategies with
combinatorial semi-bandit policies and to simulate them against
stochastic, jammed and contaminated wireless channels.
'''

__version__ = '0.1'

from .strategy import (Strategy, StrategySpace, CoveringSet, RegretTrace,
                       SpaceTooLargeError, ConfigError)
from .policy import AUFHExp3, Schedule
from .environment import EnvironmentSpec, make_environment
from .experiment import ExperimentConfig, run_experiment
