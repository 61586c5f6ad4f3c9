from setuptools import setup

setup(name='hopbandit',
      version='0.1',
      description='Combinatorial semi-bandit channel access with '
                  'AUFH-EXP3++ and jamming simulations.',
      license='MIT',
      packages=['hopbandit'],
      install_requires=['numpy', 'scipy', 'numba', 'matplotlib'],
      extras_require={'mpi': ['mpi4py']},
      tests_require=['hypothesis'],
      entry_points={'console_scripts': ['hopbandit=hopbandit.cli:main']},
      test_suite='tests',
      zip_safe=False)
