"""Gaussian-process experiment planning on a virtual melt-electrowriting machine."""

import json

from ._gpjet import *  # noqa: F401,F403
from ._gpjet import GpjetError, run_experiment as _run_experiment


def run(name, seed=0, config=None):
    """Run an experiment recipe; `config` is a dict of overrides."""
    return _run_experiment(name, seed, json.dumps(config) if config else "")
