"""Multiparameter quantum estimation bounds (C++ core)."""

import json as _json

from ._qbound import (  # noqa: F401
    ConfigError,
    check_suite,
    cq_bound,
    dephased_ghz_marginals,
    fidelity_qfim,
    ghz_density,
    is_unital,
    magfield_qfim1,
    magfield_qfim_full,
    marginals,
    noisy_cq_bound,
    pauli,
    pauli_split_cq_bound,
    qfim_exact,
    qfim_rdm,
    saturation_residual,
)
from . import _qbound


def run_config(config, sweep=False, seed=0):
    """Run a scenario given as a dict or JSON text; returns the parsed JSON report."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_qbound.run_config(text, sweep=sweep, seed=seed))


def magfield(lambda_=0.3, theta=(0.3, 0.2, 0.1), n_min=2, n_max=8, exact_cap=5):
    """Magnetic-field preset sweep; returns the parsed JSON report."""
    return _json.loads(_qbound.magfield(lambda_, list(theta), n_min, n_max, exact_cap))
