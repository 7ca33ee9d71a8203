"""beta-Laplacian on regular trees: principal eigenvalue, resolvent and heat flow."""

import json

from ._core import (
    BoundsError,
    ConfigError,
    DomainError,
    EigenResult,
    IterationLimitError,
    NoEigenvalueError,
    ParseError,
    RangeError,
    ShapeError,
    SpectralWindowError,
    Trajectory,
    apply_K,
    bounds,
    build_supersolution,
    chain_eigenfunction,
    check_supersolution,
    closed_form_beta0,
    default_depth,
    evolve,
    fit_inverse_square,
    level_average,
    level_laplacian,
    max_admissible_depth,
    node_paths,
    principal_eigenvalue,
    psi,
    solve_resolvent,
    step_implicit,
    supercritical_diagnostic,
    tree_laplacian,
)
from ._core import verify as _verify_json

__version__ = "0.1.0"


def verify(suites=("operator", "spectrum", "evolution"), seed=20240601, samples=50, pairs=100):
    """Run the property suites and return the report as a dict."""
    return json.loads(_verify_json(list(suites), seed, samples, pairs))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
