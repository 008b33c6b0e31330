"""Harmonic maps between generalized Lagrange spaces."""

import json

from ._core import (
    DegenerateDenominator,
    DomainError,
    Error,
    Expr,
    InvalidArgument,
    NumericalError,
    ParseError,
    Preset,
    SingularMetric,
    christoffel,
    curvature,
    em_tensors,
    energy,
    geodesic,
    make_preset,
    metric_at,
    parse,
    preset_names,
    run,
    task_names,
)


def run_scenario(task, scenario, overrides=()):
    """Runs a task on a scenario dict; returns (exit_code, report dict)."""
    code, report, _ = run(task, json.dumps(scenario), list(overrides))
    return code, json.loads(report)


__all__ = [name for name in dir() if not name.startswith("_")]
