"""Probabilities of causation from stratified data."""

from ._stratcause import (
    Error,
    Estimate,
    IncompatibilityError,
    Interval,
    Quantity,
    StratifiedJoint,
    __version__,
    bounds,
    joint_from_dict,
    load_counts,
    pn_point,
    pns_point,
    run_cli,
    select,
    simulate,
    verify,
)

__all__ = [
    "Error",
    "Estimate",
    "IncompatibilityError",
    "Interval",
    "Quantity",
    "StratifiedJoint",
    "__version__",
    "bounds",
    "joint_from_dict",
    "load_counts",
    "pn_point",
    "pns_point",
    "run_cli",
    "select",
    "simulate",
    "verify",
]
