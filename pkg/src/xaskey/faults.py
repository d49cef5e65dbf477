"""Relative perturbation of closed-form constants, for fault-sensitivity checks.

Usage::

    with inject("E", 1e-6, n=3):
        run_identity("difeqP", inst)   # now fails

A fault may be restricted to one degree ``n`` and/or one parameter set
``match``; it then only fires when both agree with the call site.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any

QUANTITIES = ("E", "f_hat", "b_hat", "kappa_hat", "h")

_active: list["Fault"] = []


@dataclass(frozen=True)
class Fault:
    quantity: str
    rel: float
    n: int | None = None
    match: Any = None


@contextmanager
def inject(quantity, rel, n=None, match=None):
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    fault = Fault(quantity, rel, n, match)
    _active.append(fault)
    try:
        yield fault
    finally:
        _active.remove(fault)


def active() -> bool:
    return bool(_active)


def apply(quantity, value, n=None, params=None):
    for f in _active:
        if f.quantity != quantity:
            continue
        if f.n is not None and f.n != n:
            continue
        if f.match is not None and f.match != params:
            continue
        value = value * (1.0 + f.rel)
    return value
