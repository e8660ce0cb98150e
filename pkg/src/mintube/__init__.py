"""Numerical toolkit for embedded minimal tubes: exterior-algebra identities,
flow vectors of cross-sections, Gauss-image diameter bounds, capacity and
life-time estimates, exercised on catenoids and solver-produced annuli."""

__version__ = "0.1.0"
