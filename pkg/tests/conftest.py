"""Shared fixtures: analytic catenoid bands at the acceptance resolutions
and solver-produced offset annuli at two refinement levels.

Solves are session-scoped because the fine annulus takes minutes; every
test sees the same converged meshes.
"""

import numpy as np
import pytest

from mintube import solver, surfaces


def catenoid(a, v_min, v_max, nu, nv):
    return surfaces.catenoid_mesh(surfaces.CatenoidSpec(a, v_min, v_max, nu, nv))


@pytest.fixture(scope="session")
def catenoid_fine():
    """a=1 band over [-1, 1] at the acceptance resolution."""
    return catenoid(1.0, -1.0, 1.0, 256, 128)


@pytest.fixture(scope="session")
def catenoid_fine_a2():
    return catenoid(2.0, -1.0, 1.0, 256, 128)


@pytest.fixture(scope="session")
def catenoid_coarse():
    """One refinement level below catenoid_fine."""
    return catenoid(1.0, -1.0, 1.0, 128, 64)


@pytest.fixture(scope="session")
def catenoid_wide():
    """a=1 band over the doubled slab [-2, 2], same vertical density."""
    return catenoid(1.0, -2.0, 2.0, 256, 256)


def offset_problem(nu, nv):
    return solver.AnnulusProblem(
        solver.Circle((0.0, 0.0, 0.0), 1.0),
        solver.Circle((0.3, 0.0, 1.0), 1.0),
        nu=nu, nv=nv,
    )


@pytest.fixture(scope="session")
def annulus_coarse():
    """(mesh, report) for the offset-0.3 problem at 128x64."""
    return solver.solve_annulus(offset_problem(128, 64))


@pytest.fixture(scope="session")
def annulus_fine():
    """(mesh, report) for the offset-0.3 problem at 256x128."""
    return solver.solve_annulus(offset_problem(256, 128))


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
