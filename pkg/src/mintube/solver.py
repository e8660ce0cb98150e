"""Discrete minimal annuli spanning two horizontal circles.

The area functional is minimized with the boundary held fixed in two phases.
Phase 1 iterates implicit steps of the cotangent-Laplacian mean-curvature
direction: interior vertices are re-solved harmonically in the current
metric, with backtracking toward the previous positions whenever a full step
fails to decrease area.  This contracts fast from the ruled initial surface
but stalls once the remaining area gradient points along near-flat
(tangential sliding) directions.  Phase 2 finishes with damped Newton steps
on the exact second derivative of total triangle area, with the damping
parameter adapted by the realized-vs-predicted gradient decrease, which
resolves the flat directions the fixed-point iteration cannot.  The common
fixed point is a discrete minimal surface: zero cotangent mean-curvature
vector at every interior vertex.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import MeshError, TriMesh, cot_laplacian, slice_mesh
from .surfaces import _revolution_mesh


class NoAnnulusError(RuntimeError):
    """No embedded annulus spans the boundary circles (neck pinch detected)."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Circle:
    center: tuple  # (x, y, z); the circle lies in the plane x3 = z
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")
        if len(self.center) != 3:
            raise ValueError("center must be a 3-vector")


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 500
    tolerance: float = 1e-6       # normalized residual: max |H| * mean edge
    pinch_ratio: float = 0.02     # mid-slice length below this fraction of
                                  # the smaller boundary circumference aborts
    min_quality: float = 1e-4     # min triangle area / mean triangle area
    check_every: int = 5
    stall_window: int = 10        # harmonic phase hands over to Newton once
    stall_factor: float = 0.8     # res[-1] > stall_factor * res[-window]


@dataclass(frozen=True)
class AnnulusProblem:
    circle0: Circle
    circle1: Circle
    nu: int = 64
    nv: int = 32
    options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        t1, t2 = self.circle0.center[2], self.circle1.center[2]
        if not t1 < t2:
            raise ValueError("circle0 must lie strictly below circle1")
        if self.nu < 8 or self.nv < 2:
            raise ValueError("resolution too coarse: need nu >= 8, nv >= 2")

    @property
    def offset(self) -> float:
        c0, c1 = np.asarray(self.circle0.center), np.asarray(self.circle1.center)
        return float(np.linalg.norm((c1 - c0)[:2]))


@dataclass
class ConvergenceReport:
    iterations: int
    converged: bool
    area_history: list
    residual_history: list
    message: str = ""

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_area": self.area_history[-1] if self.area_history else None,
            "final_residual": (self.residual_history[-1]
                               if self.residual_history else None),
            "area_history": self.area_history,
            "residual_history": self.residual_history,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def initial_annulus(problem: AnnulusProblem) -> TriMesh:
    """Ruled surface between the two circles, triangulated nu x nv."""
    c0 = np.asarray(problem.circle0.center, dtype=float)
    c1 = np.asarray(problem.circle1.center, dtype=float)
    s = np.linspace(0.0, 1.0, problem.nv + 1)
    radii = (1 - s) * problem.circle0.radius + s * problem.circle1.radius
    heights = (1 - s) * c0[2] + s * c1[2]
    centers = (1 - s)[:, None] * c0[None, :2] + s[:, None] * c1[None, :2]
    return _revolution_mesh(radii, heights, problem.nu, centers=centers)


def _mean_curvature_residual(mesh: TriMesh, interior: np.ndarray):
    L, mass = cot_laplacian(mesh)
    Lx = L @ mesh.vertices
    h = np.linalg.norm(Lx[interior], axis=1) / mass[interior]
    return L, float(h.max()) * mesh.mean_edge_length()


def _cross_matrices(v: np.ndarray) -> np.ndarray:
    """(M,3) vectors -> (M,3,3) cross-product matrices [v]x."""
    zero = np.zeros(len(v))
    return np.array([[zero, -v[:, 2], v[:, 1]],
                     [v[:, 2], zero, -v[:, 0]],
                     [-v[:, 1], v[:, 0], zero]]).transpose(2, 0, 1)


def _area_hessian(verts: np.ndarray, tris: np.ndarray) -> sp.csr_matrix:
    """Exact second derivative of total triangle area, as a sparse
    (3N, 3N) matrix over stacked vertex coordinates.

    Per triangle with corners p0,p1,p2, normal n and unit normal nh, the
    area gradient at corner i is 0.5 (p_{i+1}-p_{i+2}) x nh; differentiating
    gives the blocks  -0.5 [e_i]x (I - nh nh^T) [e_j]x / |n|  plus the
    +-0.5 [nh]x terms from the cyclic edge dependence on p_j.
    """
    n_verts = len(verts)
    p = [verts[tris[:, k]] for k in range(3)]
    n = np.cross(p[1] - p[0], p[2] - p[0])
    nn = np.linalg.norm(n, axis=1)
    nh = n / nn[:, None]
    e = [p[1] - p[2], p[2] - p[0], p[0] - p[1]]
    proj = np.eye(3)[None] - np.einsum('mi,mj->mij', nh, nh)
    ex = [_cross_matrices(ei) for ei in e]
    nx = _cross_matrices(nh)
    rows, cols, vals = [], [], []
    for i in range(3):
        for j in range(3):
            block = -0.5 * np.einsum('mab,mbc,mcd->mad',
                                     ex[i], proj, ex[j]) / nn[:, None, None]
            if j == (i + 1) % 3:
                block = block - 0.5 * nx
            if j == (i + 2) % 3:
                block = block + 0.5 * nx
            vi, vj = tris[:, i], tris[:, j]
            for a in range(3):
                for b in range(3):
                    rows.append(3 * vi + a)
                    cols.append(3 * vj + b)
                    vals.append(block[:, a, b])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(3 * n_verts, 3 * n_verts))


def minimize_area(mesh: TriMesh, options: SolverOptions | None = None):
    """Relax interior vertices to a discrete minimal surface.

    Returns (minimized TriMesh, ConvergenceReport).  Boundary vertices are
    bit-identical to their input positions.  Area never increases across an
    accepted harmonic-replacement step; Newton-phase steps move within
    rounding error of the minimal area while driving the gradient to zero.
    """
    opts = options or SolverOptions()
    fixed = mesh.boundary_vertex_mask()
    if not fixed.any():
        raise MeshError("mesh has no boundary to pin")
    if len(mesh.boundary_loops()) != 2:
        raise MeshError(
            f"expected an annulus with 2 boundary loops, found {len(mesh.boundary_loops())}")
    interior = ~fixed
    verts = mesh.vertices.copy()
    cur = TriMesh(verts, mesh.triangles)

    zmin, zmax = cur.x3_range()
    mid_level = 0.5 * (zmin + zmax)
    loop_circ = []
    for lp in mesh.boundary_loops():
        p = mesh.vertices[lp]
        loop_circ.append(float(np.linalg.norm(np.roll(p, -1, 0) - p, axis=1).sum()))
    pinch_len = opts.pinch_ratio * min(loop_circ)

    areas = [cur.area()]
    residuals = []
    converged = False
    message = ""

    def safety_checks(m, it):
        # Pinch first: a collapsing neck also degenerates triangles, and the
        # topological diagnosis is the one worth reporting.
        try:
            with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
                mid = slice_mesh(m, mid_level)
        except Exception:
            raise NoAnnulusError(
                "no annulus: the surface tore at the mid level") from None
        if sum(c.length() for c in mid) < pinch_len:
            raise NoAnnulusError(
                "no annulus: neck pinched below "
                f"{opts.pinch_ratio:.0%} of the boundary circumference")
        tri_areas = m.triangle_areas()
        if tri_areas.min() < opts.min_quality * tri_areas.mean():
            raise ConvergenceError(
                f"mesh degenerated (min/mean triangle area "
                f"{tri_areas.min() / tri_areas.mean():.2e})",
                ConvergenceReport(it, False, areas, residuals))

    # Phase 1: implicit mean-curvature (harmonic replacement) iteration.
    it = 0
    for it in range(1, opts.max_iterations + 1):
        L, res = _mean_curvature_residual(cur, interior)
        residuals.append(res)
        if res <= opts.tolerance:
            converged = True
            break
        if (len(residuals) > opts.stall_window
                and res > opts.stall_factor * residuals[-1 - opts.stall_window]):
            break  # contraction has flattened out; Newton phase takes over
        A = L[interior][:, interior].tocsc()
        rhs = -L[interior][:, fixed] @ cur.vertices[fixed]
        new_int = spla.spsolve(A, rhs)
        if not np.all(np.isfinite(new_int)):
            raise ConvergenceError(
                "linear solve produced non-finite positions",
                ConvergenceReport(it, False, areas, residuals))
        step = 1.0
        accepted = False
        old_int = cur.vertices[interior]
        while step >= 1e-6:
            trial = cur.vertices.copy()
            trial[interior] = (1 - step) * old_int + step * new_int
            cand = TriMesh(trial, cur.triangles)
            if cand.area() <= areas[-1] * (1 + 1e-12):
                cur = cand
                areas.append(cand.area())
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # area cannot decrease further; polish the gradient instead
        if it % opts.check_every == 0:
            safety_checks(cur, it)

    # Phase 2: damped Newton on the exact area Hessian.  The damping mu is
    # adapted by the realized/predicted gradient decrease (for the damped
    # system the predicted remaining gradient is exactly -mu * step).
    if not converged:
        idx = np.where(interior)[0]
        dofs = (3 * idx[:, None] + np.arange(3)).ravel()
        eye = sp.identity(len(dofs), format='csc')
        tris = cur.triangles

        def grad_resid(m):
            L, mass = cot_laplacian(m)
            grad = (L @ m.vertices)[interior]
            res = float((np.linalg.norm(grad, axis=1) / mass[interior]).max()
                        ) * m.mean_edge_length()
            return grad, res

        grad, res = grad_resid(cur)
        gnorm = np.linalg.norm(grad)
        mu = 1e-6 * max(gnorm, 1e-30)
        escalate = 2.0
        while it < opts.max_iterations:
            if res <= opts.tolerance:
                converged = True
                break
            it += 1
            hess = _area_hessian(cur.vertices, tris)
            hii = hess[dofs][:, dofs].tocsc()
            accepted = False
            for _ in range(25):
                step = spla.spsolve(hii + mu * eye, -grad.ravel())
                if not np.all(np.isfinite(step)):
                    mu *= escalate
                    escalate *= 2.0
                    continue
                trial = cur.vertices.copy()
                trial[interior] += step.reshape(-1, 3)
                cand = TriMesh(trial, tris)
                grad2, res2 = grad_resid(cand)
                gnorm2 = np.linalg.norm(grad2)
                if gnorm2 < gnorm:
                    predicted = mu * np.linalg.norm(step)
                    gain = (gnorm - gnorm2) / max(gnorm - predicted, 1e-300)
                    cur, grad, res, gnorm = cand, grad2, res2, gnorm2
                    mu *= max(1.0 / 3.0, 1.0 - (2.0 * min(gain, 1.0) - 1.0) ** 3)
                    escalate = 2.0
                    accepted = True
                    break
                mu *= escalate
                escalate *= 2.0
            residuals.append(res)
            areas.append(cur.area())
            if not accepted:
                message = "damped Newton step rejected at maximal damping"
                break
            if it % opts.check_every == 0:
                safety_checks(cur, it)
        else:
            it = opts.max_iterations

    if converged:
        safety_checks(cur, it)
    report = ConvergenceReport(it, converged, areas, residuals, message)
    if not converged:
        raise ConvergenceError(
            message or f"not converged after {it} iterations "
            f"(residual {residuals[-1]:.3e} > {opts.tolerance:.1e})",
            report)
    # Boundary rows were never written; assert the contract cheaply.
    assert np.array_equal(cur.vertices[fixed], mesh.vertices[fixed])
    return cur, report


def solve_annulus(problem: AnnulusProblem):
    """Build the ruled initial annulus and minimize its area."""
    return minimize_area(initial_annulus(problem), problem.options)
