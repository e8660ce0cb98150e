"""Flow vectors of cross-section cycles and the inequalities they control:
the Gauss-image diameter bound, the slice curvature bound, the capacity/
life-time relation and the finite-life-time estimate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import exterior
from .mesh import (
    E3,
    CrossSectionCycle,
    TriMesh,
    gauss_image_diameter,
    gauss_image_length,
    harmonic_capacity,
    slice_mesh,
    total_curvature,
    vertex_normals,
)

SCHEMA_VERSION = 1

# Below this measured angle the flow is treated as axial: the life-time
# bound hypothesis (strictly positive tilt) fails and the bound is reported
# as unbounded instead of dividing by a discretization-noise angle.
ALPHA_ZERO_TOL = 1e-5


def flow_vector(cycle: CrossSectionCycle) -> np.ndarray:
    """J(Sigma) = integral of the conormal over the cycle (midpoint rule)."""
    if cycle.n_segments == 0:
        raise ValueError("cycle has no segments")
    return np.asarray((cycle.conormals * cycle.ds[:, None]).sum(axis=0))


def flow_vector_total(cycles) -> np.ndarray:
    """Flow vector of a union of cycles (additivity over components)."""
    cycles = list(cycles)
    if not cycles:
        raise ValueError("empty cycle union")
    return np.sum([flow_vector(c) for c in cycles], axis=0)


def flow_angle(J) -> float:
    """Angle between the flow vector and e3, in [0, pi/2)."""
    J = np.asarray(J, dtype=float)
    norm = float(np.linalg.norm(J))
    if norm == 0.0:
        raise ValueError("flow vector is zero")
    if J[2] <= 0:
        raise ValueError("flow vector must have a positive axial component")
    return float(np.arccos(np.clip(J[2] / norm, -1.0, 1.0)))


def verify_flow_invariance(mesh: TriMesh, levels, normals=None) -> float:
    """Max pairwise deviation of J(Sigma_t) across the given levels."""
    if normals is None:
        normals = vertex_normals(mesh)
    js = [flow_vector_total(slice_mesh(mesh, t, normals)) for t in levels]
    dev = 0.0
    for i in range(len(js)):
        for j in range(i + 1, len(js)):
            dev = max(dev, float(np.linalg.norm(js[i] - js[j])))
    return dev


def orthogonal_tilt_direction(J) -> np.ndarray:
    """Unit q orthogonal to J maximizing q3/||q||; for axial J any horizontal
    direction is optimal and e1 is returned deterministically."""
    J = np.asarray(J, dtype=float)
    q = E3 - (J[2] / float(J @ J)) * J
    nq = np.linalg.norm(q)
    if nq < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return q / nq


def max_axial_component_orthogonal(J) -> float:
    """max over unit q _|_ J of q3; equals sin(flow_angle(J))."""
    q = orthogonal_tilt_direction(np.asarray(J, dtype=float))
    return float(np.clip(q[2], 0.0, 1.0))


def _tangent_contraction(cycle: CrossSectionCycle, q: np.ndarray) -> np.ndarray:
    """pi_T(q) per segment with T the tangent line of the cycle, via the
    exterior-algebra operator *(sigma(T) ^ q)."""
    out = np.empty((cycle.n_segments, 3))
    for i in range(cycle.n_segments):
        frame = exterior.SubspaceFrame(3, cycle.tangents[i][None, :])
        out[i] = exterior.pi_V(frame, q).to_vector()
    return out


def verify_axial_cycle_identity(cycle: CrossSectionCycle, q) -> float:
    """|integral over the cycle of <pi_T(q), e3>|; vanishes for simple closed
    cycles by the divergence theorem in the slicing plane."""
    if not cycle.closed:
        raise ValueError("identity requires a closed cycle")
    q = np.asarray(q, dtype=float)
    vals = _tangent_contraction(cycle, q)[:, 2]
    return abs(float((vals * cycle.ds).sum()))


def verify_conormal_cycle_identity(cycle: CrossSectionCycle, q):
    """Residual pair (|integral <pi_T(q), gamma + e3>|, |... gamma - e3>|)
    after orthogonalizing q against the cycle's flow vector."""
    if not cycle.closed:
        raise ValueError("identity requires a closed cycle")
    q = np.asarray(q, dtype=float)
    J = flow_vector(cycle)
    q = q - (float(q @ J) / float(J @ J)) * J
    if np.linalg.norm(q) < 1e-14:
        return 0.0, 0.0
    pt = _tangent_contraction(cycle, q)
    plus = np.einsum("ij,ij->i", pt, cycle.normals + E3)
    minus = np.einsum("ij,ij->i", pt, cycle.normals - E3)
    return (abs(float((plus * cycle.ds).sum())),
            abs(float((minus * cycle.ds).sum())))


@dataclass(frozen=True)
class DiameterBoundRecord:
    """Per-cycle check of d(gauss image) >= 2 * alpha."""

    level: float
    diameter: float
    alpha: float
    margin: float
    witness_pair: tuple  # indices of the normals achieving the diameter
    witness_gap: float   # ||gamma(m+) - gamma(m-)|| at the witness pair
    witness_lower: float  # 2 q3 / ||q|| for the optimal q orthogonal to J


def verify_diameter_bound(cycle: CrossSectionCycle) -> DiameterBoundRecord:
    """Diameter bound on one simple cycle, with the extremal normal pair."""
    J = flow_vector(cycle)
    alpha = flow_angle(J)
    g = cycle.normals
    dots = np.clip(g @ g.T, -1.0, 1.0)
    i, j = np.unravel_index(int(np.argmin(dots)), dots.shape)
    diameter = float(np.arccos(dots[i, j]))
    witness_gap = float(np.linalg.norm(g[i] - g[j]))
    witness_lower = 2.0 * max_axial_component_orthogonal(J)
    return DiameterBoundRecord(
        level=cycle.level,
        diameter=diameter,
        alpha=alpha,
        margin=diameter - 2.0 * alpha,
        witness_pair=(int(i), int(j)),
        witness_gap=witness_gap,
        witness_lower=witness_lower,
    )


def verify_slice_curvature_bound(cycle: CrossSectionCycle):
    """(Gauss image length, 4*alpha) for a closed cycle; the first must
    dominate the second up to discretization."""
    if not cycle.closed:
        raise ValueError("the slice curvature bound requires a closed cycle")
    if cycle.n_segments < 3:
        raise ValueError("degenerate cycle")
    length = gauss_image_length(cycle)
    alpha = flow_angle(flow_vector(cycle))
    return length, 4.0 * alpha


def capacity_flux_prediction(t1: float, t2: float, J3: float) -> float:
    """(t2 - t1) / J3, the height-over-flux form of the capacity relation.

    Note: the Dirichlet energy measured on minimal tubes comes out as the
    reciprocal ratio J3 / (t2 - t1); see verify_capacity_law, which reports
    errors against both conventions.
    """
    return (t2 - t1) / J3


@dataclass(frozen=True)
class CapacityCheck:
    measured: float
    height_over_flux: float     # predicted value (t2 - t1)/J3
    flux_over_height: float     # J3/(t2 - t1), matches the measured energy
    rel_error_height_over_flux: float
    rel_error_flux_over_height: float


def verify_capacity_law(mesh: TriMesh, t1: float, t2: float,
                        normals=None) -> CapacityCheck:
    """Compare the measured Dirichlet-energy capacity of the slab mesh
    against the flux-based predictions."""
    loops = mesh.boundary_loops()
    if len(loops) != 2:
        raise ValueError(f"slab mesh must have exactly 2 boundary loops, has {len(loops)}")
    levels = [float(np.mean(mesh.vertices[lp, 2])) for lp in loops]
    tol = 1e-6 * (abs(t2 - t1) + 1.0)
    if abs(min(levels) - t1) > tol or abs(max(levels) - t2) > tol:
        raise ValueError(
            f"boundary loops sit at levels {sorted(levels)}, expected ({t1}, {t2})")
    lo = loops[int(np.argmin(levels))]
    hi = loops[int(np.argmax(levels))]
    measured = harmonic_capacity(mesh, lo, hi)
    mid = 0.5 * (t1 + t2)
    J = flow_vector_total(slice_mesh(mesh, mid, normals))
    pred_pub = capacity_flux_prediction(t1, t2, float(J[2]))
    pred_rec = float(J[2]) / (t2 - t1)
    return CapacityCheck(
        measured=measured,
        height_over_flux=pred_pub,
        flux_over_height=pred_rec,
        rel_error_height_over_flux=abs(measured - pred_pub) / pred_pub,
        rel_error_flux_over_height=abs(measured - pred_rec) / pred_rec,
    )


@dataclass(frozen=True)
class LifetimeBound:
    """Right-hand side of the life-time estimate ||J|| G cos(a) / (16 a^2)."""

    value: float            # math.inf when the tilt hypothesis fails
    unbounded: bool
    flat_contradiction: bool  # G == 0 with positive tilt cannot happen on a
                              # genuinely minimal tube

    def to_json_value(self):
        return "unbounded" if self.unbounded else self.value


def lifetime_bound(J, G: float, alpha_zero_tol: float = ALPHA_ZERO_TOL) -> LifetimeBound:
    if G < 0:
        raise ValueError("total curvature must be nonnegative")
    J = np.asarray(J, dtype=float)
    alpha = flow_angle(J)
    if alpha <= alpha_zero_tol:
        return LifetimeBound(math.inf, True, False)
    value = float(np.linalg.norm(J)) * G * math.cos(alpha) / (16.0 * alpha**2)
    return LifetimeBound(value, False, G == 0.0)


def sum_angle_bound(vectors, e):
    """(angle of the vector sum to e, max individual angle to e); the first
    never exceeds the second when all <v_i, e> >= 0."""
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    vs = [np.asarray(v, dtype=float) for v in vectors]
    if not vs:
        raise ValueError("empty vector system")
    angles = []
    for v in vs:
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError("zero vector in the system")
        c = float(v @ e) / nv
        if c < 0:
            raise ValueError("vector makes an obtuse angle with e")
        angles.append(float(np.arccos(np.clip(c, -1.0, 1.0))))
    total = np.sum(vs, axis=0)
    nt = np.linalg.norm(total)
    if nt == 0:
        raise ValueError("vector system sums to zero")
    alpha = float(np.arccos(np.clip(float(total @ e) / nt, -1.0, 1.0)))
    return alpha, max(angles)


# ---------------------------------------------------------------------------
# Whole-tube report


@dataclass
class SliceRecord:
    level: float
    n_components: int
    length: float
    gauss_diameter: float
    two_alpha: float
    gauss_length: float
    diameter_margin: float      # d - 2*alpha, min over components
    curvature_margin: float     # gauss length - 4*alpha, min over components
    J: tuple


@dataclass
class TubeReport:
    """Measured invariants and inequality margins of one discrete tube."""

    J: tuple
    J_norm: float
    alpha: float
    flow_deviation: float
    G: float
    clamped_defect: float
    slices: list
    capacity: CapacityCheck | None
    lifetime_bound: LifetimeBound
    slab_height: float
    tolerances: dict = field(default_factory=dict)

    def min_diameter_margin(self) -> float:
        return min(s.diameter_margin for s in self.slices)

    def min_curvature_margin(self) -> float:
        return min(s.curvature_margin for s in self.slices)

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "angle_unit": "radians",
            "flow_vector": list(self.J),
            "flow_norm": self.J_norm,
            "alpha": self.alpha,
            "flow_level_deviation": self.flow_deviation,
            "total_curvature": self.G,
            "clamped_positive_defect": self.clamped_defect,
            "slab_height": self.slab_height,
            "capacity": None if self.capacity is None else {
                "measured": self.capacity.measured,
                "height_over_flux": self.capacity.height_over_flux,
                "flux_over_height": self.capacity.flux_over_height,
                "rel_error_height_over_flux": self.capacity.rel_error_height_over_flux,
                "rel_error_flux_over_height": self.capacity.rel_error_flux_over_height,
            },
            "lifetime_bound": self.lifetime_bound.to_json_value(),
            "lifetime_flat_contradiction": self.lifetime_bound.flat_contradiction,
            "slices": [
                {
                    "level": s.level,
                    "components": s.n_components,
                    "length": s.length,
                    "gauss_diameter": s.gauss_diameter,
                    "two_alpha": s.two_alpha,
                    "gauss_length": s.gauss_length,
                    "diameter_margin": s.diameter_margin,
                    "curvature_margin": s.curvature_margin,
                    "flow_vector": list(s.J),
                }
                for s in self.slices
            ],
            "tolerances": dict(sorted(self.tolerances.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def slices_csv(self) -> str:
        cols = ("level", "components", "length", "gauss_diameter", "two_alpha",
                "gauss_length", "diameter_margin", "curvature_margin",
                "Jx", "Jy", "Jz")
        lines = [",".join(cols)]
        for s in self.slices:
            row = (s.level, s.n_components, s.length, s.gauss_diameter,
                   s.two_alpha, s.gauss_length, s.diameter_margin,
                   s.curvature_margin, *s.J)
            lines.append(",".join(f"{x:.17g}" if isinstance(x, float) else str(x)
                                  for x in row))
        return "\n".join(lines) + "\n"


def analyze_tube(mesh: TriMesh, levels=None, n_levels: int = 10,
                 compute_capacity: bool = True,
                 alpha_zero_tol: float = ALPHA_ZERO_TOL,
                 tolerances: dict | None = None) -> TubeReport:
    """Slice the tube, measure its flow vector and curvature, and evaluate
    every inequality margin."""
    zmin, zmax = mesh.x3_range()
    if levels is None:
        pad = 0.05 * (zmax - zmin)
        levels = list(np.linspace(zmin + pad, zmax - pad, n_levels))
    normals = vertex_normals(mesh)

    slice_records = []
    js = []
    for t in levels:
        cycles = slice_mesh(mesh, t, normals)
        J_level = flow_vector_total(cycles)
        js.append(J_level)
        recs = [verify_diameter_bound(c) for c in cycles]
        glens, cmargins = [], []
        for c in cycles:
            if c.closed:
                gl, fa = verify_slice_curvature_bound(c)
                glens.append(gl)
                cmargins.append(gl - fa)
        slice_records.append(SliceRecord(
            level=float(cycles[0].level),
            n_components=len(cycles),
            length=float(sum(c.length() for c in cycles)),
            gauss_diameter=max(r.diameter for r in recs),
            two_alpha=2.0 * flow_angle(J_level),
            gauss_length=float(sum(glens)) if glens else float("nan"),
            diameter_margin=min(r.margin for r in recs),
            curvature_margin=min(cmargins) if cmargins else float("nan"),
            J=tuple(float(x) for x in J_level),
        ))

    J = np.mean(js, axis=0)
    deviation = max(
        float(np.linalg.norm(a - b)) for i, a in enumerate(js) for b in js[i + 1:]
    ) if len(js) > 1 else 0.0
    G, clamped = total_curvature(mesh, return_clamped=True)
    capacity = None
    if compute_capacity and len(mesh.boundary_loops()) == 2:
        capacity = verify_capacity_law(mesh, zmin, zmax, normals)
    return TubeReport(
        J=tuple(float(x) for x in J),
        J_norm=float(np.linalg.norm(J)),
        alpha=flow_angle(J),
        flow_deviation=deviation,
        G=G,
        clamped_defect=clamped,
        slices=slice_records,
        capacity=capacity,
        lifetime_bound=lifetime_bound(J, G, alpha_zero_tol),
        slab_height=zmax - zmin,
        tolerances=tolerances or {},
    )
