"""Finite-difference residual verification and diagnostic checks.

Residuals of the backward equation (-w_t + V w - w_xx/2) and its
adjoint (+Phi_t + V Phi - Phi_xx/2) are evaluated at interior nodes
with 2nd-order central differences; the relative figure normalizes by
the field's maximum magnitude (floored at 1e-12) because the solutions
decay exponentially in x and pointwise relative error is meaningless in
the tail.

The bound 0 <= w <= h(s-t, x) and the vanishing limit at x -> 0 are
diagnostics: they are reported, never asserted, since derived closed
forms can violate the bound (the fixed-boundary case with s > 1 does).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boundary import Boundary, integral_fprime
from .grids import FieldKind, GridField, GridSpec, PotentialSpec
from .kernels import derived_kernel, simpson_weights, symmetric_nodes
from .solutions import GammaPoly, closed_w_gamma, u_lambda

RELATIVE_FLOOR = 1e-12


@dataclass(frozen=True)
class ResidualReport:
    """Extrema of a PDE residual over the interior of a grid."""

    max_abs: float
    max_rel: float
    t_at_max: float
    x_at_max: float
    grid: GridSpec

    def to_json(self) -> dict:
        return {
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "t_at_max": self.t_at_max,
            "x_at_max": self.x_at_max,
            "nt": self.grid.nt,
            "nx": self.grid.nx,
            "dt": self.grid.dt,
            "dx": self.grid.dx,
        }


@dataclass(frozen=True)
class DiagnosticReport:
    violation_count: int
    worst_margin: float
    total_points: int

    def __post_init__(self):
        if not 0 <= self.violation_count <= self.total_points:
            raise ValueError("violation count outside [0, total_points]")

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        return {
            "violations": self.violation_count,
            "total": self.total_points,
            "worst_margin": self.worst_margin,
        }


def _residual_report(field: GridField, resid: np.ndarray) -> ResidualReport:
    spec = field.spec
    mags = np.abs(resid)
    flat = int(np.argmax(mags))
    i, j = np.unravel_index(flat, mags.shape)
    max_abs = float(mags[i, j])
    scale = max(float(np.max(np.abs(field.values))), RELATIVE_FLOOR)
    t_at = spec.t_min + (i + 1) * spec.dt
    x_at = spec.x_min + (j + 1) * spec.dx
    return ResidualReport(max_abs, max_abs / scale, float(t_at), float(x_at), spec)


def _central_residual(field: GridField, v: PotentialSpec, time_sign: float) -> np.ndarray:
    spec = field.spec
    if spec.nt < 5 or spec.nx < 5:
        raise ValueError(f"residual check needs nt, nx >= 5, got {spec.nt}x{spec.nx}")
    w = field.values
    vv = v.sample(spec)
    wt = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2.0 * spec.dt)
    wxx = (w[1:-1, 2:] - 2.0 * w[1:-1, 1:-1] + w[1:-1, :-2]) / (spec.dx ** 2)
    return (time_sign * wt + vv[1:-1, 1:-1] * w[1:-1, 1:-1] - 0.5 * wxx)


def residual_backward(w: GridField, v: PotentialSpec) -> ResidualReport:
    """Residual of -w_t + V w - w_xx/2 at interior nodes."""
    return _residual_report(w, _central_residual(w, v, -1.0))


def residual_forward(phi: GridField, v: PotentialSpec) -> ResidualReport:
    """Residual of +Phi_t + V Phi - Phi_xx/2 at interior nodes."""
    return _residual_report(phi, _central_residual(phi, v, +1.0))


def check_inequality(w: GridField, s: float) -> DiagnosticReport:
    """Count grid nodes violating 0 <= w(t,x) <= h(s-t, x).

    Requires a real-valued field on a grid with t < s and x >= 0.  The
    worst margin is the most negative of (w, h - w) over the grid;
    negative values measure how far the bound is broken.
    """
    if w.kind is not FieldKind.REAL or np.any(w.values.imag != 0.0):
        raise ValueError("inequality check needs a real-valued field")
    spec = w.spec
    if spec.t_max >= s:
        raise ValueError(f"grid must satisfy t < s = {s}")
    if spec.x_min < 0.0:
        raise ValueError("grid must satisfy x >= 0")
    tt, xx = spec.mesh()
    bound = np.where(xx > 0.0, derived_kernel(s - tt, xx), 0.0)
    vals = w.real_values
    margin = np.minimum(vals, bound - vals)
    violations = int(np.count_nonzero(margin < 0.0))
    return DiagnosticReport(violations, float(margin.min()), vals.size)


def check_vanishing_at_origin(w_eval: Callable[[float, float], float], t: float,
                              x_probes: Sequence[float]) -> DiagnosticReport:
    """Probe |w(t, x)| on a decreasing sequence x_k -> 0.

    Linear decay is the pass criterion: every derived solution carries
    an explicit factor of x at t = 0.  The check requires (a) the
    magnitudes to be nonincreasing along the probes, and (b) the final
    slope |w|/x to stay below the bound set by the previous probe,
    |w(x_last)| <= tol * x_last with tol the observed slope
    |w(x_prev)|/x_prev times the geometric mean of the probe ratio.
    A field with a nonzero limit at 0 grows its slope by the full probe
    ratio per step and fails (b); linear or faster decay keeps the
    slope essentially constant and passes.
    """
    probes = np.asarray(list(x_probes), dtype=float)
    if probes.size < 3 or np.any(probes <= 0.0) or np.any(np.diff(probes) >= 0.0):
        raise ValueError("probes must be at least 3 positive decreasing values")
    if probes[-1] > 1e-6:
        raise ValueError("probe sequence must reach <= 1e-6")
    vals = np.array([abs(complex(w_eval(t, xk))) for xk in probes])
    slack = 1e-9
    decrease_viol = int(np.count_nonzero(vals[1:] > vals[:-1] * (1.0 + slack) + 1e-300))
    worst_decrease = float(np.min(vals[:-1] - vals[1:])) if vals.size > 1 else 0.0
    slope_prev = vals[-2] / probes[-2]
    slope_last = vals[-1] / probes[-1]
    slope_tol = slope_prev * np.sqrt(probes[-2] / probes[-1]) * (1.0 + slack)
    final_margin = float(slope_tol - slope_last + 1e-300)
    final_viol = int(final_margin < 0.0)
    worst = min(worst_decrease, final_margin)
    return DiagnosticReport(decrease_viol + final_viol, worst, probes.size)


def quadrature_match(b: Boundary, g: GammaPoly, t: float, x: float,
                     nodes: int = 16001) -> float:
    """Mismatch between the closed form and the direct lambda-quadrature.

    Integrates Gamma(lam) * w1_lambda over the symmetric window
    |lam| <= 40/sqrt(s-t) + X/(s-t) with composite Simpson and returns
    |closed - quadrature| / (1 + |closed|).  Requires s - t >= 0.05.
    """
    s = b.horizon_s
    if s - t < 0.05:
        raise ValueError(f"quadrature window calibrated for s - t >= 0.05, got {s - t}")
    shifted = x + integral_fprime(b, t, s)
    half_width = 40.0 / np.sqrt(s - t) + abs(shifted) / (s - t)
    lam = symmetric_nodes(half_width, nodes)
    weights = simpson_weights(nodes, lam[1] - lam[0])
    drift = x - integral_fprime(b, 0.0, t)
    u_vals = u_lambda(b, lam, t, x)
    integrand = g(lam) * (drift - 1j * lam * t) * u_vals
    m = nodes // 2
    folded = weights[m] * integrand[m] + np.sum(
        weights[m + 1:] * (integrand[m + 1:] + integrand[m - 1::-1])
    )
    quad = float((folded / (2.0 * np.pi)).real)
    closed = closed_w_gamma(b, g, t, x)
    return abs(closed - quad) / (1.0 + abs(closed))
