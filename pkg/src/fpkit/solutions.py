"""Closed-form solutions of the moving-boundary backward equation.

The backward equation -w_t + x f''(t) w = w_xx / 2 admits a family of
lambda-parameterized separable solutions.  ``phi_lambda`` solves the
adjoint (forward) equation, ``u_lambda`` the backward one; their product
is independent of (t, x), which makes the pair-transformation integral
exact and lets every lambda-integral collapse onto the kernel family.

``closed_w`` and ``closed_w_gamma`` are the contour-integrated real
solutions; ``closed_w2`` is the second antiderivative variant, kept as
an explicit two-term difference because its identical vanishing is a
tested artifact rather than an assumption.  ``kappa`` is the resulting
closed-form approximation to the first hitting time density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .boundary import Boundary, eval_fprime, integral_fprime, integral_fprime_sq
from .kernels import MAX_ORDER, heat_kernel, kernel_n

# largest Gamma polynomial degree: kernel order degree+1 must stay <= 12
MAX_GAMMA_DEGREE = MAX_ORDER - 1


@dataclass(frozen=True)
class GammaPoly:
    """Polynomial multiplier Gamma(lam) = sum_n coeffs[n] * (-i lam)^n."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            coeffs = (1.0,)
        if len(coeffs) - 1 > MAX_GAMMA_DEGREE:
            raise ValueError(
                f"Gamma degree {len(coeffs) - 1} exceeds cap {MAX_GAMMA_DEGREE}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape, dtype=complex)
        for c in reversed(self.coeffs):
            out = out * (-1j * lam) + c
        return out if out.ndim else complex(out)


class SolutionVariant(Enum):
    FIRST = "first"    # from the antiderivative vanishing at t = 0
    SECOND = "second"  # from the antiderivative vanishing at t = s; identically 0


@dataclass(frozen=True)
class ClosedFormSolution:
    """A contour-integrated solution selected by boundary, Gamma, and variant."""

    boundary: Boundary
    gamma: GammaPoly = field(default_factory=lambda: GammaPoly((1.0,)))
    variant: SolutionVariant = SolutionVariant.FIRST

    def __call__(self, t, x):
        if self.variant is SolutionVariant.SECOND:
            return closed_w2(self.boundary, t, x)
        return closed_w_gamma(self.boundary, self.gamma, t, x)


def _check_t_range(b: Boundary, t, strict_upper: bool = False):
    t = np.asarray(t)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    if strict_upper:
        # the kernels blow up at t = s; keep a floor on the remaining time
        if np.any(b.horizon_s - t < 1e-9):
            raise ValueError(f"t must satisfy horizon - t >= 1e-9, horizon={b.horizon_s}")
    elif np.any(t > b.horizon_s):
        raise ValueError(f"t must be <= horizon {b.horizon_s}")


def phi_lambda(b: Boundary, lam, t, x):
    """Adjoint-equation solution; log is affine in x for every lam.

    exp{ int_0^t (f')^2/2 - x f'(t) - lam^2 t / 2 - i lam (x - int_0^t f') }
    """
    _check_t_range(b, t)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    expo = (0.5 * integral_fprime_sq(b, 0.0, t) - x * eval_fprime(b, t)
            - 0.5 * lam * lam * t
            - 1j * lam * (x - integral_fprime(b, 0.0, t)))
    out = np.exp(expo)
    return out if out.ndim else complex(out)


def u_lambda(b: Boundary, lam, t, x):
    """Backward-equation solution paired with ``phi_lambda``.

    exp{ int_t^s (f')^2/2 + x f'(t) } *
    exp{ -lam^2 (s-t)/2 + i lam (x + int_t^s f') }
    """
    _check_t_range(b, t)
    s = b.horizon_s
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    expo = (0.5 * integral_fprime_sq(b, t, s) + x * eval_fprime(b, t)
            - 0.5 * lam * lam * (s - t)
            + 1j * lam * (x + integral_fprime(b, t, s)))
    out = np.exp(expo)
    return out if out.ndim else complex(out)


def product_phi_u(b: Boundary, lam):
    """phi_lambda * u_lambda, independent of (t, x)."""
    s = b.horizon_s
    lam = np.asarray(lam, dtype=float)
    expo = (0.5 * integral_fprime_sq(b, 0.0, s) - 0.5 * lam * lam * s
            + 1j * lam * integral_fprime(b, 0.0, s))
    out = np.exp(expo)
    return out if out.ndim else complex(out)


def b2_first(b: Boundary, lam, t):
    """Antiderivative of -(f'(t) + i lam) * product, chosen to vanish at t = 0."""
    _check_t_range(b, t)
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    out = -(integral_fprime(b, 0.0, t) + 1j * lam * t) * product_phi_u(b, lam)
    return out if out.ndim else complex(out)


def b2_second(b: Boundary, lam, t):
    """Same derivative as ``b2_first`` but vanishing at t = s."""
    _check_t_range(b, t)
    s = b.horizon_s
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    out = (integral_fprime(b, t, s) + 1j * lam * (s - t)) * product_phi_u(b, lam)
    return out if out.ndim else complex(out)


def w1_lambda(b: Boundary, lam, t, x):
    """Lambda-space solution from the first antiderivative:
    ({x - int_0^t f'} - i lam t) * u_lambda."""
    _check_t_range(b, t, strict_upper=True)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    out = ((x - integral_fprime(b, 0.0, t)) - 1j * lam * t) * u_lambda(b, lam, t, x)
    return out if out.ndim else complex(out)


def w2_lambda(b: Boundary, lam, t, x):
    """Lambda-space solution from the second antiderivative:
    ({x + int_t^s f'} + i lam (s-t)) * u_lambda."""
    _check_t_range(b, t, strict_upper=True)
    s = b.horizon_s
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    out = ((x + integral_fprime(b, t, s)) + 1j * lam * (s - t)) * u_lambda(b, lam, t, x)
    return out if out.ndim else complex(out)


def _prefactor_and_args(b: Boundary, t, x):
    s = b.horizon_s
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    amp = np.exp(0.5 * integral_fprime_sq(b, t, s) + x * eval_fprime(b, t))
    drift = x - integral_fprime(b, 0.0, t)          # factor in front of kernel_n
    shifted = x + integral_fprime(b, t, s)          # kernel spatial argument
    return amp, drift, shifted, s - t


def closed_w(b: Boundary, t, x):
    """Contour-integrated solution of the backward equation.

    A(t,x) * [ (x - int_0^t f') k(s-t, X) + t * (X/(s-t)) k(s-t, X) ]
    with X = x + int_t^s f' and A = exp{ int_t^s (f')^2/2 + x f'(t) }.
    """
    _check_t_range(b, t, strict_upper=True)
    amp, drift, shifted, st = _prefactor_and_args(b, t, x)
    k = heat_kernel(st, shifted)
    t = np.asarray(t, dtype=float)
    out = amp * (drift * k + t * (shifted / st) * k)
    return out if out.ndim else float(out)


def closed_w_gamma(b: Boundary, g: GammaPoly, t, x):
    """Gamma-polynomial member of the solution family.

    A(t,x) * sum_n c_n [ (x - int_0^t f') kernel_n(n, s-t, X)
                         + t * kernel_n(n+1, s-t, X) ].
    Gamma = (1,) reduces to ``closed_w``.
    """
    _check_t_range(b, t, strict_upper=True)
    amp, drift, shifted, st = _prefactor_and_args(b, t, x)
    t = np.asarray(t, dtype=float)
    total = np.zeros(np.broadcast(amp, drift, shifted, t).shape)
    for n, c in enumerate(g.coeffs):
        if c == 0.0:
            continue
        total = total + c * (drift * kernel_n(n, st, shifted)
                             + t * kernel_n(n + 1, st, shifted))
    out = amp * total
    return out if out.ndim else float(out)


def closed_w2(b: Boundary, t, x):
    """Second contour-integrated variant, an explicit two-term difference.

    Both terms equal A * X * k(s-t, X); the function returns their
    difference so the cancellation itself is observable.  The result is
    zero up to floating cancellation of two equal terms.
    """
    _check_t_range(b, t, strict_upper=True)
    amp, _, shifted, st = _prefactor_and_args(b, t, x)
    term_direct = amp * shifted * heat_kernel(st, shifted)
    # same quantity assembled through the derived kernel, (s-t) * h = X * k
    term_via_h = amp * st * ((shifted / st) * heat_kernel(st, shifted))
    out = term_direct - term_via_h
    return out if out.ndim else float(out)


def closed_w2_terms(b: Boundary, t, x):
    """The two (equal) terms whose difference ``closed_w2`` returns."""
    _check_t_range(b, t, strict_upper=True)
    amp, _, shifted, st = _prefactor_and_args(b, t, x)
    term_direct = amp * shifted * heat_kernel(st, shifted)
    term_via_h = amp * st * ((shifted / st) * heat_kernel(st, shifted))
    return term_direct, term_via_h


def kappa(b: Boundary, x):
    """Closed-form approximation to the first hitting time density at the horizon:
    x * k(s, x + int_0^s f').  Requires x >= 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("kappa requires x >= 0")
    s = b.horizon_s
    out = x * heat_kernel(s, x + integral_fprime(b, 0.0, s))
    return out if out.ndim else float(out)
