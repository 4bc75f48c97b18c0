"""Stochastic cross-checks for the closed-form machinery.

Two estimators:

* ``first_passage_histogram`` -- empirical first-passage times of
  standard Brownian motion to the moving level x0 + int_0^t f', with
  the intra-step Brownian-bridge correction exp(-2 d1 d2 / dt) so the
  discrete scheme does not undercount crossings.  For a fixed level the
  corrected scheme samples the exact crossing-step distribution.

* ``bessel_bridge_fk`` -- Feynman-Kac estimate of
  E[exp(-int_0^s f''(u) R_u du)] where R is a three-dimensional Bessel
  bridge from x at time 0 to the origin at time s, realized as the
  modulus of a 3-D Brownian bridge (positivity is automatic).

Reproducibility contract: paths are processed in fixed-size blocks and
block ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``.  A path's
stream is a pure function of (seed, path index), so results are
independent of how blocks are scheduled across workers, and a single
worker reproduces outputs bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .boundary import Boundary, eval_fsecond, integral_fprime
from .kernels import derived_kernel, heat_kernel, simpson_weights

#: paths per RNG block; fixed so the block decomposition (and therefore
#: every random stream) does not depend on worker count
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class MCConfig:
    n_paths: int
    n_steps: int
    seed: int
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.n_steps < 2:
            raise ValueError(f"n_steps must be >= 2, got {self.n_steps}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_paths: int

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("standard error cannot be negative")

    def to_json(self) -> dict:
        return {"mean": self.mean, "std_error": self.std_error, "n_paths": self.n_paths}


@dataclass(frozen=True)
class DensityHistogram:
    """Binned first-passage mass over [0, s]; non-crossing paths are the deficit."""

    bin_edges: np.ndarray
    masses: np.ndarray
    n_crossed: int
    n_total: int

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if np.any(np.diff(edges) <= 0.0):
            raise ValueError("bin edges must be increasing")
        if masses.size != edges.size - 1 or np.any(masses < 0.0):
            raise ValueError("masses must be nonnegative, one per bin")
        if masses.sum() > 1.0 + 1e-12:
            raise ValueError("masses sum above 1")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "masses", masses)


@dataclass(frozen=True)
class DensityComparison:
    """Per-bin table: empirical mass vs closed-form columns (report only)."""

    bin_edges: np.ndarray
    empirical: np.ndarray
    kappa_mass: np.ndarray
    reference_mass: np.ndarray
    z_scores: np.ndarray
    n_total: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(block,)))
    )


def _block_sizes(n_paths: int):
    sizes = []
    done = 0
    while done < n_paths:
        sizes.append(min(BLOCK_SIZE, n_paths - done))
        done += sizes[-1]
    return sizes


def _run_blocks(worker, n_paths: int, n_workers: int):
    """Run worker(block_index, block_size) for every block, results in block order."""
    sizes = _block_sizes(n_paths)
    if n_workers <= 1 or len(sizes) == 1:
        return [worker(i, sz) for i, sz in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(worker, i, sz) for i, sz in enumerate(sizes)]
        return [f.result() for f in futures]


def _antithetic_normals(rng, size: int, dtype=np.float64) -> np.ndarray:
    half = (size + 1) // 2
    z = rng.standard_normal(half, dtype=dtype)
    return np.concatenate([z, -z])[:size]


def first_passage_histogram(b: Boundary, x0: float, cfg: MCConfig,
                            n_bins: int, n_workers: int = 1) -> DensityHistogram:
    """Empirical first-passage histogram of Brownian motion to the moving level.

    Paths start at 0; the level at time t is x0 + int_0^t f'(u) du.  A
    crossing is recorded when an Euler endpoint reaches the level or,
    between two endpoints below it, with the Brownian-bridge probability
    exp(-2 d1 d2 / dt) against the locally linearized level.  Crossing
    times are attributed to step midpoints.
    """
    if x0 <= 0.0:
        raise ValueError(f"x0 must be positive, got {x0}")
    if n_bins < 1:
        raise ValueError("need at least one bin")
    s = b.horizon_s
    n_steps = cfg.n_steps
    dt = s / n_steps
    t_nodes = np.linspace(0.0, s, n_steps + 1)
    level = (x0 + integral_fprime(b, 0.0, t_nodes)).astype(np.float32)
    edges = np.linspace(0.0, s, n_bins + 1)
    sqrt_dt = np.float32(np.sqrt(dt))
    half_dt = np.float32(0.5 * dt)

    def worker(block: int, size: int):
        rng = _block_rng(cfg.seed, block)
        w = np.zeros(size, dtype=np.float32)
        crossed = np.zeros(size, dtype=bool)
        cross_step = np.zeros(size, dtype=np.int32)
        for j in range(n_steps):
            if cfg.antithetic:
                z = _antithetic_normals(rng, size, dtype=np.float32)
            else:
                z = rng.standard_normal(size, dtype=np.float32)
            e = rng.standard_exponential(size, dtype=np.float32)
            w_next = w + sqrt_dt * z
            # exp(-2 d1 d2 / dt) bridge crossing collapses to one comparison:
            # u < exp(-q) iff Exp(1) * dt/2 > d1 * d2 (direct hits give q <= 0)
            q = (level[j] - w) * (level[j + 1] - w_next)
            newly = ~crossed & (e * half_dt > q)
            cross_step[newly] = j
            crossed |= newly
            w = w_next
        times = (cross_step[crossed].astype(np.float64) + 0.5) * dt
        counts, _ = np.histogram(times, bins=edges)
        return counts, int(np.count_nonzero(crossed))

    results = _run_blocks(worker, cfg.n_paths, n_workers)
    counts = np.sum([r[0] for r in results], axis=0)
    n_crossed = int(sum(r[1] for r in results))
    return DensityHistogram(edges, counts / cfg.n_paths, n_crossed, cfg.n_paths)


def kappa_time_density(b: Boundary, x0: float, t) -> np.ndarray:
    """Closed-form hitting-density approximation as a density in time:
    x0 * k(t, x0 + int_0^t f')."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    tp = t[pos]
    out[pos] = x0 * heat_kernel(tp, x0 + integral_fprime(b, 0.0, tp))
    return out


def reference_time_density(b: Boundary, x0: float, t) -> np.ndarray:
    """Fixed-level tangent reference h(t, x0 + int_0^t f'); exact when f' = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0.0
    tp = t[pos]
    out[pos] = derived_kernel(tp, x0 + integral_fprime(b, 0.0, tp))
    return out


def _bin_masses(fn, edges: np.ndarray, nodes_per_bin: int = 65) -> np.ndarray:
    out = np.empty(edges.size - 1)
    for i in range(edges.size - 1):
        ts = np.linspace(edges[i], edges[i + 1], nodes_per_bin)
        out[i] = float(np.sum(simpson_weights(nodes_per_bin, ts[1] - ts[0]) * fn(ts)))
    return out


def compare_density(b: Boundary, x0: float, cfg: MCConfig, n_bins: int = 20,
                    n_workers: int = 1,
                    hist: DensityHistogram | None = None) -> DensityComparison:
    """Per-bin comparison of empirical mass against the closed-form columns.

    z is (empirical - kappa) in units of the empirical binomial standard
    error.  The table is a report: no pass/fail is attached.  Pass a
    precomputed ``hist`` (same boundary/x0/cfg) to skip the path sweep.
    """
    if hist is None:
        hist = first_passage_histogram(b, x0, cfg, n_bins, n_workers)
    edges = hist.bin_edges
    kappa_mass = _bin_masses(lambda t: kappa_time_density(b, x0, t), edges)
    ref_mass = _bin_masses(lambda t: reference_time_density(b, x0, t), edges)
    emp = hist.masses
    se = np.sqrt(np.maximum(emp * (1.0 - emp), 1e-300) / hist.n_total)
    z = (emp - kappa_mass) / se
    return DensityComparison(edges, emp, kappa_mass, ref_mass, z, hist.n_total)


def chi_square_vs_reference(hist: DensityHistogram, expected_masses: np.ndarray):
    """Multinomial chi-square of binned counts against expected masses.

    The never-crossed remainder is included as an extra cell, so the
    statistic has (n_bins + 1) - 1 degrees of freedom.  Returns
    (statistic, p_value).
    """
    expected_masses = np.asarray(expected_masses, dtype=float)
    observed = np.append(hist.masses, 1.0 - hist.masses.sum()) * hist.n_total
    expected = np.append(expected_masses, 1.0 - expected_masses.sum()) * hist.n_total
    if np.any(expected <= 0.0):
        raise ValueError("expected counts must be positive in every cell")
    stat = float(np.sum((observed - expected) ** 2 / expected))
    dof = hist.masses.size
    return stat, float(chi2.sf(stat, dof))


def bessel_bridge_fk(b: Boundary, x: float, cfg: MCConfig,
                     n_workers: int = 1) -> MCEstimate:
    """Feynman-Kac estimate of E[exp(-int_0^s f''(u) R_u du)], R a 3-D
    Bessel bridge from x at time 0 to the origin at time s.

    The bridge is the modulus of a 3-D Brownian bridge from (x, 0, 0) to
    the origin, stepped by exact conditional sampling; the time integral
    uses the trapezoid rule on the step grid.  With antithetic sampling
    the Gaussian draws are negated pairwise and the estimator averages
    within pairs (std_error then reflects the pair count).
    """
    if x <= 0.0:
        raise ValueError(f"starting point must be positive, got {x}")
    s = b.horizon_s
    n_steps = cfg.n_steps
    dt = s / n_steps
    t_nodes = np.linspace(0.0, s, n_steps + 1)
    f2 = np.asarray(eval_fsecond(b, t_nodes), dtype=float)

    def worker(block: int, size: int):
        rng = _block_rng(cfg.seed, block)
        pos = np.zeros((size, 3))
        pos[:, 0] = x
        integral = np.zeros(size)
        g_prev = f2[0] * np.full(size, x)
        for j in range(n_steps):
            tau = s - t_nodes[j]
            shrink = (tau - dt) / tau
            std = np.sqrt(max(dt * shrink, 0.0))
            if cfg.antithetic:
                half = (size + 1) // 2
                zh = rng.standard_normal((half, 3))
                z = np.concatenate([zh, -zh])[:size]
            else:
                z = rng.standard_normal((size, 3))
            pos = pos * shrink + std * z
            radius = np.sqrt(np.einsum("ij,ij->i", pos, pos))
            g = f2[j + 1] * radius
            integral += 0.5 * dt * (g_prev + g)
            g_prev = g
        vals = np.exp(-integral)
        if cfg.antithetic and size > 1:
            half = size // 2
            paired = 0.5 * (vals[:half] + vals[half:2 * half])
            if size % 2:
                paired = np.append(paired, vals[-1])
            vals = paired
        return float(np.sum(vals)), float(np.sum(vals * vals)), vals.size

    results = _run_blocks(worker, cfg.n_paths, n_workers)
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    count = sum(r[2] for r in results)
    mean = total / count
    if count > 1:
        var = max((total_sq - count * mean * mean) / (count - 1), 0.0)
        std_error = float(np.sqrt(var / count))
    else:
        std_error = 0.0
    return MCEstimate(float(mean), std_error, cfg.n_paths)
