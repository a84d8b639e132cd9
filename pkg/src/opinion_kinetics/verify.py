"""Numerical verification suite: every convergence and equilibrium statement
of the model, checked at desk scale with explicit bounds.

Each check reports (measured, bound) with pass = measured <= bound. Checks
run in parallel (OPK_THREADS workers) on fixed seeds; the measured values are
deterministic, runtimes are informational only.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import abm, equilibrium as eq, kinetic, meanfield as mf, metrics
from .core import InitSpec, validate_params
from .parallel import parallel_map

DEFAULT_SEED = 20260810


@dataclass(frozen=True)
class SuiteSizes:
    name: str
    abm_agents: int
    particles: int
    ks_particles: int
    samples: int
    pde_points: int


FAST = SuiteSizes("fast", abm_agents=100_000, particles=100_000,
                  ks_particles=500_000, samples=1_000_000, pde_points=20_001)
PAPER = SuiteSizes("paper", abm_agents=5_000_000, particles=1_000_000,
                   ks_particles=1_000_000, samples=5_000_000, pde_points=20_001)
SUITES = {"fast": FAST, "paper": PAPER}


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    description: str
    measured: float
    bound: float
    passed: bool
    runtime_s: float


class _Context:
    """Per-run state: sizes, base seed, and a lock-protected cache for
    artifacts shared between checks."""

    def __init__(self, sizes: SuiteSizes, seed: int):
        self.sizes = sizes
        self.seed = seed
        self._lock = threading.Lock()
        self._cache: Dict[str, object] = {}

    def cached(self, key: str, builder: Callable[[], object]):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = builder()
            return self._cache[key]


Row = Tuple[str, str, float, float]


# ---------------------------------------------------------------------------
# checks


def _check_mean_conservation(ctx: _Context) -> List[Row]:
    params = validate_params(0.3, 0.3)
    cfg = abm.AbmConfig(n_agents=ctx.sizes.abm_agents, t_end=10.0, params=params,
                        seed=ctx.seed + 1, init=InitSpec.point(0.2))
    sample = abm.simulate_abm(cfg)[-1][1]
    rows = [("01a-abm-mean-conservation",
             "symmetric finite-N run conserves the mean opinion",
             abs(sample.mean() - 0.2), 0.01)]
    rho0 = kinetic.GridDensity.from_function(lambda x: 0.5 + 0.3 * x,
                                             ctx.sizes.pde_points, normalize=False)
    rho10 = kinetic.solve_pde(rho0, 10.0, 0.01, params, 0.2)[-1][1]
    rows.append(("01b-pde-mean-conservation",
                 "grid solver conserves the mean opinion",
                 abs(rho10.moments()[0] - 0.2), 1e-3))
    return rows


def _asym_particle_run(ctx: _Context):
    params = validate_params(0.3, 0.6)  # (mu_minus, mu_plus)
    snaps = mf.simulate_particles(ctx.sizes.particles, 10.0, 0.0, params,
                                  InitSpec.uniform(), ctx.seed + 2,
                                  snapshot_times=(1.0, 2.0, 5.0, 10.0))
    return params, snaps


def _check_mean_trajectory(ctx: _Context) -> List[Row]:
    params, snaps = ctx.cached("asym_run", lambda: _asym_particle_run(ctx))
    dev = max(abs(s.mean() - mf.mean_at(t, 0.0, params)) for t, s in snaps)
    return [("02-particle-mean-trajectory",
             "particle mean follows the closed-form mean trajectory",
             dev, 0.02)]


def _check_consensus_convergence(ctx: _Context) -> List[Row]:
    params, snaps = ctx.cached("asym_run", lambda: _asym_particle_run(ctx))
    by_time = dict((t, s) for t, s in snaps)
    excess = max(metrics.w1_to_point(by_time[t], 1.0) - 2.0 * math.exp(-0.3 * t)
                 for t in (5.0, 10.0))
    return [("03a-w1-to-consensus",
             "distance to the consensus point decays at the drift-gap rate",
             excess, 0.02),
            ("03b-late-variance",
             "opinion variance collapses on the way to consensus",
             by_time[10.0].variance(), 0.05)]


def _check_w1_contraction(ctx: _Context) -> List[Row]:
    params = validate_params(0.4, 0.4)
    times = tuple(float(t) for t in range(11))
    runs = mf.simulate_coupled_particles(ctx.sizes.particles, 10.0, 0.0, params,
                                         InitSpec.point(0.0), InitSpec.uniform(),
                                         ctx.seed + 4, snapshot_times=times)
    # transport cost of the common-events coupling: the pairwise mean gap
    # decays at exactly rate mu, and upper-bounds W1 of the marginals
    w1 = np.array([np.abs(a.values - b.values).mean() for _, a, b in runs])
    slope = np.polyfit(np.array(times), np.log(w1), 1)[0]
    return [("04-w1-contraction-rate",
             "coupled particle runs contract in W1 at rate mu",
             abs(-slope - 0.4), 0.08)]


def _check_ds_contraction(ctx: _Context) -> List[Row]:
    params = validate_params(0.3, 0.3)
    # the small-xi end of the d_2 grid amplifies any mean drift between the
    # two discrete solutions by 1/xi, so this needs the mass-exact operator
    # but not the full paper resolution
    n_pts = 4001
    rho0 = kinetic.GridDensity.uniform(n_pts)
    var0 = kinetic.GridDensity.from_function(lambda x: 1.0 - np.abs(x), n_pts,
                                             normalize=False)
    snaps = (1.0, 2.0, 5.0)
    sol_a = kinetic.solve_pde(rho0, 5.0, 0.01, params, 0.0, snapshot_times=snaps)
    sol_b = kinetic.solve_pde(var0, 5.0, 0.01, params, 0.0, snapshot_times=snaps)
    grid = metrics.default_xi_grid()
    d2_0 = metrics.toscani_distance(rho0.char_fn, var0.char_fn, 2.0, grid)
    rate = 1.0 - (1.0 - 0.3) ** 2
    worst = max(
        metrics.toscani_distance(a.char_fn, b.char_fn, 2.0, grid)
        / (d2_0 * math.exp(-rate * t))
        for (t, a), (_, b) in zip(sol_a, sol_b))
    return [("05-ds-contraction",
             "order-2 Fourier distance contracts at rate 1-(1-mu)^2",
             worst, 1.05)]


def _check_equilibrium_variance(ctx: _Context) -> List[Row]:
    sample = eq.sample_equilibrium(0.3, 0.0, 1e-9, ctx.sizes.samples, ctx.seed + 6)
    return [("06-equilibrium-variance",
             "sampler variance matches mu (1 - m0^2) / (2 - mu)",
             abs(sample.variance() - 0.3 / 1.7), 0.003)]


def _check_uniform_equilibrium(ctx: _Context) -> List[Row]:
    sample = eq.sample_equilibrium(0.5, 0.0, 1e-9, ctx.sizes.samples, ctx.seed + 7)
    rows = [("07a-sampler-ks-uniform",
             "mu = 1/2 sampler is uniform on [-1, 1]",
             metrics.ks_distance(sample, metrics.uniform_cdf), 0.002)]
    params = validate_params(0.5, 0.5)
    run = mf.simulate_particles(ctx.sizes.ks_particles, 20.0, 0.0, params,
                                InitSpec.point(0.0), ctx.seed + 70)
    rows.append(("07b-particle-ks-uniform",
                 "mu = 1/2 particle system reaches the uniform law from a point mass",
                 metrics.ks_distance(run[-1][1], metrics.uniform_cdf), 0.005))
    return rows


def _check_fractal_support(ctx: _Context) -> List[Row]:
    mu = Fraction(2, 3)
    sample = eq.sample_equilibrium(2.0 / 3.0, 0.0, 1e-9, ctx.sizes.samples,
                                   ctx.seed + 8)
    level8 = eq.cantor_level(mu, 8)
    outside = 1.0 - float(np.mean(level8.contains(sample.values, inflate=1e-9)))
    rows = [("08a-fractal-containment",
             "all truncated samples lie in the level-8 construction set",
             outside, 0.0)]
    left_mass = float(np.mean(sample.values <= -1.0 / 3.0))
    rows.append(("08b-level1-mass-split",
                 "the two level-1 intervals carry equal mass",
                 abs(left_mass - 0.5), 0.002))
    mismatches = sum(
        1 for n in range(9)
        if eq.cantor_level(mu, n).total_length() != eq.cantor_total_length(mu, n))
    rows.append(("08c-exact-level-lengths",
                 "enumerated interval lengths match 2 (2(1-mu))^n exactly",
                 float(mismatches), 0.0))
    rows.append(("08d-hausdorff-dimension",
                 "fractal dimension at mu = 2/3 equals ln 2 / ln 3",
                 abs(eq.hausdorff_dimension(2.0 / 3.0) - math.log(2) / math.log(3)),
                 1e-12))
    return rows


def _check_volcano(ctx: _Context) -> List[Row]:
    mu = eq.VOLCANO_MU
    sample = eq.sample_equilibrium(mu, 0.0, 1e-9, ctx.sizes.samples, ctx.seed + 9)
    hist = metrics.histogram(sample, 200)
    widths = np.diff(hist.bin_edges)
    l1 = float(np.sum(np.abs(hist.densities - eq.volcano_density(hist.centers))
                      * widths))
    rows = [("09a-volcano-histogram",
             "sampled histogram matches the closed-form volcano density in L1",
             l1, 0.02)]
    rho = kinetic.GridDensity.from_function(eq.volcano_density,
                                            ctx.sizes.pde_points, normalize=False)
    resid = kinetic.apply_q_star(rho, 0.0, validate_params(mu, mu))
    rows.append(("09b-volcano-stationarity",
                 "the volcano density annihilates the collision operator",
                 float(np.abs(resid).max()), 10.0 * rho.dx))
    return rows


def _check_gaussian_limit(ctx: _Context) -> List[Row]:
    grid = np.geomspace(1e-2, 10.0, 160)
    d4 = {m: eq.d4_to_gaussian(m, grid, 600) for m in (0.2, 0.1, 0.05)}
    monotone = max(d4[0.1] - d4[0.2], d4[0.05] - d4[0.1])
    ratios = (d4[0.1] / d4[0.2], d4[0.05] / d4[0.1])
    return [("10a-gaussian-d4-monotone",
             "d4 to the Gaussian decreases with mu",
             monotone, 0.0),
            ("10b-gaussian-d4-linear",
             "successive d4 ratios sit near 1/2 (linear-in-mu bound)",
             max(abs(r - 0.5) for r in ratios), 0.1)]


def _check_sine_product(ctx: _Context) -> List[Row]:
    xi = np.linspace(-20.0, 20.0, 4001)
    cf = eq.char_fn_equilibrium(0.5, 60)
    err = float(np.abs(cf(xi) - np.sinc(xi / np.pi)).max())
    return [("11-sine-product",
             "mu = 1/2 cosine product equals sin(xi)/xi",
             err, 1e-9)]


def _check_cross_method(ctx: _Context) -> List[Row]:
    params = validate_params(0.25, 0.25)
    rho = kinetic.solve_pde(kinetic.GridDensity.uniform(ctx.sizes.pde_points),
                            20.0, 0.01, params, 0.0)[-1][1]
    particles = mf.simulate_particles(max(ctx.sizes.samples, 1_000_000), 20.0,
                                      0.0, params, InitSpec.uniform(),
                                      ctx.seed + 12)[-1][1]
    grid_sample = rho.sample(len(particles))
    rows = [("12a-pde-vs-particles",
             "grid solver and particle system agree in W1 at t = 20",
             metrics.wasserstein_1(grid_sample, particles), 0.01)]
    product = eq.char_fn_equilibrium(0.25, 300)
    worst = max(
        abs(kinetic.solve_spectral(0.25, 0.0, xi_top, 40, 30.0).values[0]
            - product(xi_top))
        for xi_top in (1.0, 2.0, 5.0))
    rows.append(("12b-spectral-vs-product",
                 "spectral ladder converges to the product characteristic function",
                 worst, 1e-4))
    return rows


def _check_moment_quadrature(ctx: _Context) -> List[Row]:
    params = validate_params(0.3, 0.3)
    worst = max(
        abs(mf.second_moment_at(t, 0.3, 0.2, params, method="quadrature")
            - mf.second_moment_at(t, 0.3, 0.2, params, method="closed"))
        for t in (1.0, 5.0, 10.0))
    return [("13-moment-quadrature",
             "Simpson quadrature path reproduces the closed-form second moment",
             worst, 1e-8)]


#: (check ids produced, function); ids are declared up front so a filtered
#: run only executes the functions it needs
CHECKS: List[Tuple[Tuple[str, ...], Callable[[_Context], List[Row]]]] = [
    (("01a", "01b"), _check_mean_conservation),
    (("02",), _check_mean_trajectory),
    (("03a", "03b"), _check_consensus_convergence),
    (("04",), _check_w1_contraction),
    (("05",), _check_ds_contraction),
    (("06",), _check_equilibrium_variance),
    (("07a", "07b"), _check_uniform_equilibrium),
    (("08a", "08b", "08c", "08d"), _check_fractal_support),
    (("09a", "09b"), _check_volcano),
    (("10a", "10b"), _check_gaussian_limit),
    (("11",), _check_sine_product),
    (("12a", "12b"), _check_cross_method),
    (("13",), _check_moment_quadrature),
]


def run_suite(suite: str = "fast", seed: int = DEFAULT_SEED,
              check_prefixes: Optional[Sequence[str]] = None) -> Dict:
    """Run the verification checks and assemble the report.

    ``check_prefixes`` restricts the run to checks whose id starts with one of
    the given prefixes (e.g. ["08", "11"]).
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    ctx = _Context(SUITES[suite], seed)

    def wanted(cid: str) -> bool:
        return not check_prefixes or any(cid.startswith(p) for p in check_prefixes)

    selected = [fn for ids, fn in CHECKS if any(wanted(cid) for cid in ids)]

    def run_one(fn) -> List[CheckResult]:
        start = time.perf_counter()
        rows = fn(ctx)
        elapsed = time.perf_counter() - start
        return [CheckResult(check_id=cid, description=desc,
                            measured=float(measured), bound=float(bound),
                            passed=bool(measured <= bound),
                            runtime_s=round(elapsed, 3))
                for cid, desc, measured, bound in rows]

    results = [r for rows in parallel_map(run_one, selected) for r in rows]
    results.sort(key=lambda r: r.check_id)
    results = [r for r in results if wanted(r.check_id)]
    return {
        "version": __version__,
        "suite": suite,
        "seed": seed,
        "overall_pass": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }


def format_report(report: Dict) -> str:
    lines = []
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(f"[{status}] {c['check_id']}: {c['description']} "
                     f"(measured {c['measured']:.6g}, bound {c['bound']:.6g}, "
                     f"{c['runtime_s']:.2f}s)")
    lines.append("overall: " + ("PASS" if report["overall_pass"] else "FAIL"))
    return "\n".join(lines)
