"""End-to-end acceptance checks.

Each test covers one release criterion and prints a single PASS/FAIL line
with its measured figure, so `pytest -s tests/test_acceptance.py` reads as a
checklist.  Criteria 4 and 5 share one full 30-seed sweep fixture.
"""

import cmath
import math
import os
import time

import numpy as np
import pytest

from omnibeam.beamforming import (
    alternating_factorization,
    coupling_vector,
    water_filling,
)
from omnibeam.channels import (
    area_equivalent_channel,
    far_area,
    far_field_link,
    far_field_user_channel,
    mirror_area,
    near_area,
    near_field_user_channel,
)
from omnibeam.cli import main as cli_main
from omnibeam.codebook import (
    AreaGrid,
    GridConfig,
    build_area_grid,
    synthesize_codeword,
)
from omnibeam.geometry import (
    Point3,
    Side,
    half_wavelength_array,
    mirror_point,
    rayleigh_distance,
    unit_direction,
)
from omnibeam.harness import (
    OUT_DIR_ENV,
    ScenarioConfig,
    _dual_realizations,
    _ios_realization,
    drop_users,
    make_sim_users,
    snr_sweep,
    static_context,
)
from omnibeam.surface import SurfaceConfiguration, SurfaceSpec
from omnibeam.training import exhaustive_search_oracle, run_training

SNRS = (0.0, 10.0, 20.0)


def report(number, passed, detail):
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")
    assert passed, f"criterion {number}: {detail}"


@pytest.fixture(scope="module")
def ctx():
    return static_context(ScenarioConfig())


@pytest.fixture(scope="module")
def full_sweep():
    return snr_sweep(ScenarioConfig())


def test_criterion_1_twin_beam_ratio(ctx):
    """Mirror-symmetric twin beams keep the gamma_t/gamma_r gain ratio.

    Fifty random configurations (random coupling constant, equal split,
    continuous random phases), each probed at a mirrored near-field point
    pair and a mirrored equal-distance far-field direction pair.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    lam = ctx.config.wavelength
    worst = 0.0
    for _ in range(50):
        spec = SurfaceSpec(float(rng.uniform(0, 2 * math.pi)), 1 / math.sqrt(2))
        surface = SurfaceConfiguration.from_phases(
            rng.uniform(0, 2 * math.pi, 64), spec)
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        incident = ctx.h_bi @ (v / np.linalg.norm(v))
        beam_t = surface.psi_t_diag * incident
        beam_r = surface.psi_r_diag * incident
        expected = spec.gamma_t / spec.gamma_r
        pt = Point3(float(rng.uniform(-0.3, 0.3)), float(rng.uniform(0.05, 0.6)),
                    float(rng.uniform(-0.2, 0.2)))
        near_pair = (near_area(1, pt), near_area(1, mirror_point(pt)))
        fa = far_area(1, float(rng.uniform(-0.4, 0.4)),
                      float(rng.uniform(-1.2, 1.2)), 2.0 * ctx.rayleigh)
        far_pair = (fa, mirror_area(fa))
        for refl, refr in (near_pair, far_pair):
            h_refl = area_equivalent_channel(refl, ctx.ios, lam)
            h_refr = area_equivalent_channel(refr, ctx.ios, lam)
            ratio = abs(np.dot(h_refl, beam_t)) / abs(np.dot(h_refr, beam_r))
            worst = max(worst, abs(ratio - expected) / expected)
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-6 and elapsed < 30.0,
           f"50 configs x 2 probe pairs, max twin-ratio rel err {worst:.2e}, "
           f"{elapsed:.1f} s")


def test_criterion_2_interpolation(ctx):
    """Synthesis interpolates exactly on 100 well-conditioned grids."""
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    lam = ctx.config.wavelength
    worst = 0.0
    pairs = 0

    def check(grid, coverage, gain):
        nonlocal worst, pairs
        cw = synthesize_codeword(coverage, grid, gain=gain)
        u = np.zeros(grid.p)
        u[[i - 1 for i in coverage]] = gain
        worst = max(worst, float(np.max(np.abs(grid.matrix @ cw.q - u))))
        pairs += 1

    # sixty pairs on random scattered point grids (both half-spaces, no
    # mirror twins, so the row stacks stay full rank)
    for _ in range(10):
        p = int(rng.integers(4, 13))
        pts = [Point3(float(rng.uniform(-0.4, 0.4)),
                      float(rng.choice([-1.0, 1.0])) * float(rng.uniform(0.05, 0.8)),
                      float(rng.uniform(-0.3, 0.3))) for _ in range(p)]
        grid = AreaGrid.from_areas([near_area(i + 1, pt)
                                    for i, pt in enumerate(pts)], ctx.ios, lam)
        for _ in range(6):
            size = int(rng.integers(1, p + 1))
            cov = set(int(i) + 1 for i in rng.choice(p, size, replace=False))
            check(grid, cov, float(rng.uniform(0.5, 4.0)))

    # forty pairs on ring-layout side subgrids across ring/sector variants
    for rings, sector in (((0.1, 2.0), math.pi / 2), ((0.08, 1.6), math.pi / 2),
                          ((0.12, 2.4), math.pi / 3), ((0.25, 3.0), math.pi / 2),
                          ((0.06, 1.0), 0.45 * math.pi)):
        grid = build_area_grid(GridConfig(32, rings, sector), ctx.ios, lam)
        side = grid.side_subgrid(Side.REFLECTIVE)
        for _ in range(8):
            size = int(rng.integers(1, 17))
            cov = set(int(i) + 1 for i in rng.choice(16, size, replace=False))
            check(side, cov, float(rng.uniform(0.5, 4.0)))

    elapsed = time.perf_counter() - start
    report(2, pairs >= 100 and worst < 1e-8 and elapsed < 30.0,
           f"{pairs} pairs, max interpolation residual {worst:.2e}, {elapsed:.1f} s")


def test_criterion_3_training_vs_oracle(ctx):
    """200 single-user drops: the descent finds the exhaustive optimum.

    At least 95% land on the oracle leaf and every drop keeps at least half
    the oracle power (a missed leaf must still be a useful neighbour).
    """
    start = time.perf_counter()
    realization = _ios_realization(ctx, ctx.config.rings_proposed)
    tc = ctx.config.training_config
    hits = 0
    worst_ratio = 1.0
    for seed in range(200):
        cfg1 = ScenarioConfig(
            k_users=1,
            drop_reflective=1 if seed % 2 == 0 else 0,
            drop_refractive=0 if seed % 2 == 0 else 1,
            drop_near=1 if (seed // 2) % 2 == 0 else 0,
            drop_far=0 if (seed // 2) % 2 == 0 else 1)
        drops = drop_users(cfg1, ctx.rayleigh, np.random.default_rng(seed))
        user = make_sim_users(drops, ctx)[0]
        rec = run_training(realization, [user], tc).users[0]
        leaf, _, power = exhaustive_search_oracle(realization, user, tc)
        hits += rec.leaf == leaf
        worst_ratio = min(worst_ratio, rec.final_power / power)
    elapsed = time.perf_counter() - start
    report(3, hits >= 190 and worst_ratio >= 0.5 and elapsed < 300.0,
           f"oracle leaf {hits}/200, worst power ratio {worst_ratio:.3f}, "
           f"{elapsed:.1f} s")


def test_criterion_4_scheme_ordering(full_sweep):
    """30-seed sweep: genie >= proposed >= both single-regime baselines,
    proposed within 15% of the genie at 20 dB, rates monotone in SNR."""
    r = full_sweep
    means = {(s, snr): r.mean(s, snr)
             for s in ("perfect_csi", "proposed", "near_only", "far_only")
             for snr in SNRS}
    ordered = all(
        means[("perfect_csi", snr)] >= means[("proposed", snr)] >=
        max(means[("near_only", snr)], means[("far_only", snr)])
        for snr in SNRS)
    gap = 1.0 - means[("proposed", 20.0)] / means[("perfect_csi", 20.0)]
    monotone = all(
        r.mean(s, 0.0) <= r.mean(s, 10.0) <= r.mean(s, 20.0)
        for s in r.config.schemes)
    report(4, ordered and gap <= 0.15 and monotone,
           f"ordering {ordered}, genie gap at 20 dB {100 * gap:.1f}%, "
           f"monotone {monotone}")


def test_criterion_5_overhead_tradeoffs(ctx, full_sweep):
    """Dual-surface baselines: half the broadcast slots, and the overhead
    accounting shows up in frame throughput."""
    r = full_sweep
    cfg = ctx.config
    ios_real = _ios_realization(ctx, cfg.rings_proposed)
    duals = _dual_realizations(ctx, cfg.p_areas)
    ios_upper = 2 * (ios_real.depth - 1)
    dual_upper = sum(2 * (d.depth - 1) for d in duals.values())
    half = dual_upper == 2 * ios_upper
    slots = {s: {row.train_slots for row in r.rows if row.scheme == s}
             for s in r.config.schemes}
    budgets = (slots["proposed"] == {30} and slots["perfect_csi"] == {0}
               and slots["dual_equal_resolution"] == {36}
               and slots["dual_equal_overhead"] == {32})
    tput_ok = all(r.mean("proposed", snr, "throughput")
                  >= r.mean("dual_equal_resolution", snr, "throughput")
                  for snr in SNRS)
    rate_ok = all(r.mean("dual_equal_overhead", snr)
                  <= r.mean("proposed", snr) for snr in SNRS)
    report(5, half and budgets and tput_ok and rate_ok,
           f"upper slots {ios_upper} vs {dual_upper}, budgets {budgets}, "
           f"throughput wins {tput_ok}, equal-overhead rate {rate_ok}")


def test_criterion_6_water_filling():
    """1000 random allocations keep the budget to 1e-9 and stay nonnegative;
    closed forms match for one user and the hand-solved two-user cases."""
    rng = np.random.default_rng(606)
    worst = 0.0
    negative = False
    for _ in range(1000):
        k = int(rng.integers(1, 9))
        g = 10.0 ** rng.uniform(-5, 3, size=k)
        sigma2 = float(rng.choice([0.0, rng.uniform(0.1, 3.0)]))
        p_total = 10.0 ** rng.uniform(-2, 3)
        p = water_filling(g, sigma2, p_total)
        negative = negative or bool(np.any(p < 0))
        worst = max(worst, abs(float(np.sum(p * g)) - p_total))
    single = all(
        np.allclose(water_filling([g], 1.0, pt), pt / g, rtol=1e-12)
        for g, pt in ((0.5, 2.0), (3.0, 7.0), (40.0, 0.3)))
    two_user = (np.allclose(water_filling([1.0, 4.0], 1.0, 1.0), [1.0, 0.0])
                and np.allclose(water_filling([1.0, 2.0], 1.0, 3.0), [2.0, 0.5]))
    report(6, worst < 1e-9 and not negative and single and two_user,
           f"1000 draws, max budget err {worst:.2e}, closed forms "
           f"{single and two_user}")


def test_criterion_7_solver_descent(ctx):
    """Residual traces never increase over 50 seeded solves, and the
    closed-form phase update matches or beats a 4096-point grid scan."""
    rng = np.random.default_rng(707)
    worst_rise = 0.0
    for seed in range(50):
        k = int(rng.integers(1, 5))
        q = rng.standard_normal((64, k)) + 1j * rng.standard_normal((64, k))
        sol = alternating_factorization(q, ctx.h_bi, ctx.config.surface_spec,
                                        rng=np.random.default_rng(seed))
        trace = np.array(sol.residual_trace)
        worst_rise = max(worst_rise, float(np.max(np.diff(trace) / trace[0])))
    grid = 2 * math.pi * np.arange(4096) / 4096
    phasors = np.exp(1j * grid)
    margin = 0.0
    for _ in range(10):
        q = rng.standard_normal((64, 2)) + 1j * rng.standard_normal((64, 2))
        v = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
        b = coupling_vector(q, ctx.h_bi, v)
        closed = np.abs(b)  # Re(e^{-j angle(b)} b)
        scanned = np.real(b[:, None] * phasors[None, :]).max(axis=1)
        margin = min(margin, float(np.min(closed - scanned)))
    report(7, worst_rise <= 1e-12 and margin >= -1e-12,
           f"max residual rise {worst_rise:.2e}, grid margin {margin:.2e}")


def test_criterion_8_field_model_consistency(ctx):
    """Planar and spherical user channels agree far beyond the boundary:
    phases within 0.05 rad, magnitudes within 1%, for >= 50x Rayleigh."""
    cfg = ctx.config
    lam = cfg.wavelength
    worst_phase = 0.0
    worst_mag = 0.0
    for mult in (50.0, 65.0, 80.0):
        for theta in (-0.3, 0.0, 0.4):
            for psi in (-1.0, -0.3, 0.2, 0.9):
                center = Point3.from_array(
                    mult * ctx.rayleigh * unit_direction(theta, psi))
                geom = half_wavelength_array(*cfg.user_shape, lam, origin=center)
                exact = near_field_user_channel(geom, ctx.ios, lam)
                ua, sa, dist = far_field_link(center, ctx.ios)
                planar = far_field_user_channel(ua, sa, dist, geom, ctx.ios, lam)
                planar = planar * cmath.exp(-2j * math.pi * dist / lam)
                worst_phase = max(worst_phase,
                                  float(np.max(np.abs(np.angle(exact / planar)))))
                worst_mag = max(worst_mag, float(np.max(
                    np.abs(np.abs(exact) / np.abs(planar) - 1.0))))
    report(8, worst_phase < 0.05 and worst_mag < 0.01,
           f"36 placements, max phase err {worst_phase:.3f} rad, "
           f"max magnitude err {100 * worst_mag:.2f}%")


def test_criterion_9_sweep_reproducibility(tmp_path):
    """Two identical `sweep` invocations produce byte-identical outputs."""
    import yaml

    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump({"seeds": [1, 2, 3]}))
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        os.environ[OUT_DIR_ENV] = str(out)
        try:
            assert cli_main(["sweep", str(cfg_path)]) == 0
        finally:
            os.environ.pop(OUT_DIR_ENV, None)
        outputs.append(out)
    same = all(
        (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
        for name in ("sweep.csv", "metadata.txt"))
    report(9, same, "sweep.csv and metadata.txt byte-identical across runs")
