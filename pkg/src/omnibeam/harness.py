"""Experiment harness: scenes, user drops, scheme registry, sweeps, exports.

Everything here is deterministic given the configuration: drops derive from
per-seed generators, solver initializations from (seed, scheme, group), and
all file output uses fixed numeric formatting, so a repeated run reproduces
results byte for byte.

Schemes:

* ``proposed``        - mirrored near-far grid, one-sided tree, coupled surface.
* ``near_only``       - same pipeline, all distance rings inside the near field.
* ``far_only``        - same pipeline, all rings in the far field.
* ``perfect_csi``     - matched per-user beams from the true channels, no
                        training (upper bound).
* ``dual_equal_resolution`` - two reflect-only surfaces, one per side, each
                        with an independent tree at the same leaf resolution
                        (doubles the broadcast slots).
* ``dual_equal_overhead``   - the two-surface layout at halved per-side
                        resolution, keeping the broadcast budget comparable.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np
import yaml

from . import __version__
from .beamforming import (
    BeamformerSolution,
    EffectiveChannel,
    alternating_factorization,
    coupling_vector,
    effective_channel,
    optimize_phases,
    residual,
    sum_rate,
    throughput,
    water_filling,
)
from .channels import (
    bs_ios_channel,
    far_field_link,
    far_field_user_channel,
    near_field_user_channel,
    pairwise_distances,
    spherical_entries,
)
from .codebook import (
    AreaGrid,
    CodebookRealization,
    GridConfig,
    build_area_grid,
    build_hierarchical_codebook,
    factorize_codeword_init,
    synthesize_codeword,
    user_combiner_codebook,
)
from .geometry import (
    ArrayGeometry,
    FieldRegion,
    Point3,
    SceneLayout,
    Side,
    classify_field,
    element_positions,
    half_wavelength_array,
    mirror_point,
    rayleigh_distance,
    unit_direction,
)
from .surface import SurfaceSpec
from .training import (
    SimUser,
    TrainingConfig,
    exhaustive_search_oracle,
    run_training,
)

__all__ = [
    "ScenarioConfig",
    "UserDrop",
    "StaticContext",
    "ExperimentResult",
    "SweepRow",
    "SCHEME_IDS",
    "load_config",
    "static_context",
    "drop_users",
    "make_sim_users",
    "prepare_scheme",
    "rate_metrics",
    "run_scheme",
    "snr_sweep",
    "beam_gain_map",
    "mirror_peak_check",
    "emit_results",
    "emit_gain_map",
    "resolve_out_dir",
    "verify_suite",
]

SPEED_OF_LIGHT = 299792458.0
OUT_DIR_ENV = "OMNIBEAM_OUT_DIR"

SCHEME_IDS = {
    "proposed": 1,
    "near_only": 2,
    "far_only": 3,
    "perfect_csi": 4,
    "dual_equal_resolution": 5,
    "dual_equal_overhead": 6,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Flat scenario description; every field has a desk-scale default."""

    carrier_hz: float = 26.0e9
    ios_shape: tuple[int, int] = (8, 8)
    bs_shape: tuple[int, int] = (8, 1)
    bs_center: tuple[float, float, float] = (0.0, 0.02, 0.0)
    user_shape: tuple[int, int] = (2, 1)
    k_users: int = 4

    coupling: float = math.pi / 2.0
    gamma_t: float = 1.0 / math.sqrt(2.0)
    phase_bits: int | None = None
    gain_constant: float = 1.0

    p_areas: int = 32
    rings_proposed: tuple[float, ...] = (0.1, 2.0)
    rings_near: tuple[float, ...] = (0.05, 0.15)
    rings_far: tuple[float, ...] = (2.0,)
    sector_deg: float = 90.0

    drop_reflective: int = 2
    drop_refractive: int = 2
    drop_near: int = 2
    drop_far: int = 2
    drop_near_range: tuple[float, float] = (0.15, 0.45)
    drop_far_range: tuple[float, float] = (1.2, 3.0)
    drop_sector_deg: float = 55.0

    sigma2: float = 1.0
    snr_db: tuple[float, ...] = (0.0, 10.0, 20.0)
    seeds: tuple[int, ...] = tuple(range(1, 31))
    frame_slots: int = 1000
    schemes: tuple[str, ...] = ("proposed", "near_only", "far_only",
                                "perfect_csi", "dual_equal_resolution",
                                "dual_equal_overhead")

    combiner_beams: int = 4
    combiner_spacing: float = 0.5
    solver_tol: float = 1e-8
    solver_max_iter: int = 100
    solver_rcond: float | None = 1e-3

    gainmap_leaf: int = 1
    gainmap_extent: float | None = None
    gainmap_samples: int = 60

    out_dir: str = "results"

    def __post_init__(self):
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be > 0")
        if self.k_users != self.drop_reflective + self.drop_refractive:
            raise ValueError("side counts must sum to k_users")
        if self.k_users != self.drop_near + self.drop_far:
            raise ValueError("regime counts must sum to k_users")
        if not 0 < self.drop_near_range[0] < self.drop_near_range[1] < 1:
            raise ValueError("near drop range must sit inside (0, 1) Rayleigh")
        if not 1 <= self.drop_far_range[0] < self.drop_far_range[1]:
            raise ValueError("far drop range must start at >= 1 Rayleigh")
        if not self.seeds or not self.snr_db:
            raise ValueError("seeds and snr_db must be non-empty")
        unknown = set(self.schemes) - set(SCHEME_IDS)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if self.frame_slots <= 0:
            raise ValueError("frame_slots must be > 0")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def sector(self) -> float:
        return math.radians(self.sector_deg)

    @property
    def surface_spec(self) -> SurfaceSpec:
        return SurfaceSpec(self.coupling, self.gamma_t, self.phase_bits)

    @property
    def training_config(self) -> TrainingConfig:
        return TrainingConfig(self.sigma2, False, self.combiner_beams,
                              self.combiner_spacing)

    def metadata_lines(self) -> list[str]:
        lines = [f"omnibeam {__version__}"]
        for f in sorted(fields(self), key=lambda f: f.name):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return lines


_TUPLE_FIELDS = {"ios_shape", "bs_shape", "bs_center", "user_shape",
                 "rings_proposed", "rings_near", "rings_far",
                 "drop_near_range", "drop_far_range", "snr_db", "seeds",
                 "schemes"}


def load_config(path) -> ScenarioConfig:
    """Build a config from a YAML mapping of field overrides."""
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError("config file must contain a mapping")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in set(raw) & _TUPLE_FIELDS:
        if not isinstance(raw[key], (list, tuple)):
            raise ValueError(f"config key {key} must be a list")
        raw[key] = tuple(raw[key])
    return ScenarioConfig(**raw)


def resolve_out_dir(config: ScenarioConfig) -> str:
    return os.environ.get(OUT_DIR_ENV) or config.out_dir


# ---------------------------------------------------------------------------
# Scene assembly


@dataclass(frozen=True)
class UserDrop:
    center: Point3
    side: Side
    region: FieldRegion


@dataclass
class StaticContext:
    """Per-configuration state shared across seeds: geometry, downlink,
    lazily built codebook realizations."""

    config: ScenarioConfig
    ios: ArrayGeometry
    bs: ArrayGeometry
    h_bi: np.ndarray
    rayleigh: float
    _realizations: dict = field(default_factory=dict)

    def realization(self, key, builder) -> CodebookRealization:
        if key not in self._realizations:
            self._realizations[key] = builder()
        return self._realizations[key]


def static_context(config: ScenarioConfig) -> StaticContext:
    lam = config.wavelength
    ios = half_wavelength_array(*config.ios_shape, lam)
    bs = half_wavelength_array(*config.bs_shape, lam,
                               origin=Point3(*config.bs_center))
    scene = SceneLayout(bs, ios, ())
    h_bi = bs_ios_channel(scene, lam)
    return StaticContext(config, ios, bs, h_bi,
                         rayleigh_distance(ios.diagonal, lam))


def drop_users(config: ScenarioConfig, rayleigh: float,
               rng: np.random.Generator) -> list[UserDrop]:
    """Sample user centres in the configured annular sectors.

    Sides come reflective-first; regimes alternate near/far inside each side
    while budgets last, so the default 2+2/2+2 drop reproduces one near and
    one far user on each side.
    """
    sides = ([Side.REFLECTIVE] * config.drop_reflective +
             [Side.REFRACTIVE] * config.drop_refractive)
    near_left, far_left = config.drop_near, config.drop_far
    drops = []
    sector = math.radians(config.drop_sector_deg)
    for i, side in enumerate(sides):
        take_near = near_left and (not far_left or i % 2 == 0)
        if take_near:
            lo, hi = config.drop_near_range
            near_left -= 1
            region = FieldRegion.NEAR
        else:
            lo, hi = config.drop_far_range
            far_left -= 1
            region = FieldRegion.FAR
        r = rayleigh * rng.uniform(lo, hi)
        psi = rng.uniform(-sector, sector)
        pos = r * unit_direction(0.0, psi)
        if side is Side.REFRACTIVE:
            pos = mirror_point(Point3.from_array(pos)).as_array()
        drops.append(UserDrop(Point3.from_array(pos), side, region))
    return drops


def make_sim_users(drops, ctx: StaticContext) -> list[SimUser]:
    """True downlink channels: spherical inside the boundary, planar beyond."""
    lam = ctx.config.wavelength
    users = []
    for drop in drops:
        geom = half_wavelength_array(*ctx.config.user_shape, lam,
                                     origin=drop.center)
        if classify_field(drop.center, ctx.ios, lam) is FieldRegion.NEAR:
            h = near_field_user_channel(geom, ctx.ios, lam)
        else:
            ua, sa, dist = far_field_link(drop.center, ctx.ios)
            h = far_field_user_channel(ua, sa, dist, geom, ctx.ios, lam)
        users.append(SimUser(geom, drop.side, h))
    return users


# ---------------------------------------------------------------------------
# Schemes


@dataclass
class SchemePrepared:
    """Power-independent outcome of one scheme on one drop."""

    name: str
    h_eff: EffectiveChannel
    train_slots: int
    leaves: list[int] | None
    solutions: list[BeamformerSolution]


def _ios_realization(ctx: StaticContext, rings) -> CodebookRealization:
    cfg = ctx.config

    def build():
        grid = build_area_grid(
            GridConfig(cfg.p_areas, tuple(rings), cfg.sector),
            ctx.ios, cfg.wavelength)
        tree = build_hierarchical_codebook(grid, cfg.gain_constant,
                                           side=Side.REFLECTIVE)
        return CodebookRealization(tree, ctx.h_bi, cfg.surface_spec)

    return ctx.realization(("ios", tuple(rings), cfg.p_areas), build)


def _dual_realizations(ctx: StaticContext, p_areas: int
                       ) -> dict[Side, CodebookRealization]:
    cfg = ctx.config
    ris_spec = SurfaceSpec(cfg.coupling, 1.0, cfg.phase_bits)

    def build_for(side):
        def build():
            grid = build_area_grid(
                GridConfig(p_areas, cfg.rings_proposed, cfg.sector),
                ctx.ios, cfg.wavelength)
            tree = build_hierarchical_codebook(grid, cfg.gain_constant,
                                               side=side)
            return CodebookRealization(tree, ctx.h_bi, ris_spec, serving=side)
        return build

    return {side: ctx.realization(("dual", p_areas, side), build_for(side))
            for side in (Side.REFLECTIVE, Side.REFRACTIVE)}


def _solver_rng(seed: int, name: str, group: int) -> np.random.Generator:
    return np.random.default_rng([seed, SCHEME_IDS[name], group])


def _pair_partner(leaf: int) -> int:
    return leaf + 1 if leaf % 2 else leaf - 1


def _distinct_leaves(chosen: list[int], leaf_count: int) -> list[int]:
    """Resolve leaf collisions: two streams on one codeword are inseparable
    at the receivers, so later users fall back to the partner leaf of their
    final training pair, then to the nearest free index."""
    taken: set[int] = set()
    out = []
    for leaf in chosen:
        if leaf in taken:
            partner = _pair_partner(leaf)
            if partner in taken:
                free = [i for i in range(1, leaf_count + 1) if i not in taken]
                leaf = min(free, key=lambda i: (abs(i - leaf), i))
            else:
                leaf = partner
        taken.add(leaf)
        out.append(leaf)
    return out


def _trained_selection(realization, users, ctx):
    cfg = ctx.config
    report = run_training(realization, users, cfg.training_config)
    leaves = _distinct_leaves([rec.leaf for rec in report.users],
                              realization.leaf_count)
    targets, combiners = [], []
    for user, rec, leaf in zip(users, report.users, leaves):
        q = realization.leaf(leaf).codeword.q
        # unit-norm targets so no user dominates the factorization fit
        targets.append(q / np.linalg.norm(q))
        bank = user_combiner_codebook(user.geometry.count, cfg.combiner_beams,
                                      cfg.combiner_spacing)
        combiners.append(bank[rec.combiner_index])
    return np.column_stack(targets), combiners, leaves, report


def _single_surface_scheme(name, rings, ctx, users, seed) -> SchemePrepared:
    cfg = ctx.config
    realization = _ios_realization(ctx, rings)
    targets, combiners, leaves, report = _trained_selection(realization,
                                                            users, ctx)
    solution = alternating_factorization(
        targets, ctx.h_bi, cfg.surface_spec, tol=cfg.solver_tol,
        max_iter=cfg.solver_max_iter, rng=_solver_rng(seed, name, 0),
        rcond=cfg.solver_rcond)
    diags = [solution.surface.diag_for_side(u.side) for u in users]
    h_eff = effective_channel(combiners, [u.channel for u in users], diags,
                              ctx.h_bi, solution.precoder)
    return SchemePrepared(name, h_eff, report.total_slots, leaves, [solution])


def _perfect_csi_scheme(ctx, users, seed) -> SchemePrepared:
    """Genie reference: beamforming computed from exact channel knowledge.

    Each target is the user's conjugate match projected off the other users'
    combined channel rows, so the genie both points at its user and
    suppresses cross-talk - the codebook-trained schemes approximate exactly
    this with quantized leaves and synthesized nulls.  Targets go through
    the same surface factorization as every other scheme; no training slots
    are spent."""
    cfg = ctx.config
    matched, combiners, rows = [], [], []
    for user in users:
        u_mat, _, vh = np.linalg.svd(user.channel, full_matrices=False)
        combiners.append(u_mat[:, 0])
        matched.append(vh[0].conj())
        rows.append(np.conj(u_mat[:, 0]) @ user.channel)
    targets = []
    for k, m in enumerate(matched):
        others = np.array([r / np.linalg.norm(r)
                           for j, r in enumerate(rows) if j != k])
        basis = np.linalg.qr(others.conj().T, mode="reduced")[0]
        t = m - basis @ (basis.conj().T @ m)
        norm = np.linalg.norm(t)
        targets.append(t / norm if norm > 1e-9 else m)
    q = np.column_stack(targets)
    solution = alternating_factorization(
        q, ctx.h_bi, cfg.surface_spec, tol=cfg.solver_tol,
        max_iter=cfg.solver_max_iter,
        rng=_solver_rng(seed, "perfect_csi", 0), rcond=cfg.solver_rcond)
    diags = [solution.surface.diag_for_side(u.side) for u in users]
    h_eff = effective_channel(combiners, [u.channel for u in users], diags,
                              ctx.h_bi, solution.precoder)
    return SchemePrepared("perfect_csi", h_eff, 0, None, [solution])


def _dual_surface_scheme(name, p_areas, ctx, users, seed) -> SchemePrepared:
    cfg = ctx.config
    realizations = _dual_realizations(ctx, p_areas)
    k = len(users)
    targets = [None] * k
    combiners = [None] * k
    diags = [None] * k
    leaves = [0] * k
    columns = [None] * k
    slots = 0
    solutions = []
    for group, side in enumerate((Side.REFLECTIVE, Side.REFRACTIVE)):
        idx = [i for i, u in enumerate(users) if u.side is side]
        if not idx:
            continue
        realization = realizations[side]
        subset = [users[i] for i in idx]
        q, w, lv, report = _trained_selection(realization, subset, ctx)
        slots += report.total_slots
        solution = alternating_factorization(
            q, ctx.h_bi, realization.spec, tol=cfg.solver_tol,
            max_iter=cfg.solver_max_iter, rng=_solver_rng(seed, name, group),
            rcond=cfg.solver_rcond)
        solutions.append(solution)
        for col, i in enumerate(idx):
            targets[i] = q[:, col]
            combiners[i] = w[col]
            leaves[i] = lv[col]
            columns[i] = solution.precoder[:, col]
            diags[i] = solution.surface.psi_t_diag
    precoder = np.column_stack(columns)
    h_eff = effective_channel(combiners, [u.channel for u in users], diags,
                              ctx.h_bi, precoder)
    return SchemePrepared(name, h_eff, slots, leaves, solutions)


def prepare_scheme(name: str, ctx: StaticContext, users, seed: int
                   ) -> SchemePrepared:
    cfg = ctx.config
    if name == "proposed":
        return _single_surface_scheme(name, cfg.rings_proposed, ctx, users, seed)
    if name == "near_only":
        return _single_surface_scheme(name, cfg.rings_near, ctx, users, seed)
    if name == "far_only":
        return _single_surface_scheme(name, cfg.rings_far, ctx, users, seed)
    if name == "perfect_csi":
        return _perfect_csi_scheme(ctx, users, seed)
    if name == "dual_equal_resolution":
        return _dual_surface_scheme(name, cfg.p_areas, ctx, users, seed)
    if name == "dual_equal_overhead":
        return _dual_surface_scheme(name, cfg.p_areas // 2, ctx, users, seed)
    raise ValueError(f"unknown scheme {name!r}")


def rate_metrics(prepared: SchemePrepared, config: ScenarioConfig,
                 snr_db: float) -> tuple[float, float]:
    """(sum rate, frame throughput) at one transmit SNR."""
    p_total = config.sigma2 * 10.0 ** (snr_db / 10.0)
    powers = water_filling(prepared.h_eff.gains, config.sigma2, p_total)
    rate = sum_rate(prepared.h_eff, powers, config.sigma2)
    return rate, throughput(rate, prepared.train_slots, config.frame_slots)


def run_scheme(name: str, config: ScenarioConfig, seed: int,
               snr_db: float) -> dict:
    """Single-shot convenience: one scheme, one drop, one operating point."""
    ctx = static_context(config)
    drops = drop_users(config, ctx.rayleigh, np.random.default_rng(seed))
    users = make_sim_users(drops, ctx)
    prepared = prepare_scheme(name, ctx, users, seed)
    rate, tput = rate_metrics(prepared, config, snr_db)
    return {"scheme": name, "seed": seed, "snr_db": snr_db, "sum_rate": rate,
            "throughput": tput, "train_slots": prepared.train_slots,
            "leaves": prepared.leaves}


# ---------------------------------------------------------------------------
# Sweeps and exports


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    snr_db: float
    seed: int
    sum_rate: float
    throughput: float
    train_slots: int


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    rows: list[SweepRow]

    def mean(self, scheme: str, snr_db: float, attr: str = "sum_rate") -> float:
        vals = [getattr(r, attr) for r in self.rows
                if r.scheme == scheme and r.snr_db == snr_db]
        if not vals:
            raise ValueError(f"no rows for {scheme} at {snr_db} dB")
        return float(np.mean(vals))


def snr_sweep(config: ScenarioConfig) -> ExperimentResult:
    """Every (scheme, seed) pair evaluated across the SNR list.

    Training is noise free, so the factorized state is shared across SNRs;
    only the power allocation and rates are recomputed per point.
    """
    ctx = static_context(config)
    rows = []
    for seed in config.seeds:
        drops = drop_users(config, ctx.rayleigh, np.random.default_rng(seed))
        users = make_sim_users(drops, ctx)
        for name in config.schemes:
            prepared = prepare_scheme(name, ctx, users, seed)
            for snr in config.snr_db:
                rate, tput = rate_metrics(prepared, config, snr)
                rows.append(SweepRow(name, float(snr), seed, rate, tput,
                                     prepared.train_slots))
    rows.sort(key=lambda r: (r.scheme, r.snr_db, r.seed))
    return ExperimentResult(config, rows)


def emit_results(result: ExperimentResult, out_dir=None) -> list[str]:
    """Write sweep.csv and metadata.txt; returns the paths."""
    out = out_dir or resolve_out_dir(result.config)
    os.makedirs(out, exist_ok=True)
    sweep_path = os.path.join(out, "sweep.csv")
    with open(sweep_path, "w") as fh:
        fh.write("scheme,snr_db,seed,sum_rate,throughput,train_slots\n")
        for r in result.rows:
            fh.write(f"{r.scheme},{r.snr_db:.12g},{r.seed},"
                     f"{r.sum_rate:.12g},{r.throughput:.12g},{r.train_slots}\n")
    meta_path = os.path.join(out, "metadata.txt")
    with open(meta_path, "w") as fh:
        fh.write("\n".join(result.config.metadata_lines()) + "\n")
    return [sweep_path, meta_path]


def beam_gain_map(beam_reflect: np.ndarray, beam_refract: np.ndarray,
                  ios: ArrayGeometry, wavelength: float,
                  xs: np.ndarray, ys: np.ndarray, z: float = 0.0) -> np.ndarray:
    """Equivalent gain |h(point) . beam| over an x-y slice, shape (len(ys), len(xs)).

    Points with y > 0 see the reflective beam, y < 0 the refractive beam;
    sample grids must avoid the surface plane itself.
    """
    if np.any(ys == 0):
        raise ValueError("sample rows on the surface plane are undefined")
    epos = element_positions(ios)
    gains = np.zeros((len(ys), len(xs)))
    for iy, y in enumerate(ys):
        pts = np.column_stack([xs, np.full(len(xs), y), np.full(len(xs), z)])
        rows = spherical_entries(pairwise_distances(pts, epos), wavelength)
        beam = beam_reflect if y > 0 else beam_refract
        gains[iy] = np.abs(rows @ beam)
    return gains


def mirror_peak_check(gains: np.ndarray, xs: np.ndarray, ys: np.ndarray
                      ) -> dict:
    """Locate the strongest sample on each side and compare the pair.

    Returns peak coordinates, their gains, the refractive/reflective gain
    ratio and the distance between the refractive peak and the mirror image
    of the reflective one.
    """
    pos = ys > 0
    neg = ys < 0
    i_r = np.unravel_index(np.argmax(gains[pos]), gains[pos].shape)
    i_t = np.unravel_index(np.argmax(gains[neg]), gains[neg].shape)
    refl = (float(xs[i_r[1]]), float(ys[pos][i_r[0]]))
    refr = (float(xs[i_t[1]]), float(ys[neg][i_t[0]]))
    g_refl = float(gains[pos][i_r])
    g_refr = float(gains[neg][i_t])
    offset = math.hypot(refr[0] - refl[0], refr[1] + refl[1])
    return {"reflective_peak": refl, "refractive_peak": refr,
            "reflective_gain": g_refl, "refractive_gain": g_refr,
            "ratio": g_refr / g_refl if g_refl else math.inf,
            "mirror_offset": offset}


def emit_gain_map(gains: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                  path) -> None:
    with open(path, "w") as fh:
        fh.write("x,y,gain\n")
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                fh.write(f"{x:.12g},{y:.12g},{gains[iy, ix]:.12g}\n")


def default_gainmap_axes(ctx: StaticContext) -> tuple[np.ndarray, np.ndarray]:
    cfg = ctx.config
    extent = cfg.gainmap_extent or 2.5 * ctx.rayleigh
    n = cfg.gainmap_samples
    xs = np.linspace(-extent, extent, n + 1)
    ys = np.linspace(-extent, extent, n)  # even count keeps y = 0 out
    if n % 2:
        ys = np.linspace(-extent, extent, n + 1)
        ys = ys[ys != 0.0]
    return xs, ys


# ---------------------------------------------------------------------------
# Built-in verification (used by the CLI `verify` subcommand)


def verify_suite(config: ScenarioConfig | None = None, cases: int = 25,
                 seed: int = 2024) -> tuple[bool, list[str]]:
    """Compact numerical self-checks; returns (all passed, report lines)."""
    cfg = config or ScenarioConfig()
    ctx = static_context(cfg)
    rng = np.random.default_rng(seed)
    lam = cfg.wavelength
    lines = []
    ok = True

    def record(name, passed, detail):
        nonlocal ok
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    # Twin-beam gain ratio at mirrored probe points for random codewords.
    from .channels import near_area, area_equivalent_channel
    worst = 0.0
    for _ in range(cases):
        spec = SurfaceSpec(rng.uniform(0, 2 * np.pi), cfg.gamma_t, None)
        q = rng.standard_normal(ctx.ios.count) + 1j * rng.standard_normal(ctx.ios.count)
        surface, v = factorize_codeword_init(q, ctx.h_bi, spec)
        incident = ctx.h_bi @ v
        beam_t = surface.psi_t_diag * incident
        beam_r = surface.psi_r_diag * incident
        pt = Point3(rng.uniform(-0.3, 0.3), rng.uniform(0.05, 0.6),
                    rng.uniform(-0.2, 0.2))
        h_t = area_equivalent_channel(near_area(1, pt), ctx.ios, lam)
        h_r = area_equivalent_channel(near_area(1, mirror_point(pt)), ctx.ios, lam)
        ratio = abs(np.dot(h_t, beam_t)) / abs(np.dot(h_r, beam_r))
        expected = cfg.gamma_t / math.sqrt(1 - cfg.gamma_t ** 2)
        worst = max(worst, abs(ratio - expected) / expected)
    record("twin-beam-ratio", worst < 1e-6, f"max rel err {worst:.2e}")

    # Interpolation residual on random well-conditioned grids.
    worst = 0.0
    for _ in range(cases):
        p = int(rng.integers(2, 9))
        pts = [Point3(rng.uniform(-0.4, 0.4),
                      float(rng.choice([-1, 1])) * rng.uniform(0.05, 0.8),
                      rng.uniform(-0.3, 0.3)) for _ in range(p)]
        grid = AreaGrid.from_areas([near_area(i + 1, pt)
                                    for i, pt in enumerate(pts)], ctx.ios, lam)
        cov = set(int(i) + 1 for i in rng.choice(p, size=max(1, p // 2),
                                                 replace=False))
        cw = synthesize_codeword(cov, grid, gain=1.0)
        u = np.zeros(p)
        u[[i - 1 for i in cov]] = 1.0
        worst = max(worst, float(np.max(np.abs(grid.matrix @ cw.q - u))))
    record("interpolation", worst < 1e-8, f"max residual {worst:.2e}")

    # Water-filling normalization.
    worst = 0.0
    for _ in range(cases * 4):
        k = int(rng.integers(1, 9))
        g = rng.uniform(1e-6, 10.0, size=k)
        p_total = rng.uniform(0.1, 100.0)
        p = water_filling(g, cfg.sigma2, p_total)
        worst = max(worst, abs(np.sum(np.maximum(p * g, 0.0)) - p_total))
        if np.any(p < 0):
            worst = math.inf
    record("water-filling", worst < 1e-9, f"max budget err {worst:.2e}")

    # Phase update beats a dense grid scan.
    margin = 0.0
    for _ in range(cases):
        k = int(rng.integers(1, 5))
        q = rng.standard_normal((ctx.ios.count, k)) \
            + 1j * rng.standard_normal((ctx.ios.count, k))
        v = rng.standard_normal((ctx.bs.count, k)) \
            + 1j * rng.standard_normal((ctx.bs.count, k))
        b = coupling_vector(q, ctx.h_bi, v)
        surface = optimize_phases(q, ctx.h_bi, v, cfg.surface_spec)
        grid_phi = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        best_grid = np.max(np.real(b[:, None] * np.exp(1j * grid_phi[None, :])),
                           axis=1)
        chosen = np.real(b * np.exp(1j * surface.phi_t))
        margin = min(margin, float(np.min(chosen - best_grid)))
    record("phase-update", margin > -1e-9, f"min margin over scan {margin:.2e}")

    return ok, lines
