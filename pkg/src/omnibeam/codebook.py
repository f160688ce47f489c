"""Near-far-field area grids, codeword synthesis and the hierarchical codebook.

A codebook is designed over a grid of sampled coverage areas.  Stacking the
area channel rows into H_hat (P x L), the codeword that delivers equivalent
gain C on a coverage set and zero on the rest of the grid is the interpolation
solution

    q = C * H_hat^H (H_hat H_hat^H)^{-1} u,

with u the 0/1 indicator of the coverage set.  Grids built by
`build_area_grid` are mirror symmetric: every reflective-side area has its
image across the surface plane.  Mirrored areas have entrywise identical
channel rows (the surface lies in the mirror plane), which has two structural
consequences exploited here:

* the full two-sided stack is always rank deficient, so synthesis operates on
  one side's half-stack; and
* any beam realized through the coupled surface serves a reflective area and
  its mirror simultaneously, so the hierarchical tree only needs codewords
  for one side - half the codewords of a two-surface system of equal
  resolution.

The tree has S = log2(P/2) layers over the reflective indices.  Layers
1..S-1 hold two interleaved-coverage codewords each (all users descend the
tree simultaneously on shared broadcasts); the bottom layer holds the P/2
single-area codewords, synthesized lazily and memoized.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .channels import (
    AreaDescriptor,
    area_equivalent_channel,
    far_area,
    mirror_area,
    near_area,
)
from .geometry import (
    ArrayGeometry,
    FieldRegion,
    Point3,
    Side,
    classify_field,
    rayleigh_distance,
    unit_direction,
)
from .surface import SurfaceConfiguration, SurfaceSpec

__all__ = [
    "AreaGrid",
    "GridConfig",
    "Codeword",
    "HierarchicalCodebook",
    "RealizedCodeword",
    "CodebookRealization",
    "build_area_grid",
    "synthesize_codeword",
    "mirrored_coverage",
    "build_hierarchical_codebook",
    "user_combiner_codebook",
    "factorize_codeword_init",
    "export_codebook_csv",
]


@dataclass(frozen=True)
class AreaGrid:
    """Ordered area descriptors plus their stacked channel rows.

    `matrix` row p-1 is the area channel of descriptor p (1-based indices).
    `mirror` maps each index to its image index for grids built with the
    mirrored construction; custom grids leave it as None.
    """

    areas: tuple[AreaDescriptor, ...]
    matrix: np.ndarray
    ios: ArrayGeometry
    wavelength: float
    mirror: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.areas) == 0:
            raise ValueError("grid needs at least one area")
        if self.matrix.shape != (len(self.areas), self.ios.count):
            raise ValueError("channel stack shape mismatch")
        for row, area in enumerate(self.areas, start=1):
            if area.index != row:
                raise ValueError("descriptor indices must run 1..P in order")
        if self.mirror is not None and len(self.mirror) != len(self.areas):
            raise ValueError("mirror map length mismatch")

    @property
    def p(self) -> int:
        return len(self.areas)

    def row(self, index: int) -> np.ndarray:
        if not 1 <= index <= self.p:
            raise ValueError(f"area index {index} outside 1..{self.p}")
        return self.matrix[index - 1]

    def mirror_index(self, index: int) -> int:
        if self.mirror is None:
            raise ValueError("grid has no mirror structure")
        return self.mirror[index - 1]

    def side_indices(self, side: Side) -> tuple[int, ...]:
        return tuple(a.index for a in self.areas if a.side is side)

    def side_subgrid(self, side: Side) -> "AreaGrid":
        """One side's areas reindexed 1..P/2, mirror structure dropped."""
        keep = self.side_indices(side)
        areas = tuple(replace(self.areas[i - 1], index=n + 1)
                      for n, i in enumerate(keep))
        rows = self.matrix[[i - 1 for i in keep]]
        return AreaGrid(areas, rows, self.ios, self.wavelength, mirror=None)

    @classmethod
    def from_areas(cls, areas, ios: ArrayGeometry, wavelength: float,
                   mirror=None) -> "AreaGrid":
        rows = np.stack([area_equivalent_channel(a, ios, wavelength)
                         for a in areas])
        mir = tuple(mirror) if mirror is not None else None
        return cls(tuple(areas), rows, ios, wavelength, mirror=mir)


@dataclass(frozen=True)
class GridConfig:
    """Layout of the sampled coverage areas.

    `ring_radii` are distance rings in units of the surface Rayleigh
    distance; each ring carries (P/2)/len(ring_radii) azimuth cells per side.
    Cell centres are uniform in sin(azimuth) over (-sector, sector), not in
    angle: the aperture resolves direction cosines, so sin-uniform centres
    keep every adjacent pair of far rows equally separated (exactly
    orthogonal at sector = pi/2 and 8 cells on an 8-column surface), while
    angle-uniform centres crowd the edge cells into near-duplicate rows that
    synthesis then wastes most of its energy nulling.  Areas are ordered
    ring-major: all azimuth cells of ring 0, then ring 1, and so on.  With
    the interleaved tree this resolves distance in the upper layers (where
    ring contrast is strong: the wrong-ring half of a fan focuses at the
    wrong radius and delivers near-zero power) and leaves the final
    candidate pair {2b-1, 2b} as adjacent azimuth cells on one ring, so the
    tightest decision compares the two most similar beams head to head.
    `explicit_points` bypasses the ring layout and builds the grid from given
    reflective-side points plus their mirrors.
    """

    p_areas: int = 32
    ring_radii: tuple[float, ...] = (0.1, 2.0)
    sector: float = math.pi / 2.0
    explicit_points: tuple[Point3, ...] | None = None


def _power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def build_area_grid(config: GridConfig, ios: ArrayGeometry,
                    wavelength: float) -> AreaGrid:
    """Mirror-symmetric area grid: reflective areas 1..P/2, images P/2+1..P."""
    p = config.p_areas
    if config.explicit_points is not None:
        reflective = [near_area(i + 1, pt)
                      for i, pt in enumerate(config.explicit_points)]
        for a in reflective:
            if a.side is not Side.REFLECTIVE:
                raise ValueError("explicit points must lie on the reflective side")
        p = 2 * len(reflective)
    else:
        if not _power_of_two(p) or p < 2:
            raise ValueError("p_areas must be a power of two >= 2")
        if p > 2 * ios.count:
            raise ValueError("more areas than surface elements can resolve")
        half = p // 2
        n_rings = len(config.ring_radii)
        if n_rings == 0 or half % n_rings:
            raise ValueError("P/2 must divide evenly across the rings")
        if not 0 < config.sector <= math.pi / 2:
            raise ValueError("sector must lie in (0, pi/2]")
        n_az = half // n_rings
        boundary = rayleigh_distance(ios.diagonal, wavelength)
        s_max = math.sin(config.sector)
        sines = -s_max + (np.arange(n_az) + 0.5) * (2 * s_max / n_az)
        psis = np.arcsin(sines)
        reflective = []
        idx = 1
        for factor in config.ring_radii:
            r = factor * boundary
            if r <= 0:
                raise ValueError("ring radii must be > 0")
            for psi in psis:
                pos = Point3.from_array(r * unit_direction(0.0, float(psi)))
                if classify_field(pos, ios, wavelength) is FieldRegion.FAR:
                    reflective.append(far_area(idx, 0.0, float(psi), r))
                else:
                    reflective.append(near_area(idx, pos))
                idx += 1
    half = len(reflective)
    areas = reflective + [mirror_area(a, index=a.index + half) for a in reflective]
    mirror = tuple(i + half if i <= half else i - half
                   for i in range(1, 2 * half + 1))
    return AreaGrid.from_areas(areas, ios, wavelength, mirror=mirror)


@dataclass(frozen=True)
class Codeword:
    """A synthesized beam target and the coverage set it interpolates."""

    q: np.ndarray
    coverage: frozenset[int]
    gain: float

    def __post_init__(self):
        if len(self.coverage) == 0:
            raise ValueError("empty coverage")


def synthesize_codeword(coverage, grid: AreaGrid, gain: float = 1.0,
                        regularize: bool = True,
                        cond_limit: float = 1e12) -> Codeword:
    """Least-squares interpolation codeword over the grid's row stack.

    Solves H_hat q = gain * u for the indicator u of `coverage`.  When the
    Gram matrix condition exceeds `cond_limit` a small Tikhonov term
    (1e-10 * trace / P on the diagonal) is added, unless regularization is
    disabled, in which case the condition estimate is reported in the error.
    """
    cov = frozenset(int(i) for i in coverage)
    if not cov:
        raise ValueError("empty coverage")
    if not cov <= set(range(1, grid.p + 1)):
        raise ValueError(f"coverage {sorted(cov)} outside grid 1..{grid.p}")
    h = grid.matrix
    u = np.zeros(grid.p)
    u[[i - 1 for i in cov]] = 1.0
    gram = h @ h.conj().T
    cond = float(np.linalg.cond(gram))
    if cond > cond_limit or not math.isfinite(cond):
        if not regularize:
            raise ValueError(
                f"singular synthesis system (condition estimate {cond:.3e})")
        eps = 1e-10 * float(np.trace(gram).real) / grid.p
        gram = gram + eps * np.eye(grid.p)
    q = gain * (h.conj().T @ np.linalg.solve(gram, u))
    return Codeword(q, cov, gain)


def mirrored_coverage(coverage, grid: AreaGrid) -> frozenset[int]:
    """Image coverage set across the surface plane (mirrored grids only)."""
    cov = frozenset(int(i) for i in coverage)
    if grid.mirror is None:
        raise ValueError("grid has no mirror structure")
    if not cov <= set(range(1, grid.p + 1)):
        raise ValueError("coverage outside the grid")
    return frozenset(grid.mirror_index(i) for i in cov)


class HierarchicalCodebook:
    """Binary-tree codebook over one side of a mirrored grid.

    Layer s in 1..S-1 holds two codewords; member j covers the indices whose
    s-th most significant bit (of index-1, in S bits) equals j-1.  That is
    the interleaved refinement pattern: each layer halves every surviving
    block of the previous layer, and the two members together always tile all
    P/2 indices.  The bottom layer (s = S) is the per-area codewords,
    synthesized on first use.
    """

    def __init__(self, grid: AreaGrid, synth_grid: AreaGrid, gain: float = 1.0):
        if not _power_of_two(synth_grid.p) or synth_grid.p < 2:
            raise ValueError("tree needs a power-of-two leaf count >= 2")
        self.grid = grid
        self.synth_grid = synth_grid
        self.gain = gain
        self.depth = int(math.log2(synth_grid.p))
        self._uppers: dict[tuple[int, int], Codeword] = {}
        self._leaves: dict[int, Codeword] = {}
        for s in range(1, self.depth):
            for j in (1, 2):
                self._uppers[(s, j)] = synthesize_codeword(
                    self.layer_coverage(s, j), synth_grid, gain)

    @property
    def leaf_count(self) -> int:
        return self.synth_grid.p

    def layer_coverage(self, layer: int, member: int) -> frozenset[int]:
        if not 1 <= layer <= self.depth:
            raise ValueError(f"layer {layer} outside 1..{self.depth}")
        if member not in (1, 2):
            raise ValueError("member must be 1 or 2")
        shift = self.depth - layer
        return frozenset(i for i in range(1, self.leaf_count + 1)
                         if ((i - 1) >> shift) & 1 == member - 1)

    def upper(self, layer: int, member: int) -> Codeword:
        return self._uppers[(layer, member)]

    def leaf(self, index: int) -> Codeword:
        if not 1 <= index <= self.leaf_count:
            raise ValueError(f"leaf {index} outside 1..{self.leaf_count}")
        if index not in self._leaves:
            self._leaves[index] = synthesize_codeword({index}, self.synth_grid,
                                                      self.gain)
        return self._leaves[index]


def build_hierarchical_codebook(grid: AreaGrid, gain: float = 1.0,
                                side: Side | None = Side.REFLECTIVE
                                ) -> HierarchicalCodebook:
    """Tree over one side of a mirrored grid (or over a whole custom grid).

    With `side` set, synthesis runs on that side's half-stack; the other side
    is covered for free by the coupled twin beam.  Passing side=None treats
    the given grid as a plain single-surface codebook of P leaves.
    """
    if side is None:
        return HierarchicalCodebook(grid, grid, gain)
    if grid.mirror is None:
        raise ValueError("side selection requires a mirrored grid")
    return HierarchicalCodebook(grid, grid.side_subgrid(side), gain)


def user_combiner_codebook(n_u: int, beam_count: int,
                           spacing_wavelengths: float = 0.5) -> np.ndarray:
    """Unit-norm combiner sweep, shape (beam_count, n_u).

    Row i is the conjugate-match for direction cosine u_i = -1 + 2 i / B on
    an n_u-element line of the given spacing; the grid always contains
    broadside when B is even.
    """
    if n_u < 1 or beam_count < 1:
        raise ValueError("n_u and beam_count must be >= 1")
    cosines = -1.0 + 2.0 * np.arange(beam_count) / beam_count
    m = np.arange(n_u)
    w = np.exp(-2j * np.pi * spacing_wavelengths * np.outer(cosines, m))
    return w / math.sqrt(n_u)


def broadside_combiner_index(beam_count: int) -> int:
    """Index of the sweep row closest to broadside (direction cosine 0)."""
    cosines = -1.0 + 2.0 * np.arange(beam_count) / beam_count
    return int(np.argmin(np.abs(cosines)))


def factorize_codeword_init(q: np.ndarray, h_bi: np.ndarray,
                            spec: SurfaceSpec
                            ) -> tuple[SurfaceConfiguration, np.ndarray]:
    """One-shot factorization of a codeword into surface phases + precoder.

    The precoder is the uniform unit-norm column; each reflective phase then
    rotates its element's incident sample onto the codeword's phase:
    phi_t = angle(q) - angle(H_BI v).  The reflective beam Psi_t H_BI v is
    exactly phase aligned with q; only amplitudes mismatch.
    """
    q = np.asarray(q)
    if q.ndim != 1 or h_bi.shape[0] != q.shape[0]:
        raise ValueError("codeword / channel dimension mismatch")
    v = np.ones(h_bi.shape[1], dtype=complex) / math.sqrt(h_bi.shape[1])
    incident = h_bi @ v
    if np.any(np.abs(incident) == 0) or np.any(np.abs(q) == 0):
        raise ValueError("zero incident sample or codeword entry")
    phi = np.angle(q) - np.angle(incident)
    return SurfaceConfiguration.from_phases(phi, spec), v


@dataclass(frozen=True)
class RealizedCodeword:
    """A codeword pushed through the surface: configuration plus both beams."""

    codeword: Codeword
    surface: SurfaceConfiguration
    precoder: np.ndarray
    beam_reflect: np.ndarray
    beam_refract: np.ndarray

    @classmethod
    def realize(cls, codeword: Codeword, h_bi: np.ndarray,
                spec: SurfaceSpec) -> "RealizedCodeword":
        config, v = factorize_codeword_init(codeword.q, h_bi, spec)
        incident = h_bi @ v
        return cls(codeword, config, v,
                   config.psi_t_diag * incident, config.psi_r_diag * incident)


class CodebookRealization:
    """Memoized realization of a whole codebook against one downlink.

    `serving` selects which half-space the realized beams illuminate: None
    for the coupled surface (both sides), or a single `Side` for a
    reflect-only surface aimed at that side.
    """

    def __init__(self, codebook: HierarchicalCodebook, h_bi: np.ndarray,
                 spec: SurfaceSpec, serving: Side | None = None):
        self.codebook = codebook
        self.h_bi = h_bi
        self.spec = spec
        self.serving = serving
        self._upper: dict[tuple[int, int], RealizedCodeword] = {}
        self._leaf: dict[int, RealizedCodeword] = {}

    @property
    def depth(self) -> int:
        return self.codebook.depth

    @property
    def leaf_count(self) -> int:
        return self.codebook.leaf_count

    def upper(self, layer: int, member: int) -> RealizedCodeword:
        key = (layer, member)
        if key not in self._upper:
            self._upper[key] = RealizedCodeword.realize(
                self.codebook.upper(layer, member), self.h_bi, self.spec)
        return self._upper[key]

    def leaf(self, index: int) -> RealizedCodeword:
        if index not in self._leaf:
            self._leaf[index] = RealizedCodeword.realize(
                self.codebook.leaf(index), self.h_bi, self.spec)
        return self._leaf[index]

    def side_beam(self, realized: RealizedCodeword, side: Side) -> np.ndarray:
        """Nominal broadcast beam a user on `side` receives from this codeword.

        Broadcasts are scored against the synthesized pattern normalized to
        unit energy: every training slot radiates the same power, whereas raw
        codewords targeting farther areas carry far more energy for the same
        delivered gain.  The coupled surface radiates the refractive twin at
        the fixed constant e^{-jc} gamma_r/gamma_t times the reflective
        pattern, so the nominal pattern is side-faithful up to that constant.
        The gap between the pattern and its phase-only realization is the fit
        residual, which the beamforming stage closes after selection.
        """
        q = realized.codeword.q
        norm = np.linalg.norm(q)
        if norm == 0:
            return np.zeros_like(q)
        q = q / norm
        if self.serving is None:
            if side is Side.REFLECTIVE:
                return q
            ratio = self.spec.gamma_r / self.spec.gamma_t
            return (ratio * np.exp(-1j * self.spec.coupling)) * q
        if side is self.serving:
            return q
        return np.zeros_like(q)


def export_codebook_csv(codebook: HierarchicalCodebook, path) -> None:
    """One row per codeword: layer, member, coverage, interleaved re/im of q."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        l_dim = codebook.synth_grid.matrix.shape[1]
        header = ["layer", "member", "coverage"]
        for l in range(l_dim):
            header += [f"re{l}", f"im{l}"]
        writer.writerow(header)

        def row_for(layer, member, cw):
            cells = [layer, member, "|".join(str(i) for i in sorted(cw.coverage))]
            for z in cw.q:
                cells += [f"{z.real:.12g}", f"{z.imag:.12g}"]
            return cells

        for s in range(1, codebook.depth):
            for j in (1, 2):
                writer.writerow(row_for(s, j, codebook.upper(s, j)))
        for i in range(1, codebook.leaf_count + 1):
            writer.writerow(row_for(codebook.depth, i, codebook.leaf(i)))
