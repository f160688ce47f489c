"""Joint surface/precoder factorization, power allocation and rate metrics.

Given per-user target beams q_k (columns of Q), the transmitter needs surface
phases and digital precoder columns v_k such that Psi_t H_BI v_k tracks q_k.
The fit

    f = sum_k || q_k - Psi_t H_BI v_k ||^2

is minimized by block-coordinate descent: with phases fixed the least-squares
precoder is closed form, and with the precoder fixed the phase objective
separates per element into maximizing Re{b_l e^{j phi_l}} with

    b_l = sum_k conj(q_k)_l * (H_BI v_k)_l,

whose exact maximizer is phi_l = -angle(b_l).  Both steps decrease f, so the
residual trace is non-increasing.  The loop iterates on the unnormalized
least-squares precoder (the true descent step); the returned solution stores
unit-norm columns, with transmit powers assigned afterwards by water-filling
in the gain-weighted normalization

    p_k = (1 / g_k) max(1/mu - g_k sigma^2, 0),
    sum_k max(1/mu - g_k sigma^2, 0) = P_T,

where g_k is the k-th diagonal entry of H_eff^H H_eff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .surface import SurfaceConfiguration, SurfaceSpec

__all__ = [
    "BeamformerSolution",
    "EffectiveChannel",
    "residual",
    "coupling_vector",
    "optimize_phases",
    "digital_precoder",
    "alternating_factorization",
    "water_filling",
    "effective_channel",
    "sum_rate",
    "throughput",
    "write_solution",
]


def _targets_matrix(targets) -> np.ndarray:
    q = np.asarray(targets, dtype=complex)
    if q.ndim == 1:
        q = q[:, None]
    if q.ndim != 2:
        raise ValueError("targets must be a vector or an (L, K) matrix")
    return q


def residual(precoder: np.ndarray, surface: SurfaceConfiguration,
             targets, h_bi: np.ndarray) -> float:
    """Exact fit f = sum_k ||q_k - Psi_t H_BI v_k||^2."""
    q = _targets_matrix(targets)
    v = np.asarray(precoder, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    realized = surface.psi_t_diag[:, None] * (h_bi @ v)
    return float(np.sum(np.abs(q - realized) ** 2))


def coupling_vector(targets, h_bi: np.ndarray, precoder: np.ndarray) -> np.ndarray:
    """Per-element phase objective coefficients b (length L)."""
    q = _targets_matrix(targets)
    v = np.asarray(precoder, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    incident = h_bi @ v  # (L, K)
    return np.sum(q.conj() * incident, axis=1)


def optimize_phases(targets, h_bi: np.ndarray, precoder: np.ndarray,
                    spec: SurfaceSpec,
                    current: SurfaceConfiguration | None = None
                    ) -> SurfaceConfiguration:
    """Exact per-element phase update phi_l = -angle(b_l) in one pass.

    Elements with b_l = 0 have a flat objective; their phase is kept from
    `current` (or left at zero).  Quantization is deliberately not applied
    here so the descent property holds; project at the end of the loop.
    """
    b = coupling_vector(targets, h_bi, precoder)
    phi = -np.angle(b)
    dead = np.abs(b) == 0
    if np.any(dead):
        phi[dead] = current.phi_t[dead] if current is not None else 0.0
    continuous = SurfaceSpec(spec.coupling, spec.gamma_t, None)
    return SurfaceConfiguration.from_phases(phi, continuous)


def _ls_precoder(surface: SurfaceConfiguration, h_bi: np.ndarray,
                 q: np.ndarray, rcond: float | None = None) -> np.ndarray:
    """Unnormalized least-squares precoder columns for fixed phases.

    Solved through the SVD rather than the normal equations: a short
    line-of-sight feeder link makes the cascade badly conditioned, and
    forming the Gram matrix would square that condition number.

    With `rcond` set, singular directions below rcond * s_max are dropped
    (lstsq's built-in truncation).  The feeder is effectively low rank, and
    the full-rank solution pours energy ~ 1/s_i into near-null directions
    chasing residual components the surface cannot deliver anyway; those
    components dominate the column norm, so the unit-norm precoder actually
    transmitted would realize almost no gain.  Because the surface phase
    matrix is a unitary diagonal, the truncated subspace (top right-singular
    vectors of H_BI) is the same at every phase setting, so truncated
    v-steps still descend a fixed restricted objective and the residual
    trace stays non-increasing.
    """
    a = surface.psi_t_diag[:, None] * h_bi  # (L, N_b)
    v, _, rank, sings = np.linalg.lstsq(a, q, rcond=rcond)
    if rcond is None and rank < a.shape[1]:
        cond = float(sings[0] / sings[-1]) if sings[-1] > 0 else math.inf
        raise ValueError(
            f"rank-deficient precoding system (condition estimate {cond:.3e})")
    return v


def digital_precoder(surface: SurfaceConfiguration, h_bi: np.ndarray,
                     targets, rcond: float | None = None) -> np.ndarray:
    """Unit-norm least-squares precoder columns for the given targets.

    Exact least squares by default; pass `rcond` to truncate the feeder's
    near-null directions (see `_ls_precoder`).
    """
    q = _targets_matrix(targets)
    v = _ls_precoder(surface, h_bi, q, rcond=rcond)
    norms = np.linalg.norm(v, axis=0)
    if np.any(norms == 0):
        raise ValueError("degenerate target produced a zero precoder column")
    return v / norms


@dataclass
class BeamformerSolution:
    """Converged factorization state plus bookkeeping for trace reporting."""

    surface: SurfaceConfiguration
    precoder: np.ndarray  # (N_b, K), unit-norm columns
    residual_trace: list[float]
    converged: bool
    aux_constant: float
    aux_vector: np.ndarray
    powers: np.ndarray | None = None

    @property
    def final_residual(self) -> float:
        return self.residual_trace[-1]


def alternating_factorization(targets, h_bi: np.ndarray, spec: SurfaceSpec,
                              tol: float = 1e-8, max_iter: int = 100,
                              rng: np.random.Generator | None = None,
                              rcond: float | None = 1e-3
                              ) -> BeamformerSolution:
    """Alternate exact phase and least-squares precoder updates.

    Starts from random phases (rng, default seed 0 for reproducibility) and
    stops when the relative residual change drops below `tol` or after
    `max_iter` sweeps, flagging non-convergence.  If the spec requests
    quantized phases they are projected onto the grid after the loop and the
    precoder is re-solved once against the projected surface.

    `rcond` truncates the feeder's near-null singular directions in every
    precoder solve (default keeps the modes the surface can realize at unit
    precoder norm; None reproduces exact least squares).
    """
    q = _targets_matrix(targets)
    if rng is None:
        rng = np.random.default_rng(0)
    continuous = SurfaceSpec(spec.coupling, spec.gamma_t, None)
    surface = SurfaceConfiguration.from_phases(
        rng.uniform(0.0, 2.0 * np.pi, size=h_bi.shape[0]), continuous)
    v = _ls_precoder(surface, h_bi, q, rcond=rcond)
    trace = [residual(v, surface, q, h_bi)]
    converged = False
    for _ in range(max_iter):
        surface = optimize_phases(q, h_bi, v, spec, current=surface)
        v = _ls_precoder(surface, h_bi, q, rcond=rcond)
        trace.append(residual(v, surface, q, h_bi))
        prev, cur = trace[-2], trace[-1]
        if prev == 0.0 or abs(prev - cur) / max(prev, 1e-300) < tol:
            converged = True
            break
    if spec.phase_bits is not None:
        surface = SurfaceConfiguration.from_phases(surface.phi_t, spec)
        v = _ls_precoder(surface, h_bi, q, rcond=rcond)
    b = coupling_vector(q, h_bi, v)
    aux_a = float(np.sum(np.abs(q) ** 2) +
                  np.sum(np.abs(h_bi @ v) ** 2))
    norms = np.linalg.norm(v, axis=0)
    if np.any(norms == 0):
        raise ValueError("degenerate target produced a zero precoder column")
    return BeamformerSolution(surface, v / norms, trace, converged, aux_a, b)


def water_filling(gains, sigma2: float, p_total: float) -> np.ndarray:
    """Powers p_k = max(level - g_k sigma2, 0) / g_k with the level set so the
    max terms sum exactly to the budget.

    Solved by exact active-set descent on the water level (no iteration
    tolerance): sort the cutoffs g_k sigma2, then the level for m active
    users is (P_T + sum of their cutoffs) / m; the correct m is the largest
    one whose level clears its highest included cutoff.
    """
    g = np.asarray(gains, dtype=float)
    if g.size == 0:
        raise ValueError("empty gain list")
    if np.any(g <= 0):
        raise ValueError("gains must be > 0")
    if p_total <= 0:
        raise ValueError("power budget must be > 0")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    cutoffs = g * sigma2
    order = np.argsort(cutoffs, kind="stable")
    sorted_cut = cutoffs[order]
    prefix = np.cumsum(sorted_cut)
    level = 0.0
    for m in range(g.size, 0, -1):
        level = (p_total + prefix[m - 1]) / m
        if level > sorted_cut[m - 1]:
            break
    terms = np.maximum(level - cutoffs, 0.0)
    return terms / g


@dataclass(frozen=True)
class EffectiveChannel:
    """Post-combining user-by-stream matrix and its column gains."""

    matrix: np.ndarray  # (K, K): row = user, column = stream

    @property
    def gains(self) -> np.ndarray:
        return np.real(np.einsum("jk,jk->k", self.matrix.conj(), self.matrix))


def effective_channel(combiners, channels, surface_diags, h_bi: np.ndarray,
                      precoder: np.ndarray) -> EffectiveChannel:
    """Assemble H_eff[k, k'] = w_k^H H_k diag(psi_k) H_BI v_k'.

    `surface_diags[k]` is the length-L coefficient diagonal governing what
    user k receives - the reflective or refractive vector of the shared
    surface, or its serving surface's vector in a two-surface layout.
    """
    k_users = len(channels)
    if not (len(combiners) == len(surface_diags) == k_users):
        raise ValueError("per-user argument lengths disagree")
    v = np.asarray(precoder, dtype=complex)
    if v.ndim != 2:
        raise ValueError("precoder must be (N_b, K)")
    rows = []
    for w, h, diag in zip(combiners, channels, surface_diags):
        rows.append((w.conj() @ h) * diag @ h_bi @ v)
    return EffectiveChannel(np.vstack(rows))


def sum_rate(effective: EffectiveChannel, powers, sigma2: float) -> float:
    """Sum over users of log2(1 + SINR) with streams as interference."""
    h = effective.matrix
    p = np.asarray(powers, dtype=float)
    if p.shape[0] != h.shape[1]:
        raise ValueError("power vector length mismatch")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    signal = p * np.abs(np.diag(h)) ** 2
    total = (np.abs(h) ** 2) @ p
    interference = total - signal
    return float(np.sum(np.log2(1.0 + signal / (interference + sigma2))))


def throughput(rate: float, training_slots: int, frame_slots: int) -> float:
    """Frame-averaged rate after spending `training_slots` on training."""
    if frame_slots <= 0:
        raise ValueError("frame_slots must be > 0")
    if training_slots < 0 or training_slots >= frame_slots:
        raise ValueError("training must fit strictly inside the frame")
    return (1.0 - training_slots / frame_slots) * rate


def write_solution(solution: BeamformerSolution, out_dir, prefix: str = "solution"
                   ) -> list[str]:
    """Dump phases, precoder, powers and residual trace as CSV files."""
    import os

    paths = []

    def emit(name, rows):
        path = os.path.join(out_dir, f"{prefix}_{name}.csv")
        with open(path, "w") as fh:
            for row in rows:
                fh.write(",".join(f"{x:.12g}" for x in row) + "\n")
        paths.append(path)

    emit("phases", [[p] for p in solution.surface.phi_t])
    emit("precoder", [
        [z for pair in ((c.real, c.imag) for c in row) for z in pair]
        for row in solution.precoder
    ])
    if solution.powers is not None:
        emit("powers", [[p] for p in solution.powers])
    emit("residual_trace", [[r] for r in solution.residual_trace])
    return paths
