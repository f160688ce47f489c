"""Hierarchical multi-user beam training over a realized codebook.

Protocol: for each upper layer the base station broadcasts the layer's two
realized codewords (two slots per layer regardless of the number of users);
every user measures both with its current combiner and tracks its region
index through

    beta_s = 2 * beta_{s-1} + tau_s - 2,        beta_0 = 1,

where tau_s in {1, 2} is the stronger member.  The bottom layer refines each
user separately over the two leaves {2 beta_{S-1} - 1, 2 beta_{S-1}}
consistent with its trajectory, and a final per-user combiner sweep picks the
receive beam with the chosen codeword fixed.  Total slot budget is therefore

    2 (S - 1) + 2 K + K * |W|.

Measurements are noise free by default; ties always resolve to the lower
index so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebook import (
    CodebookRealization,
    RealizedCodeword,
    broadside_combiner_index,
    user_combiner_codebook,
)
from .geometry import ArrayGeometry, Side

__all__ = [
    "TrainingConfig",
    "SimUser",
    "UserRecord",
    "TrainingReport",
    "measure_power",
    "run_layer",
    "update_region_index",
    "bottom_layer_refinement",
    "run_training",
    "exhaustive_search_oracle",
    "format_report",
]


@dataclass(frozen=True)
class TrainingConfig:
    """Measurement model and combiner sweep size."""

    sigma2: float = 1.0
    include_noise: bool = False
    combiner_beams: int = 4
    combiner_spacing: float = 0.5

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if self.combiner_beams < 1:
            raise ValueError("combiner_beams must be >= 1")


@dataclass(frozen=True)
class SimUser:
    """A dropped user: its array, half-space and true downlink channel."""

    geometry: ArrayGeometry
    side: Side
    channel: np.ndarray  # (N_u, L)


def measure_power(w: np.ndarray, channel: np.ndarray, beam: np.ndarray,
                  sigma2: float = 0.0, rng: np.random.Generator | None = None
                  ) -> float:
    """Received power |w^H H q|^2, plus a noise draw when rng is given."""
    amp = complex(w.conj() @ channel @ beam)
    if rng is not None and sigma2 > 0:
        noise = rng.standard_normal(2) * np.sqrt(sigma2 / 2.0)
        amp += complex(noise[0], noise[1])
    return float(abs(amp) ** 2)


def update_region_index(beta_prev: int, tau: int) -> int:
    """Region-index recursion beta_s = 2 beta_{s-1} + tau - 2."""
    if beta_prev < 1:
        raise ValueError("beta must be >= 1")
    if tau not in (1, 2):
        raise ValueError(f"tau must be 1 or 2, got {tau}")
    return 2 * beta_prev + tau - 2


def _measure(realization, realized, user, w, cfg, rng):
    beam = realization.side_beam(realized, user.side)
    noise_rng = rng if cfg.include_noise else None
    return measure_power(w, user.channel, beam, cfg.sigma2, noise_rng)


def run_layer(first: RealizedCodeword, second: RealizedCodeword,
              realization: CodebookRealization, users, combiners, cfg,
              rng=None) -> tuple[list[int], list[tuple[float, float]]]:
    """One broadcast layer: each user compares the two realized codewords.

    Returns per-user member choices tau (1 or 2, ties to 1) and the measured
    power pairs.
    """
    taus, powers = [], []
    for user, w in zip(users, combiners):
        p1 = _measure(realization, first, user, w, cfg, rng)
        p2 = _measure(realization, second, user, w, cfg, rng)
        taus.append(1 if p1 >= p2 else 2)
        powers.append((p1, p2))
    return taus, powers


def bottom_layer_refinement(beta_prev: int, realization: CodebookRealization,
                            user: SimUser, w: np.ndarray, cfg: TrainingConfig,
                            rng=None) -> tuple[int, int, tuple[float, float]]:
    """Per-user leaf choice between the two candidates under its trajectory."""
    candidates = (2 * beta_prev - 1, 2 * beta_prev)
    if candidates[1] > realization.leaf_count:
        raise ValueError("trajectory points past the last leaf")
    p1 = _measure(realization, realization.leaf(candidates[0]), user, w, cfg, rng)
    p2 = _measure(realization, realization.leaf(candidates[1]), user, w, cfg, rng)
    tau = 1 if p1 >= p2 else 2
    return candidates[tau - 1], tau, (p1, p2)


@dataclass
class UserRecord:
    trajectory: list[int] = field(default_factory=list)
    taus: list[int] = field(default_factory=list)
    layer_powers: list[tuple[float, float]] = field(default_factory=list)
    leaf: int = 0
    combiner_index: int = 0
    combiner_powers: list[float] = field(default_factory=list)
    final_power: float = 0.0


@dataclass
class TrainingReport:
    users: list[UserRecord]
    depth: int
    slots_broadcast: int
    slots_bottom: int
    slots_combiner: int

    @property
    def total_slots(self) -> int:
        return self.slots_broadcast + self.slots_bottom + self.slots_combiner


def _combiner_bank(user: SimUser, cfg: TrainingConfig) -> np.ndarray:
    return user_combiner_codebook(user.geometry.count, cfg.combiner_beams,
                                  cfg.combiner_spacing)


def run_training(realization: CodebookRealization, users, cfg: TrainingConfig,
                 rng: np.random.Generator | None = None) -> TrainingReport:
    """Full descent for a set of users sharing the broadcast slots."""
    users = list(users)
    if not users:
        raise ValueError("no users to train")
    s = realization.depth
    banks = [_combiner_bank(u, cfg) for u in users]
    start = broadside_combiner_index(cfg.combiner_beams)
    combiners = [bank[start] for bank in banks]
    records = [UserRecord() for _ in users]
    betas = [1] * len(users)

    for layer in range(1, s):
        pair = (realization.upper(layer, 1), realization.upper(layer, 2))
        taus, powers = run_layer(pair[0], pair[1], realization, users,
                                 combiners, cfg, rng)
        for k, (tau, pw) in enumerate(zip(taus, powers)):
            betas[k] = update_region_index(betas[k], tau)
            records[k].taus.append(tau)
            records[k].trajectory.append(betas[k])
            records[k].layer_powers.append(pw)

    for k, user in enumerate(users):
        leaf, tau, pw = bottom_layer_refinement(betas[k], realization, user,
                                                combiners[k], cfg, rng)
        records[k].leaf = leaf
        records[k].taus.append(tau)
        records[k].trajectory.append(leaf)
        records[k].layer_powers.append(pw)

    for k, user in enumerate(users):
        chosen = realization.leaf(records[k].leaf)
        sweep = [_measure(realization, chosen, user, w, cfg, rng)
                 for w in banks[k]]
        best = int(np.argmax(sweep))
        records[k].combiner_index = best
        records[k].combiner_powers = sweep
        records[k].final_power = sweep[best]

    return TrainingReport(records, s,
                          slots_broadcast=2 * (s - 1),
                          slots_bottom=2 * len(users),
                          slots_combiner=cfg.combiner_beams * len(users))


def exhaustive_search_oracle(realization: CodebookRealization, user: SimUser,
                             cfg: TrainingConfig,
                             rng: np.random.Generator | None = None
                             ) -> tuple[int, int, float]:
    """Best (leaf, combiner) over every pair; ties go to the lowest leaf.

    The brute-force reference the hierarchical descent is scored against.
    """
    bank = _combiner_bank(user, cfg)
    best_leaf, best_comb, best_power = 1, 0, -1.0
    for leaf in range(1, realization.leaf_count + 1):
        realized = realization.leaf(leaf)
        sweep = [_measure(realization, realized, user, w, cfg, rng)
                 for w in bank]
        c = int(np.argmax(sweep))
        if sweep[c] > best_power:
            best_leaf, best_comb, best_power = leaf, c, sweep[c]
    return best_leaf, best_comb, best_power


def format_report(report: TrainingReport) -> str:
    """Structured text: one line per user plus a slot summary."""
    lines = [f"depth={report.depth} slots_broadcast={report.slots_broadcast} "
             f"slots_bottom={report.slots_bottom} "
             f"slots_combiner={report.slots_combiner} "
             f"total_slots={report.total_slots}"]
    for k, rec in enumerate(report.users, start=1):
        traj = ">".join(str(b) for b in rec.trajectory)
        powers = ";".join(f"{a:.6g}/{b:.6g}" for a, b in rec.layer_powers)
        lines.append(f"user={k} trajectory={traj} leaf={rec.leaf} "
                     f"combiner={rec.combiner_index} "
                     f"final_power={rec.final_power:.6g} layer_powers={powers}")
    return "\n".join(lines) + "\n"
