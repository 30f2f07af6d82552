"""Minimum-cross-entropy updating of a joint under soft evidence on E1 and E2.

Given target posterior marginals (e1, e2) for the two evidence events, the
posterior is the distribution closest in KL divergence to the prior among all
distributions with those marginals. It is computed by iterative proportional
fitting (IPF): alternately rescale the E1=true/false atom blocks to hit e1,
then the E2 blocks to hit e2, until both marginals are within tolerance. Both
constraints are imposed jointly as a single projection, which is what makes
the answer invariant to the order the constraints are listed in.

The converged posterior has the exponential-tilt form
``atom'(x) = atom(x) * a^[E1(x)] * b^[E2(x)]`` for positive scalars a, b; in
particular atoms that are zero in the prior stay zero, and P(C | E1, E2) is
unchanged within each hard-evidence cell. Hard evidence (a target of exactly
0 or 1) is handled exactly by zeroing the excluded block, which makes the
update coincide with ordinary Bayesian conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import EVENT_MASKS, JointDist, marginal

__all__ = [
    "EvidencePair",
    "EvidenceGrid",
    "DEFAULT_GRID",
    "InfeasibleEvidenceError",
    "ConvergenceError",
    "mce_update",
    "standard_answer",
    "standard_vector",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_SWEEPS = 10000


class InfeasibleEvidenceError(ValueError):
    """The target marginals cannot be reached from the prior's support."""


class ConvergenceError(RuntimeError):
    """IPF failed to reach tolerance within the sweep budget."""


@dataclass(frozen=True)
class EvidencePair:
    """Target posterior probabilities for E1 and E2, each in [0, 1]."""

    e1: float
    e2: float

    def __post_init__(self) -> None:
        for name, value in (("e1", self.e1), ("e2", self.e2)):
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class EvidenceGrid:
    """Strictly increasing evidence levels in [0, 1], scanned over both events."""

    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        levels = tuple(float(v) for v in self.levels)
        if len(levels) == 0:
            raise ValueError("grid needs at least one level")
        for v in levels:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"grid level {v!r} outside [0, 1]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"grid levels must be strictly increasing, got {levels}")
        object.__setattr__(self, "levels", levels)

    def pairs(self) -> list[EvidencePair]:
        """All level combinations in row-major order (e1 outer, e2 inner)."""
        return [EvidencePair(a, b) for a in self.levels for b in self.levels]


DEFAULT_GRID = EvidenceGrid((0.001, 0.25, 0.5, 0.75, 0.999))


def _scale_block(atoms: np.ndarray, mask: np.ndarray, target: float, name: str) -> None:
    """Rescale the two blocks of ``atoms`` so the masked mass equals ``target``."""
    in_mass = float(atoms[mask].sum())
    out_mass = float(atoms[~mask].sum())
    if in_mass <= 0.0:
        if target > 0.0:
            raise InfeasibleEvidenceError(
                f"target P({name})={target!r} unreachable: P({name}) is 0 on the current support"
            )
        atoms[~mask] *= 1.0 / out_mass
        return
    if out_mass <= 0.0:
        if target < 1.0:
            raise InfeasibleEvidenceError(
                f"target P({name})={target!r} unreachable: P({name}) is 1 on the current support"
            )
        atoms[mask] *= 1.0 / in_mass
        return
    atoms[mask] *= target / in_mass
    atoms[~mask] *= (1.0 - target) / out_mass


def mce_update(
    d: JointDist,
    ev: EvidencePair,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    sweep_order: tuple[str, str] = ("E1", "E2"),
) -> JointDist:
    """Minimum-cross-entropy posterior of ``d`` with marginals fixed to ``ev``.

    Raises :class:`InfeasibleEvidenceError` when a target marginal cannot be
    reached (e.g. e1 > 0 while P(E1) = 0 under ``d``), and
    :class:`ConvergenceError` when the sweep budget is exhausted, reporting
    the residual.
    """
    if set(sweep_order) != {"E1", "E2"}:
        raise ValueError(f"sweep_order must be a permutation of ('E1', 'E2'), got {sweep_order!r}")
    targets = {"E1": float(ev.e1), "E2": float(ev.e2)}
    for name, target in targets.items():
        mask = EVENT_MASKS[name]
        if target > 0.0 and float(d.atoms[mask].sum()) <= 0.0:
            raise InfeasibleEvidenceError(
                f"target P({name})={target!r} unreachable: P({name})=0 under the prior"
            )
        if target < 1.0 and float(d.atoms[~mask].sum()) <= 0.0:
            raise InfeasibleEvidenceError(
                f"target P({name})={target!r} unreachable: P({name})=1 under the prior"
            )

    atoms = np.array(d.atoms, dtype=np.float64)
    residual = np.inf
    for _ in range(max_sweeps):
        for name in sweep_order:
            _scale_block(atoms, EVENT_MASKS[name], targets[name], name)
        residual = max(
            abs(float(atoms[EVENT_MASKS["E1"]].sum()) - targets["E1"]),
            abs(float(atoms[EVENT_MASKS["E2"]].sum()) - targets["E2"]),
        )
        if residual <= tol:
            return JointDist(atoms)
    raise ConvergenceError(
        f"marginal residual {residual:.3e} above tol {tol:g} after {max_sweeps} sweeps"
    )


def standard_answer(
    d: JointDist,
    ev: EvidencePair,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> float:
    """Posterior P(C) after the minimum-cross-entropy update: the target each model is scored against."""
    return marginal(mce_update(d, ev, tol=tol, max_sweeps=max_sweeps), "C")


def standard_vector(
    d: JointDist,
    grid: EvidenceGrid = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> list[tuple[EvidencePair, float]]:
    """Standard answers over the full evidence grid, row-major (e1 outer)."""
    return [(ev, standard_answer(d, ev, tol=tol, max_sweeps=max_sweeps)) for ev in grid.pairs()]
