"""The prediction models whose accuracy the harness measures.

Each model maps an evidence pair (e1, e2) -- the target posterior
probabilities of E1 and E2 -- to a predicted posterior probability of C,
given a parameter vector:

* ``LINR`` -- linear regression of probabilities: a1*e1 + a2*e2 + b. The
  output is deliberately not clipped to [0, 1]; only squared errors are ever
  compared, and the unconstrained surface is better behaved for the optimizer.
* ``INDP`` -- exact updating under a marginally independent prior, which
  reduces to a bilinear blend of the four conditionals b_ij = P(C | E1=i, E2=j).
* ``PRSP`` -- odds-ratio combination with piecewise-linear interpolation of
  each rule's single-evidence posterior, with seven free probabilities.
* ``PWR`` -- linear regression of log odds: logit(c) = a1*logit(e1) +
  a2*logit(e2) + b.
* ``WRST`` -- evidence-ignoring constant (fitted as the mean of the targets).
* ``BST`` -- the perfect reference (prediction == target); it carries no
  parameters and no predictor.

Scalar predictors wrap :func:`predict_grid`, the vectorised evaluator used in
the optimizer hot path, so the two paths are bit-identical by construction.
All predictors are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dist import EVENT_MASKS, JointDist, condition_c, marginal

__all__ = [
    "ModelKind",
    "ModelParams",
    "PARAM_DIM",
    "sigmoid",
    "logit",
    "predict",
    "predict_grid",
    "predict_linr",
    "predict_indp",
    "predict_prsp",
    "predict_pwr",
    "predict_wrst",
    "true_params_indp",
    "true_params_prsp",
]


class ModelKind(str, Enum):
    LINR = "LINR"
    INDP = "INDP"
    PRSP = "PRSP"
    PWR = "PWR"
    WRST = "WRST"
    BST = "BST"


PARAM_DIM = {
    ModelKind.LINR: 3,  # a1, a2, b
    ModelKind.INDP: 4,  # b00, b01, b10, b11
    ModelKind.PRSP: 7,  # pc, pe1, q(C|E1), q(C|not E1), pe2, q(C|E2), q(C|not E2)
    ModelKind.PWR: 3,   # a1, a2, b in logit space
    ModelKind.WRST: 1,  # the constant
    ModelKind.BST: 0,
}


@dataclass(frozen=True)
class ModelParams:
    """A model identifier plus its parameter vector.

    Dimension is fixed by the kind. INDP parameters must lie in [0, 1] (every
    combination then is a valid conditional table); PRSP parameters must lie
    strictly in (0, 1); LINR and PWR coefficients are unconstrained.
    """

    kind: ModelKind
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        expected = PARAM_DIM[self.kind]
        if len(values) != expected:
            raise ValueError(f"{self.kind.value} takes {expected} parameters, got {len(values)}")
        if not all(np.isfinite(values)):
            raise ValueError(f"{self.kind.value} parameters must be finite, got {values}")
        if self.kind is ModelKind.INDP and not all(0.0 <= v <= 1.0 for v in values):
            raise ValueError(f"INDP parameters must lie in [0, 1], got {values}")
        if self.kind is ModelKind.PRSP and not all(0.0 < v < 1.0 for v in values):
            raise ValueError(f"PRSP parameters must lie strictly in (0, 1), got {values}")
        object.__setattr__(self, "values", values)


def sigmoid(x):
    """Numerically stable inverse logit, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def logit(p):
    """log(p / (1 - p)), elementwise; defined for p strictly in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def _rule_posterior(e, p_e, q1, q0, pc):
    """Single-rule posterior of C: piecewise-linear through (0, q0), (p_e, pc), (1, q1)."""
    below = q0 + (e / p_e) * (pc - q0)
    above = pc + ((e - p_e) / (1.0 - p_e)) * (q1 - pc)
    return np.where(e <= p_e, below, above)


def _predict_rows(kind: ModelKind, values: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Evaluate rows of parameter vectors over flat evidence arrays.

    ``values`` has shape (m, n_params); ``e1`` and ``e2`` shape (k,). Returns
    an (m, k) prediction matrix. This is the single source for every model
    formula; it performs no domain checks (out-of-domain rows yield nan/inf),
    which lets the optimizer evaluate whole batches of perturbed parameter
    vectors in one call.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is ModelKind.LINR:
            a1, a2, b = values[:, 0:1], values[:, 1:2], values[:, 2:3]
            return a1 * e1 + a2 * e2 + b
        if kind is ModelKind.INDP:
            b00, b01, b10, b11 = (values[:, i : i + 1] for i in range(4))
            return (
                b00 * (1.0 - e1) * (1.0 - e2)
                + b01 * (1.0 - e1) * e2
                + b10 * e1 * (1.0 - e2)
                + b11 * e1 * e2
            )
        if kind is ModelKind.PRSP:
            pc, pe1, q11, q10, pe2, q21, q20 = (values[:, i : i + 1] for i in range(7))
            p1 = _rule_posterior(e1, pe1, q11, q10, pc)
            p2 = _rule_posterior(e2, pe2, q21, q20, pc)
            prior_odds = pc / (1.0 - pc)
            odds = prior_odds * ((p1 / (1.0 - p1)) / prior_odds) * ((p2 / (1.0 - p2)) / prior_odds)
            return odds / (1.0 + odds)
        if kind is ModelKind.PWR:
            a1, a2, b = values[:, 0:1], values[:, 1:2], values[:, 2:3]
            return sigmoid(a1 * logit(e1) + a2 * logit(e2) + b)
        if kind is ModelKind.WRST:
            return values[:, 0:1] + np.zeros_like(e1)
    raise ValueError(f"{kind.value} has no predictor")


def predict_grid(kind: ModelKind, values, e1, e2):
    """Evaluate a model over evidence arrays; shapes broadcast.

    Unlike the raw row evaluator, this validates the domain: PWR rejects
    evidence values at exactly 0 or 1, and PRSP rejects parameters whose
    single-rule posterior reaches 0 or 1 (odds multiplier undefined).
    """
    e1a = np.asarray(e1, dtype=np.float64)
    e2a = np.asarray(e2, dtype=np.float64)
    shape = np.broadcast_shapes(e1a.shape, e2a.shape)
    e1f = np.broadcast_to(e1a, shape).reshape(-1)
    e2f = np.broadcast_to(e2a, shape).reshape(-1)
    row = np.asarray(values, dtype=np.float64).reshape(1, -1)
    if kind is ModelKind.PWR and (
        np.any(e1f <= 0.0) or np.any(e1f >= 1.0) or np.any(e2f <= 0.0) or np.any(e2f >= 1.0)
    ):
        raise ValueError("PWR needs evidence strictly inside (0, 1); logit is infinite at 0 and 1")
    if kind is ModelKind.PRSP:
        pc, pe1, q11, q10, pe2, q21, q20 = row[0]
        for p in (_rule_posterior(e1f, pe1, q11, q10, pc), _rule_posterior(e2f, pe2, q21, q20, pc)):
            if np.any(p <= 0.0) or np.any(p >= 1.0):
                raise ValueError("single-rule posterior hit 0 or 1; odds multiplier undefined")
    return _predict_rows(kind, row, e1f, e2f)[0].reshape(shape)


def _scalar(params: ModelParams, expected: ModelKind, ev) -> float:
    if params.kind is not expected:
        raise ValueError(f"expected {expected.value} parameters, got {params.kind.value}")
    return float(predict_grid(expected, params.values, ev.e1, ev.e2))


def predict_linr(params: ModelParams, ev) -> float:
    """a1*e1 + a2*e2 + b, not clipped to [0, 1]."""
    return _scalar(params, ModelKind.LINR, ev)


def predict_indp(params: ModelParams, ev) -> float:
    """Bilinear blend of the four conditionals; always in [0, 1]."""
    return _scalar(params, ModelKind.INDP, ev)


def predict_prsp(params: ModelParams, ev) -> float:
    """Odds-ratio combination of the two interpolated single-rule posteriors.

    Each rule j maps its evidence value through the piecewise-linear curve
    anchored at (0, P(C|not Ej)), (pEj, pc), (1, P(C|Ej)); the rule's odds
    multiplier against the prior is then applied to the prior odds. At the
    prior point ev = (pE1, pE2) both multipliers are 1 and the output is pc.
    """
    return _scalar(params, ModelKind.PRSP, ev)


def predict_pwr(params: ModelParams, ev) -> float:
    """Inverse logit of a1*logit(e1) + a2*logit(e2) + b; always in (0, 1)."""
    return _scalar(params, ModelKind.PWR, ev)


def predict_wrst(params: ModelParams, ev) -> float:
    """The constant parameter, whatever the evidence says."""
    return _scalar(params, ModelKind.WRST, ev)


def predict(params: ModelParams, ev) -> float:
    """Dispatch to the predictor for ``params.kind``."""
    if params.kind is ModelKind.BST:
        raise ValueError("BST has no predictor; it is scored as prediction == target")
    return float(predict_grid(params.kind, params.values, ev.e1, ev.e2))


def true_params_indp(d: JointDist) -> ModelParams:
    """Read the four conditionals b_ij = P(C | E1=i, E2=j) off the joint.

    Requires every hard-evidence cell to have positive probability.
    """
    values = tuple(condition_c(d, i, j) for i in (0, 1) for j in (0, 1))
    return ModelParams(ModelKind.INDP, values)


def _cond_given(d: JointDist, event: str, present: bool) -> float:
    mask = EVENT_MASKS[event] if present else ~EVENT_MASKS[event]
    weight = float(d.atoms[mask].sum())
    joint = float(d.atoms[mask & EVENT_MASKS["C"]].sum())
    return joint / weight


def true_params_prsp(d: JointDist) -> ModelParams:
    """Read the seven probabilities a self-consistent rule base would carry.

    (pc, pE1, P(C|E1), P(C|not E1), pE2, P(C|E2), P(C|not E2)), used both as a
    warm start for fitting and in exactness checks. Requires the marginals of
    E1, E2 and C to lie strictly inside (0, 1).
    """
    for event in ("E1", "E2", "C"):
        m = marginal(d, event)
        if not (0.0 < m < 1.0):
            raise ValueError(f"P({event})={m!r} is on the boundary; parameters undefined")
    values = (
        marginal(d, "C"),
        marginal(d, "E1"),
        _cond_given(d, "E1", True),
        _cond_given(d, "E1", False),
        marginal(d, "E2"),
        _cond_given(d, "E2", True),
        _cond_given(d, "E2", False),
    )
    return ModelParams(ModelKind.PRSP, values)
