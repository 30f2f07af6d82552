"""Fitting model parameters against a standard vector by multistart search.

The objective is the root-mean-square error between a model's predictions and
the oracle's standard answers over the evidence grid. Minimisation uses a
deflected-gradient (quasi-Newton) descent: the step direction is the negative
gradient deflected through a running inverse-curvature estimate, updated with
a standard secant-condition (BFGS-style) rank update after each accepted step
and reset to the identity every N+1 iterations, where N is the number of free
parameters. Gradients are central finite differences in the search
coordinates; steps are accepted through a backtracking line search that halves
the step until the objective decreases.

Bounded parameters (INDP, PRSP) are searched through a logistic
reparameterisation so the search itself is unconstrained; search coordinates
are clamped to |x| <= 30 to keep the sigmoid out of saturation. WRST has the
closed-form solution (the mean of the targets) and LINR additionally gets the
exact least-squares solution as a start, so its fit can never be worse than
the closed form.

Every fit runs from several starts: the caller-supplied warm start when there
is one, a constant-baseline start at the mean of the targets (every model can
represent a constant, which guarantees a fit is never worse than WRST), and
``n_starts`` seeded random starts. ``fit`` is a pure function of its
arguments; independent fits may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import PARAM_DIM, ModelKind, ModelParams, _predict_rows, logit, predict_grid, sigmoid

__all__ = ["OptimSettings", "FitResult", "objective", "ols_linr", "fit"]

_SEARCH_CLAMP = 30.0
_BOUNDED_KINDS = (ModelKind.INDP, ModelKind.PRSP)
_KIND_INDEX = {kind: i for i, kind in enumerate(ModelKind)}


@dataclass(frozen=True)
class OptimSettings:
    """Knobs of the multistart search; all must be positive.

    The inverse-curvature reset period is not a knob: it is fixed at N+1
    iterations for an N-parameter model.
    """

    n_starts: int = 5
    max_iters: int = 500
    grad_tol: float = 1e-8
    obj_rel_tol: float = 1e-12
    fd_step: float = 1e-6

    def __post_init__(self) -> None:
        if self.n_starts < 1 or self.max_iters < 1:
            raise ValueError("n_starts and max_iters must be positive")
        if min(self.grad_tol, self.obj_rel_tol, self.fd_step) <= 0.0:
            raise ValueError("tolerances and fd_step must be positive")


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    epsilon: float
    iterations: int
    converged: bool
    start_index: int

    def __post_init__(self) -> None:
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon!r}")


def _target_arrays(targets) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not targets:
        raise ValueError("targets must be non-empty")
    e1 = np.array([ev.e1 for ev, _ in targets], dtype=np.float64)
    e2 = np.array([ev.e2 for ev, _ in targets], dtype=np.float64)
    c = np.array([v for _, v in targets], dtype=np.float64)
    return e1, e2, c


def objective(params: ModelParams, targets) -> float:
    """Root-mean-square error of the model against the standard vector."""
    e1, e2, c = _target_arrays(targets)
    if params.kind is ModelKind.BST:
        return 0.0
    pred = predict_grid(params.kind, params.values, e1, e2)
    return float(np.sqrt(np.mean((c - pred) ** 2)))


def ols_linr(targets) -> ModelParams:
    """Exact least-squares LINR solution via the normal equations.

    Cross-checks the iterative optimizer; raises ``numpy.linalg.LinAlgError``
    when the grid is degenerate (design matrix singular).
    """
    e1, e2, c = _target_arrays(targets)
    design = np.column_stack([e1, e2, np.ones_like(e1)])
    beta = np.linalg.solve(design.T @ design, design.T @ c)
    return ModelParams(ModelKind.LINR, tuple(beta))


def _to_model_values(kind: ModelKind, x: np.ndarray) -> np.ndarray:
    if kind in _BOUNDED_KINDS:
        return sigmoid(np.clip(x, -_SEARCH_CLAMP, _SEARCH_CLAMP))
    return x


def _to_search_coords(kind: ModelKind, values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if kind in _BOUNDED_KINDS:
        lo, hi = float(sigmoid(-_SEARCH_CLAMP)), float(sigmoid(_SEARCH_CLAMP))
        return np.asarray(logit(np.clip(x, lo, hi)), dtype=np.float64)
    return x.copy()


def _fd_grad(f_rows, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient; all 2n perturbed points in one batch."""
    n = x.size
    points = np.repeat(x[None, :], 2 * n, axis=0)
    idx = np.arange(n)
    points[idx, idx] += h
    points[n + idx, idx] -= h
    vals = f_rows(points)
    return (vals[:n] - vals[n:]) / (2.0 * h)


def _search(f, f_rows, x0: np.ndarray, settings: OptimSettings):
    """Deflected-gradient descent from one start.

    ``f`` evaluates a single search vector, ``f_rows`` a batch of them (used
    for finite-difference gradients). Returns (x, fx, iterations, converged,
    history) where history is the sequence of accepted objective values,
    starting with f(x0).
    """
    x = np.asarray(x0, dtype=np.float64).copy()
    n = x.size
    fx = f(x)
    history = [fx]
    if not np.isfinite(fx):
        return x, np.inf, 0, False, history

    reset_period = n + 1
    curv = np.eye(n)
    g = _fd_grad(f_rows, x, settings.fd_step)
    converged = False
    iterations = 0
    for it in range(1, settings.max_iters + 1):
        iterations = it
        if not np.all(np.isfinite(g)):
            break
        if float(np.linalg.norm(g)) < settings.grad_tol:
            converged = True
            break
        if it % reset_period == 0:
            curv = np.eye(n)
        direction = -(curv @ g)
        if float(direction @ g) >= 0.0:
            curv = np.eye(n)
            direction = -g

        step = 1.0
        accepted = False
        for _ in range(50):
            x_new = x + step * direction
            f_new = f(x_new)
            if np.isfinite(f_new) and f_new < fx:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True  # no descent along the deflected direction
            break

        g_new = _fd_grad(f_rows, x_new, settings.fd_step)
        s = x_new - x
        y = g_new - g
        ys = float(y @ s)
        if ys > 1e-12:
            rho = 1.0 / ys
            left = np.eye(n) - rho * np.outer(s, y)
            curv = left @ curv @ left.T + rho * np.outer(s, s)
        else:
            curv = np.eye(n)

        rel_drop = (fx - f_new) / max(abs(fx), 1e-300)
        x, fx, g = x_new, f_new, g_new
        history.append(fx)
        if rel_drop < settings.obj_rel_tol:
            converged = True
            break
    return x, fx, iterations, converged, history


def _constant_start(kind: ModelKind, mean_target: float) -> tuple[float, ...]:
    """Parameters at which the model predicts the target mean everywhere."""
    m = mean_target
    if kind is ModelKind.LINR:
        return (0.0, 0.0, m)
    m = min(max(m, 1e-6), 1.0 - 1e-6)
    if kind is ModelKind.PWR:
        return (0.0, 0.0, float(logit(m)))
    if kind is ModelKind.INDP:
        return (m, m, m, m)
    if kind is ModelKind.PRSP:
        return (m, 0.5, m, m, 0.5, m, m)
    raise ValueError(f"no constant start for {kind.value}")


def fit(
    kind: ModelKind,
    targets,
    settings: OptimSettings | None = None,
    seed: int = 0,
    warm_start: ModelParams | None = None,
) -> FitResult:
    """Minimise the RMS objective for ``kind`` over the given standard vector.

    ``warm_start`` is an optional parameter vector of the same kind used as an
    extra start (callers typically pass the parameters read off the underlying
    joint). Non-convergence within the iteration budget is not an error; the
    best point found is returned with ``converged=False``. A fit error is
    raised only if no start produces a finite objective.
    """
    settings = settings or OptimSettings()
    if kind is ModelKind.BST:
        raise ValueError("BST requires no fit; its error is zero by definition")
    if warm_start is not None and warm_start.kind is not kind:
        raise ValueError(f"warm start is {warm_start.kind.value}, expected {kind.value}")

    e1, e2, c = _target_arrays(targets)

    if kind is ModelKind.WRST:
        const = float(np.mean(c))
        eps = float(np.sqrt(np.mean((c - const) ** 2)))
        return FitResult(ModelParams(kind, (const,)), eps, 0, True, 0)

    def f_rows(points: np.ndarray) -> np.ndarray:
        pred = _predict_rows(kind, _to_model_values(kind, points), e1, e2)
        rms = np.sqrt(np.mean((c - pred) ** 2, axis=-1))
        return np.where(np.isfinite(rms), rms, np.inf)

    def f(x: np.ndarray) -> float:
        return float(f_rows(x[None, :])[0])

    starts: list[np.ndarray] = []
    if warm_start is not None:
        starts.append(_to_search_coords(kind, warm_start.values))
    if kind is ModelKind.LINR:
        starts.append(_to_search_coords(kind, ols_linr(targets).values))
    starts.append(_to_search_coords(kind, _constant_start(kind, float(np.mean(c)))))

    dim = PARAM_DIM[kind]
    rng = np.random.default_rng([int(seed), _KIND_INDEX[kind]])
    spread = 2.0 if kind in _BOUNDED_KINDS else 1.0
    for _ in range(settings.n_starts):
        starts.append(rng.uniform(-spread, spread, size=dim))

    best = None
    for idx, x0 in enumerate(starts):
        x, fx, iters, converged, _ = _search(f, f_rows, x0, settings)
        if np.isfinite(fx) and (best is None or fx < best[1]):
            best = (x, fx, iters, converged, idx)
    if best is None:
        raise RuntimeError(f"{kind.value} fit failed: no start produced a finite objective")

    x, fx, iters, converged, idx = best
    params = ModelParams(kind, tuple(_to_model_values(kind, x)))
    return FitResult(params, fx, iters, converged, idx)
