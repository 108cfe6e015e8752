"""Classical inverse estimators that minimize the PDE residual over one slot.

Every scalar parameter enters the pointwise residual linearly (delta through
its square), so the noiseless minimizer has the closed form of a linear least
squares problem. :func:`estimate_linear_lsq` exploits that directly;
:func:`estimate_scan` stands in for generic black-box optimization, evaluating
the residual norm on a candidate grid and optionally refining around the best
bracket. :func:`estimate_darcy_pixelwise` classifies the two-level Darcy
coefficient cell by cell from the local flux balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import IllPosedError, InvalidConfigError, InvalidParamsError
from .grid import CoefficientField, Field, ParamVector, Trajectory
from .residual import compute_derivatives, residual_affine, residual_norm
from .systems import SystemSpec

DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class InverseEstimate:
    phi_hat: ParamVector
    residual_at_hat: float
    method: str  # "lsq" | "scan_refine" | "pixelwise"
    diagnostics: dict = field(default_factory=dict)


def _single_unknown(system: SystemSpec, known: ParamVector) -> str:
    unknown = [n for n in system.param_names if not known.has(n)]
    if len(unknown) != 1:
        raise InvalidParamsError(
            f"expected exactly one unknown slot, got {unknown or 'none'}"
        )
    return unknown[0]


def estimate_linear_lsq(
    window: Trajectory, system: SystemSpec, known: ParamVector
) -> InverseEstimate:
    """Closed-form least squares over the single unknown parameter slot."""
    target = _single_unknown(system, known)
    stack = compute_derivatives(window, system)
    f0, f1, kind = residual_affine(window, system, known, target, stack=stack)
    denom = float(np.sum(f1 * f1))
    if denom < DEGENERATE_EPS * f1.size:
        raise IllPosedError(
            f"degenerate least squares for {target!r}: coefficient field is numerically zero"
        )
    theta = -float(np.sum(f0 * f1)) / denom
    if kind == "squared":
        value = float(np.sqrt(max(0.0, theta)))
    else:
        value = theta
    phi_hat = known.with_value(target, value)
    res = residual_norm(window, phi_hat, system, stack=stack)
    return InverseEstimate(
        phi_hat=phi_hat,
        residual_at_hat=res,
        method="lsq",
        diagnostics={"n_evals": 2, "target": target, "theta": theta,
                     "denominator": denom},
    )


def estimate_scan(
    window: Trajectory,
    system: SystemSpec,
    known: ParamVector,
    grid_of_candidates,
    refine: bool = True,
) -> InverseEstimate:
    """Grid scan of the residual norm with optional bracket refinement.

    Refinement runs a bounded scalar minimization inside the bracket around
    the best candidate (log-parameterized for log-spaced systems) down to a
    relative width of 1e-6.
    """
    target = _single_unknown(system, known)
    candidates = np.asarray(list(grid_of_candidates), dtype=np.float64)
    if candidates.size == 0:
        raise InvalidConfigError("candidate grid is empty")
    stack = compute_derivatives(window, system)

    def objective(value: float) -> float:
        return residual_norm(window, known.with_value(target, value), system, stack=stack)

    values = [objective(c) for c in candidates]
    n_evals = len(values)
    best = int(np.argmin(values))
    best_value = float(candidates[best])
    best_res = values[best]
    bracket = (
        float(candidates[max(0, best - 1)]),
        float(candidates[min(len(values) - 1, best + 1)]),
    )

    if refine and candidates.size > 1 and bracket[0] < bracket[1]:
        log_axis = system.range_spacing == "log" and bracket[0] > 0
        lo, hi = (np.log(bracket) if log_axis else bracket)

        def wrapped(x: float) -> float:
            return objective(float(np.exp(x)) if log_axis else float(x))

        res = minimize_scalar(
            wrapped, bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-6 * max(abs(lo), abs(hi), 1e-30)},
        )
        n_evals += int(res.nfev)
        refined_value = float(np.exp(res.x)) if log_axis else float(res.x)
        refined_res = objective(refined_value)
        n_evals += 1
        if refined_res < best_res:
            best_value, best_res = refined_value, refined_res

    phi_hat = known.with_value(target, best_value)
    return InverseEstimate(
        phi_hat=phi_hat,
        residual_at_hat=best_res,
        method="scan_refine" if refine else "scan",
        diagnostics={"n_evals": n_evals, "bracket": bracket, "target": target},
    )


def estimate_darcy_pixelwise(
    u: Field, system: SystemSpec, levels: tuple[float, float] = (3.0, 12.0),
    confidence_margin: float = 0.1,
) -> tuple[CoefficientField, np.ndarray]:
    """Classify each interior cell to a coefficient level from the flux balance.

    Assumes the coefficient is locally constant over the 3x3 neighborhood, so
    the candidate residual at level a is |a * lap(u) + 1|. Cells where the two
    candidate residuals are within ``confidence_margin`` of each other are
    flagged low-confidence (the classification is ill-posed where grad u is
    locally flat). Returns the classified field and a boolean confidence mask.
    """
    if u.grid.ndims != 2:
        raise InvalidConfigError("pixelwise classification needs a 2D field")
    vals = u.values[0].astype(np.float64)
    dx, dy = u.grid.spacing
    lap = np.zeros_like(vals)
    lap[1:-1, 1:-1] = (
        (vals[2:, 1:-1] - 2.0 * vals[1:-1, 1:-1] + vals[:-2, 1:-1]) / dx**2
        + (vals[1:-1, 2:] - 2.0 * vals[1:-1, 1:-1] + vals[1:-1, :-2]) / dy**2
    )
    lo, hi = levels
    r_lo = np.abs(lo * lap + 1.0)
    r_hi = np.abs(hi * lap + 1.0)
    choice = np.where(r_hi < r_lo, hi, lo)
    closest = np.minimum(r_lo, r_hi)
    furthest = np.maximum(r_lo, r_hi)
    confident = (furthest - closest) > confidence_margin * furthest
    # boundary ring has no full stencil: classified as low level, low confidence
    confident[0, :] = confident[-1, :] = confident[:, 0] = confident[:, -1] = False
    coeff = CoefficientField(grid=u.grid, values=choice)
    return coeff, confident


def darcy_estimate(
    u: Field, system: SystemSpec, levels: tuple[float, float] = (3.0, 12.0)
) -> InverseEstimate:
    """Pixelwise classification packaged with its residual diagnostics."""
    coeff, confident = estimate_darcy_pixelwise(u, system, levels)
    window = Trajectory(grid=u.grid, channels=u.channels, times=np.array([0.0]),
                        values=u.values[None])
    res = residual_norm(window, None, system, coeff=coeff)
    return InverseEstimate(
        phi_hat=ParamVector(entries=()),
        residual_at_hat=res,
        method="pixelwise",
        diagnostics={
            "confident_fraction": float(confident.mean()),
            "high_fraction": float((coeff.values == levels[1]).mean()),
        },
    )
