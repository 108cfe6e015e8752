"""Scalar evaluation metrics and the seed-aggregation protocol."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, UndefinedMetricError
from .grid import CoefficientField, Field, ParamVector, Trajectory
from .solvers.spectral import downsample

EVAL_WINDOW_STRIDE = 10  # evaluation takes every 10th window along a trajectory


@dataclass(frozen=True)
class MetricReport:
    metric_name: str
    mean: float
    std: float
    n_seeds: int

    def to_dict(self) -> dict:
        return {
            "metric": self.metric_name,
            "mean": self.mean,
            "std": self.std,
            "n_seeds": self.n_seeds,
        }


def _as_array(x) -> np.ndarray:
    if isinstance(x, ParamVector):
        return np.asarray(x.values, dtype=np.float64)
    if isinstance(x, (Field, CoefficientField, Trajectory)):
        return np.asarray(x.values, dtype=np.float64).ravel()
    return np.asarray(x, dtype=np.float64).ravel()


def relative_error(phi_hat, phi) -> float:
    """|phi - phi_hat|_2 / |phi|_2 for scalars, vectors or coefficient fields."""
    a = _as_array(phi_hat)
    b = _as_array(phi)
    if a.shape != b.shape:
        raise InvalidConfigError(f"shape mismatch {a.shape} vs {b.shape}")
    denom = np.linalg.norm(b)
    if denom == 0:
        raise UndefinedMetricError("relative error undefined for zero-norm truth")
    return float(np.linalg.norm(b - a) / denom)


def nls(xs, errors) -> float:
    """Negated ordinary-least-squares slope of errors against xs.

    Larger values mean the error falls faster along the scaling axis.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(errors, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise InvalidConfigError("need two or more (x, error) pairs")
    if np.ptp(x) == 0:
        raise UndefinedMetricError("slope undefined for identical x values")
    xm = x - x.mean()
    slope = float(np.dot(xm, y - y.mean()) / np.dot(xm, xm))
    return -slope


def pearson(a, b) -> float:
    x = _as_array(a)
    y = _as_array(b)
    if x.size != y.size or x.size < 2:
        raise InvalidConfigError("need two equal-length sequences of length >= 2")
    xm = x - x.mean()
    ym = y - y.mean()
    sx = np.sqrt(np.dot(xm, xm))
    sy = np.sqrt(np.dot(ym, ym))
    if sx == 0 or sy == 0:
        raise UndefinedMetricError("correlation undefined for constant input")
    return float(np.dot(xm, ym) / (sx * sy))


def rel_l2(u, u_ref) -> float:
    a = _as_array(u)
    b = _as_array(u_ref)
    if a.shape != b.shape:
        raise InvalidConfigError(f"shape mismatch {a.shape} vs {b.shape}")
    denom = np.linalg.norm(b)
    if denom == 0:
        raise UndefinedMetricError("relative L2 undefined for zero reference")
    return float(np.linalg.norm(a - b) / denom)


def grid_independence(low: Trajectory, high: Trajectory,
                      method: str = "nearest") -> tuple[float, float]:
    """(rel_l2, pearson) between a solution and a downsampled finer one."""
    if high.grid.shape != low.grid.shape:
        ratios = {h // l for h, l in zip(high.grid.shape, low.grid.shape)}
        exact = all(
            h % l == 0 for h, l in zip(high.grid.shape, low.grid.shape)
        )
        if len(ratios) != 1 or not exact:
            raise InvalidConfigError(
                f"resolutions {high.grid.shape} and {low.grid.shape} are not nested"
            )
        high = downsample(high, ratios.pop(), method=method)
    return rel_l2(low, high), pearson(low.values, high.values)


def aggregate_over_seeds(per_seed_errors, metric_name: str = "relative_error") -> MetricReport:
    """Mean and population standard deviation across seeded runs."""
    errs = np.asarray(list(per_seed_errors), dtype=np.float64)
    if errs.size < 1:
        raise InvalidConfigError("need at least one seed")
    std = float(np.std(errs)) if errs.size > 1 else 0.0
    return MetricReport(
        metric_name=metric_name, mean=float(errs.mean()), std=std, n_seeds=int(errs.size)
    )


def eval_window_starts(n_frames: int, window_frames: int = 2,
                       stride: int = EVAL_WINDOW_STRIDE) -> list[int]:
    """Deterministic evaluation protocol: every stride-th window start."""
    last = n_frames - window_frames
    if last < 0:
        return []
    return list(range(0, last + 1, stride))
