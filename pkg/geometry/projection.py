"""Euclidean projections onto a ball and onto the intersection of two balls."""

import logging

import numpy as np

import config
from errors import InvalidArgumentError
from geometry.core import Ball

logger = logging.getLogger(__name__)


def project_ball(point, ball: Ball) -> np.ndarray:
    """Projects a point onto a single closed ball."""
    point = np.asarray(point, dtype=float).reshape(-1)
    offset = point - ball.center
    dist = float(np.linalg.norm(offset))
    if dist <= ball.radius:
        return point.copy()
    return ball.center + offset * (ball.radius / dist)


def project_ball_intersection(
    point,
    outer: Ball,
    inner: Ball,
    tol: float = config.PROJECTION_TOL,
    max_sweeps: int = config.PROJECTION_MAX_SWEEPS,
) -> np.ndarray:
    """
    Projects a point onto ``outer ∩ inner`` with Dykstra's alternating projections.

    Feasible points and nested balls are handled directly. Raises
    InvalidArgumentError when the balls do not intersect. At the sweep cap the
    last iterate is pulled toward the middle of the lens, so the result is
    always feasible.
    """
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}.")
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape[0] != outer.dim or outer.dim != inner.dim:
        raise InvalidArgumentError("Point and balls must share one dimension.")

    gap = float(np.linalg.norm(outer.center - inner.center))
    if gap > outer.radius + inner.radius:
        raise InvalidArgumentError(
            f"Balls do not intersect: centres {gap:.6g} apart, radii {outer.radius:.6g} and {inner.radius:.6g}."
        )
    if outer.contains(point) and inner.contains(point):
        return point.copy()
    if gap + inner.radius <= outer.radius:
        return project_ball(point, inner)
    if gap + outer.radius <= inner.radius:
        return project_ball(point, outer)

    x = point.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for sweep in range(max_sweeps):
        y = project_ball(x + p, outer)
        p = x + p - y
        x_next = project_ball(y + q, inner)
        q = y + q - x_next
        moved = float(np.linalg.norm(x_next - x))
        x = x_next
        if moved <= tol and outer.contains(x, tol):
            return x
    logger.warning("Dykstra projection hit the %d sweep cap; pulling the iterate into the intersection.", max_sweeps)
    return _pull_into_lens(x, outer, inner)


def _segment_reach(start: np.ndarray, step: np.ndarray, ball: Ball) -> float:
    """Largest s with start + s * step inside the ball, for a start inside it."""
    a = float(step @ step)
    if a == 0.0:
        return 1.0
    offset = start - ball.center
    b = float(offset @ step)
    c = float(offset @ offset) - ball.radius ** 2
    return (-b + np.sqrt(max(b * b - a * c, 0.0))) / a


def _pull_into_lens(point: np.ndarray, outer: Ball, inner: Ball) -> np.ndarray:
    """Moves point toward the middle of the lens along the centre line until it is feasible."""
    gap = float(np.linalg.norm(inner.center - outer.center))
    axis = (inner.center - outer.center) / gap
    low = max(-outer.radius, gap - inner.radius)
    high = min(outer.radius, gap + inner.radius)
    anchor = outer.center + axis * (0.5 * (low + high))
    step = point - anchor
    s = min(1.0, _segment_reach(anchor, step, outer), _segment_reach(anchor, step, inner))
    return anchor + s * step
