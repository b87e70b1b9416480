"""Classical Bateman dual system, its Pontriagin form and the polar chart.

Coordinate conventions (4-vectors, positions first):

    bateman    (x, y, p_x, p_y)
    pontriagin (x1, x2, p1, p2)
    polar      (r, phi, p_r, p_phi)

All flows are closed form; ``rk4_flow`` is provided only as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartSingularityError
from .params import SystemParams

CHARTS = ("bateman", "pontriagin", "polar")


@dataclass(frozen=True)
class PhasePoint:
    chart: str
    coords: tuple

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != 4:
            raise ValueError("a phase point has four coordinates")
        if self.chart == "polar" and not coords[0] > 0:
            raise ChartSingularityError("polar chart requires r > 0")
        object.__setattr__(self, "coords", coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


def flow_matrix(p: SystemParams) -> np.ndarray:
    """F of the first-order damped system x' = F x."""
    return np.array([[-p.gamma, p.omega], [-p.omega, -p.gamma]])


def damped_trajectory(p: SystemParams, x0: float, v0: float, t: float):
    """Solution of x'' + 2 gamma x' + kappa x = 0; returns (x, x')."""
    g, w = p.gamma, p.omega
    c, s = math.cos(w * t), math.sin(w * t)
    e = math.exp(-g * t)
    b = (v0 + g * x0) / w
    x = e * (x0 * c + b * s)
    v = -g * x + e * (-x0 * w * s + b * w * c)
    return x, v


def dual_trajectory(p: SystemParams, y0: float, w0: float, t: float):
    """Solution of y'' - 2 gamma y' + kappa y = 0; returns (y, y')."""
    g, w = -p.gamma, p.omega
    c, s = math.cos(w * t), math.sin(w * t)
    e = math.exp(-g * t)
    b = (w0 + g * y0) / w
    y = e * (y0 * c + b * s)
    v = -g * y + e * (-y0 * w * s + b * w * c)
    return y, v


def hamiltonian_value(s: PhasePoint, p: SystemParams) -> float:
    g, w = p.gamma, p.omega
    q1, q2, k1, k2 = s.coords
    if s.chart == "bateman":
        x, y, px, py = q1, q2, k1, k2
        return px * py - g * (x * px - y * py) + w * w * x * y
    if s.chart == "pontriagin":
        x1, x2, p1, p2 = q1, q2, k1, k2
        return w * (p1 * x2 - p2 * x1) - g * (p1 * x1 + p2 * x2)
    r, _, pr, pphi = q1, q2, k1, k2
    return -w * pphi - g * r * pr


def _rot(wt):
    c, s = math.cos(wt), math.sin(wt)
    return np.array([[c, s], [-s, c]])


def _pair_block(sign_g, p, t):
    """exp(M t) for M = [[sign_g*g, 1], [-w^2, sign_g*g]]."""
    g, w = sign_g * p.gamma, p.omega
    c, s = math.cos(w * t), math.sin(w * t)
    return math.exp(g * t) * np.array([[c, s / w], [-w * s, c]])


def flow_evolve(s: PhasePoint, t: float, p: SystemParams) -> PhasePoint:
    """Exact Hamiltonian flow over time ``t`` in the chart of ``s``."""
    if s.chart == "pontriagin":
        x = np.array(s.coords[:2])
        k = np.array(s.coords[2:])
        xt = math.exp(-p.gamma * t) * _rot(p.omega * t) @ x
        kt = math.exp(p.gamma * t) * _rot(p.omega * t) @ k
        return PhasePoint("pontriagin", (*xt, *kt))
    if s.chart == "polar":
        r, phi, pr, pphi = s.coords
        return PhasePoint("polar", (r * math.exp(-p.gamma * t), phi - p.omega * t,
                                    pr * math.exp(p.gamma * t), pphi))
    x, y, px, py = s.coords
    # (x, p_y) and (y, p_x) decouple
    x_t, py_t = _pair_block(-1, p, t) @ np.array([x, py])
    y_t, px_t = _pair_block(+1, p, t) @ np.array([y, px])
    return PhasePoint("bateman", (x_t, y_t, px_t, py_t))


def hamilton_rhs(s: PhasePoint, p: SystemParams) -> np.ndarray:
    """Time derivative of the coordinates from Hamilton's equations."""
    g, w = p.gamma, p.omega
    a, b, c, d = s.coords
    if s.chart == "bateman":
        x, y, px, py = a, b, c, d
        return np.array([py - g * x, px + g * y, g * px - w * w * y, -g * py - w * w * x])
    if s.chart == "pontriagin":
        F = flow_matrix(p)
        return np.concatenate([F @ np.array([a, b]), -F.T @ np.array([c, d])])
    r, _, pr, _ = a, b, c, d
    return np.array([-g * r, -w, g * pr, 0.0])


def chart_transform(s: PhasePoint, target: str, p: SystemParams) -> PhasePoint:
    if target not in CHARTS:
        raise ValueError(f"unknown chart {target!r}")
    if s.chart == target:
        return s
    sw = math.sqrt(p.omega)
    # route everything through the Pontriagin chart
    if s.chart == "bateman":
        x, y, px, py = s.coords
        pon = (py / sw, -sw * x, -sw * y, -px / sw)
    elif s.chart == "polar":
        r, phi, pr, pphi = s.coords
        c, si = math.cos(phi), math.sin(phi)
        pon = (r * c, r * si, pr * c - pphi * si / r, pr * si + pphi * c / r)
    else:
        pon = s.coords
    x1, x2, p1, p2 = pon
    if target == "pontriagin":
        return PhasePoint("pontriagin", pon)
    if target == "bateman":
        return PhasePoint("bateman", (-x2 / sw, -p1 / sw, -sw * p2, sw * x1))
    r = math.hypot(x1, x2)
    if r == 0:
        raise ChartSingularityError("polar chart undefined at x1 = x2 = 0")
    return PhasePoint("polar", (r, math.atan2(x2, x1), (x1 * p1 + x2 * p2) / r, x1 * p2 - x2 * p1))


def pontriagin_lift(X: np.ndarray, x: np.ndarray, p_cov: np.ndarray):
    """Hamiltonian lift H = p . X x of a linear field; returns (xdot, pdot, H)."""
    X = np.asarray(X, dtype=float)
    x = np.asarray(x, dtype=float)
    p_cov = np.asarray(p_cov, dtype=float)
    xdot = X @ x
    return xdot, -X.T @ p_cov, float(p_cov @ xdot)


SYMPLECTIC_FORM = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def transform_jacobian(s: PhasePoint, target: str, p: SystemParams, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``chart_transform`` at ``s``."""
    base = s.as_array()
    J = np.empty((4, 4))
    for j in range(4):
        step = h * max(1.0, abs(base[j]))
        up, dn = base.copy(), base.copy()
        up[j] += step
        dn[j] -= step
        fu = chart_transform(PhasePoint(s.chart, up), target, p).as_array()
        fd = chart_transform(PhasePoint(s.chart, dn), target, p).as_array()
        if target == "polar":
            fu[1] = fd[1] + math.remainder(fu[1] - fd[1], 2 * math.pi)
        J[:, j] = (fu - fd) / (2 * step)
    return J


def symplectic_residual(s: PhasePoint, target: str, p: SystemParams) -> float:
    J = transform_jacobian(s, target, p)
    return float(np.max(np.abs(J @ SYMPLECTIC_FORM @ J.T - SYMPLECTIC_FORM)))


def rk4_flow(s: PhasePoint, t: float, p: SystemParams, dt: float) -> PhasePoint:
    """Classical fourth-order Runge-Kutta integration of Hamilton's equations."""
    n = max(1, int(round(abs(t) / dt)))
    h = t / n
    y = s.as_array()
    chart = s.chart

    def f(v):
        return hamilton_rhs(PhasePoint(chart, v), p)

    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return PhasePoint(chart, y)


def rk4_order(s: PhasePoint, t: float, p: SystemParams, steps=(0.1, 0.05, 0.025, 0.0125)) -> float:
    """Least-squares slope of log(error) against log(step) for ``rk4_flow``."""
    exact = flow_evolve(s, t, p).as_array()
    errs = [np.max(np.abs(rk4_flow(s, t, p, h).as_array() - exact)) for h in steps]
    slope, _ = np.polyfit(np.log(steps), np.log(errs), 1)
    return float(slope)


def trajectory(s: PhasePoint, times, p: SystemParams) -> list:
    """Rows of (t, coords..., H) along the exact flow."""
    rows = []
    for t in times:
        q = flow_evolve(s, float(t), p)
        rows.append((float(t), *q.coords, hamiltonian_value(q, p)))
    return rows
