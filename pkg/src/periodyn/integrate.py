"""Fixed-step RK4 for the delayed network with dense-output history.

The step is fixed at an exact divisor of the period so the period map is
exact on nodes.  Node values and derivatives feed a cubic Hermite continuous
extension used for all delayed lookups; stage lookups that land inside the
current step (delays shorter than the step) evaluate the newest Hermite
cubic beyond its interval instead of solving implicit stage equations.
Coefficient expressions are cached over one period at half-step resolution,
which also makes the periodicity of the flow exact in floating point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import convolve, density_quadrature
from .model import (InitialCondition, NetworkModel, _hermite, _hermite_derivative,
                    eval_coefficients)


class HistoryUnderrunError(RuntimeError):
    """A delayed lookup needed times beyond the represented history."""


class DivergenceError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"state became nonfinite at t={t:.6g}")
        self.t = t


class HistoryBuffer:
    """Uniform node grid with Hermite interpolation and an initial segment.

    Times at or before ``start_time`` delegate to the initial condition;
    times up to ``horizon`` just past the last node are served by
    extrapolating the newest cubic; anything later raises.
    """

    def __init__(self, ic: InitialCondition, start_time: float, h: float, n: int,
                 capacity: int = 64):
        self.ic = ic
        self.start_time = float(start_time)
        self.h = float(h)
        self.n = int(n)
        self.values = np.empty((max(capacity, 2), n))
        self.derivs = np.empty((max(capacity, 2), n))
        self.count = 0
        self.horizon = float(start_time)

    @property
    def last_time(self) -> float:
        return self.start_time + (self.count - 1) * self.h

    def append(self, u: np.ndarray, du: np.ndarray) -> None:
        if self.count == self.values.shape[0]:
            grown_v = np.empty((2 * self.count, self.n))
            grown_d = np.empty((2 * self.count, self.n))
            grown_v[: self.count] = self.values
            grown_d[: self.count] = self.derivs
            self.values = grown_v
            self.derivs = grown_d
        self.values[self.count] = u
        self.derivs[self.count] = du
        self.count += 1

    def set_last_derivative(self, du: np.ndarray) -> None:
        self.derivs[self.count - 1] = du

    def _interval(self, t: float) -> tuple[int, float]:
        x = (t - self.start_time) / self.h
        last = self.count - 1
        if x < last:
            idx = int(x)
            return idx, x - idx
        eps = 1e-9 * self.h
        if t <= self.last_time + eps or t <= self.horizon + eps:
            if last >= 1:
                return last - 1, x - (last - 1)
            return -1, 0.0  # single node: Taylor fallback
        raise HistoryUnderrunError(
            f"lookup at t={t!r} beyond history end {self.last_time!r}")

    def lookup_scalar(self, t: float, j: int) -> float:
        if t <= self.start_time:
            return self.ic.eval_component(t, j)
        idx, theta = self._interval(t)
        if idx < 0:
            return float(self.values[0, j] + (t - self.start_time) * self.derivs[0, j])
        return float(_hermite(theta, self.h, self.values[idx, j], self.values[idx + 1, j],
                              self.derivs[idx, j], self.derivs[idx + 1, j]))

    def lookup(self, t: float) -> np.ndarray:
        if t <= self.start_time:
            return np.asarray(self.ic.eval(t), dtype=float)
        idx, theta = self._interval(t)
        if idx < 0:
            return self.values[0] + (t - self.start_time) * self.derivs[0]
        return _hermite(theta, self.h, self.values[idx], self.values[idx + 1],
                        self.derivs[idx], self.derivs[idx + 1])

    def derivative(self, t: float) -> np.ndarray:
        if t <= self.start_time:
            return np.array([self.ic.derivative_component(t, j) for j in range(self.n)])
        idx, theta = self._interval(t)
        if idx < 0:
            return self.derivs[0].copy()
        return _hermite_derivative(theta, self.h, self.values[idx], self.values[idx + 1],
                                   self.derivs[idx], self.derivs[idx + 1])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Node times/states of one run plus the dense history behind them."""

    times: np.ndarray
    states: np.ndarray
    history: HistoryBuffer

    def write_csv(self, path) -> None:
        write_states_csv(path, self.times, self.states)


def write_states_csv(path, times: np.ndarray, states: np.ndarray) -> None:
    """CSV schema ``t,u_1..u_n`` with full double precision."""
    n = states.shape[1]
    header = "t," + ",".join(f"u_{j + 1}" for j in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for t, row in zip(times, states):
            fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def rhs(model: NetworkModel, t: float, u, history: HistoryBuffer,
        tail_tol: float = 1e-8, quad_step: float | None = None) -> np.ndarray:
    """Exact term-by-term right side at time ``t`` with delayed lookups."""
    sl = eval_coefficients(model, t)
    u = np.asarray(u, dtype=float)
    n = model.n
    gu = np.array([model.g[j](float(u[j])) for j in range(n)])
    du = -sl.d * u + sl.a @ gu + sl.inputs
    for i in range(n):
        for j in range(n):
            kern = model.kernels[i][j]
            if kern.is_zero:
                continue
            base = t - sl.tau[i, j]
            f_j = model.f[j]
            du[i] += convolve(
                kern, t,
                lambda s, jj=j, bb=base, ff=f_j: ff(history.lookup_scalar(bb - s, jj)),
                tail_tol=tail_tol, step=quad_step)
    return du


class _StageCoefficients:
    """Coefficient slices cached on the half-step grid of one period."""

    def __init__(self, model: NetworkModel, h: float, steps_per_period: int):
        self.mod = 2 * steps_per_period
        th = np.arange(self.mod) * (0.5 * h)
        n = model.n
        self.d = np.stack([model.d[i].eval(th) for i in range(n)], axis=1)
        self.a = np.empty((self.mod, n, n))
        self.tau = np.empty((self.mod, n, n))
        for i in range(n):
            for j in range(n):
                self.a[:, i, j] = model.a[i][j].eval(th)
                self.tau[:, i, j] = model.tau[i][j].eval(th)
        self.inputs = np.stack([model.inputs[i].eval(th) for i in range(n)], axis=1)
        self.atom_terms = []
        self.density_terms = []
        for i in range(n):
            for j in range(n):
                kern = model.kernels[i][j]
                for atom in kern.atoms:
                    self.atom_terms.append((i, j, atom.s, atom.weight.eval(th)))
                if kern.density is not None:
                    self.density_terms.append(
                        (i, j, kern.density.shape, kern.density.weight.eval(th)))


def _exact_steps(total: float, h: float, what: str) -> int:
    k = total / h
    r = round(k)
    if abs(k - r) > 1e-9 * max(1.0, abs(k)):
        raise ValueError(f"{what}: {total} is not an integer multiple of h={h}")
    return int(r)


def simulate(model: NetworkModel, ic: InitialCondition, t_end: float, h: float,
             tail_tol: float = 1e-8) -> Trajectory:
    """Classical RK4 from time 0 with the dense history driving delays.

    ``h`` must divide the period exactly and ``t_end`` must be a multiple of
    ``h``.  Identical inputs produce bit-identical trajectories.
    """
    if h <= 0.0:
        raise ValueError("step must be positive")
    steps_per_period = _exact_steps(model.omega, h, "period")
    steps = _exact_steps(t_end, h, "t_end") if t_end > 0.0 else 0
    n = model.n
    co = _StageCoefficients(model, h, steps_per_period)
    min_lag = math.inf
    for i, j, s_loc, _ in co.atom_terms:
        min_lag = min(min_lag, float(co.tau[:, i, j].min()) + s_loc)
    for i, j, _, _ in co.density_terms:
        min_lag = min(min_lag, float(co.tau[:, i, j].min()))
    if 0.0 < min_lag < math.inf and h >= min_lag:
        # sub-step lookups will run on the extrapolant every step
        warnings.warn(f"step h={h} is not below the smallest delay {min_lag:.6g}; "
                      "intra-step lookups fall back to the Hermite extrapolant")
    hist = HistoryBuffer(ic, 0.0, h, n, capacity=steps + 1)
    f_act = model.f
    g_act = model.g

    def stage(jh: int, t: float, u: np.ndarray) -> np.ndarray:
        idx = jh % co.mod
        gu = np.array([g_act[q](float(u[q])) for q in range(n)])
        du = -co.d[idx] * u + co.a[idx] @ gu + co.inputs[idx]
        for i, j, s_loc, w in co.atom_terms:
            wk = w[idx]
            if wk != 0.0:
                du[i] += wk * f_act[j](hist.lookup_scalar(t - co.tau[idx, i, j] - s_loc, j))
        for i, j, shape, bw in co.density_terms:
            b = bw[idx]
            if b != 0.0:
                base = t - co.tau[idx, i, j]
                ff = f_act[j]
                du[i] += b * density_quadrature(
                    shape, lambda s, jj=j, bb=base, f2=ff: f2(hist.lookup_scalar(bb - s, jj)),
                    tail_tol=tail_tol, step=h)
        return du

    u = np.asarray(ic.eval(0.0), dtype=float).copy()
    if u.shape != (n,):
        raise ValueError(f"initial condition has dimension {u.shape}, expected ({n},)")
    k1 = stage(0, 0.0, u)
    hist.append(u, k1)
    for m in range(steps):
        t0 = m * h
        t_half = t0 + 0.5 * h
        t1 = (m + 1) * h
        hist.horizon = t1
        with np.errstate(over="ignore", invalid="ignore"):
            k2 = stage(2 * m + 1, t_half, u + (0.5 * h) * k1)
            k3 = stage(2 * m + 1, t_half, u + (0.5 * h) * k2)
            k4 = stage(2 * m + 2, t1, u + h * k3)
            u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise DivergenceError(t1)
        hist.append(u, k4)  # provisional slope until the node is committed
        k1 = stage(2 * m + 2, t1, u)
        hist.set_last_derivative(k1)
    times = np.arange(steps + 1) * h
    return Trajectory(times=times, states=hist.values[: steps + 1].copy(), history=hist)


def convergence_order(model: NetworkModel, ic: InitialCondition, t_end: float,
                      k0: int = 32, window: tuple[float, float] | None = None,
                      tail_tol: float = 1e-8) -> float:
    """Richardson order estimate from runs at h, h/2, h/4.

    Compares states at shared nodes (optionally restricted to a window away
    from the initial breaking point) and returns log2 of the error ratio.
    """
    runs = [simulate(model, ic, t_end, model.omega / (k0 * 2 ** lev), tail_tol)
            for lev in range(3)]

    def sup_diff(coarse: Trajectory, fine: Trajectory) -> float:
        diff = np.abs(coarse.states - fine.states[::2]).max(axis=1)
        if window is not None:
            mask = (coarse.times >= window[0]) & (coarse.times <= window[1])
            diff = diff[mask]
        return float(diff.max())

    e01 = sup_diff(runs[0], runs[1])
    e12 = sup_diff(runs[1], runs[2])
    if e12 == 0.0:
        return math.inf
    return math.log2(e01 / e12)
