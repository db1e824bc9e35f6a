"""Periodic orbit location and exponential rate measurement.

The period map advances an initial history by one period and re-bases the
trailing window to end at time zero.  Under the rate-extended certificate it
is a contraction in the weighted sup norm, so plain iteration converges
geometrically; the fixed point is the attracting periodic orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import Trajectory, simulate, write_states_csv
from .model import InitialCondition, NetworkModel, SampledIC, _hermite


class NoConvergenceError(RuntimeError):
    """Period-map iteration stagnated above the fixed-point tolerance."""

    def __init__(self, residual_history: list[float]):
        last = residual_history[-1] if residual_history else math.nan
        super().__init__(f"period-map iteration did not converge (last residual {last:.3g})")
        self.residual_history = residual_history


@dataclass(frozen=True, eq=False)
class PeriodSegment:
    """One period of the located orbit, wrapped periodically for evaluation."""

    omega: float
    h: float
    values: np.ndarray
    derivs: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def nodes_per_period(self) -> int:
        return self.values.shape[0] - 1

    @property
    def seam_gap(self) -> float:
        """Continuity defect between the two endpoints of the stored period."""
        return float(np.abs(self.values[-1] - self.values[0]).max())

    def _locate(self, t: float) -> tuple[int, float]:
        tm = t - self.omega * math.floor(t / self.omega)
        x = tm / self.h
        idx = min(int(x), self.nodes_per_period - 1)
        return idx, x - idx

    def eval(self, t: float) -> np.ndarray:
        idx, theta = self._locate(t)
        return _hermite(theta, self.h, self.values[idx], self.values[idx + 1],
                        self.derivs[idx], self.derivs[idx + 1])

    def eval_component(self, t: float, j: int) -> float:
        idx, theta = self._locate(t)
        return float(_hermite(theta, self.h, self.values[idx, j], self.values[idx + 1, j],
                              self.derivs[idx, j], self.derivs[idx + 1, j]))

    def as_history(self, lookback_steps: int) -> SampledIC:
        """Wrap the segment into a sampled history over [-lookback, 0]."""
        m = max(int(lookback_steps), 1)
        k = self.nodes_per_period
        rows = [(q - m) % k for q in range(m + 1)]
        return SampledIC(start=-m * self.h, step=self.h,
                         values=self.values[rows].copy(), derivs=self.derivs[rows].copy())

    def write_csv(self, path) -> None:
        times = np.arange(self.values.shape[0]) * self.h
        write_states_csv(path, times, self.values)


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay rate of log error over a trailing window."""

    alpha_emp: float
    r_squared: float
    window: tuple[float, float]
    n_points: int = 0
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha_emp": self.alpha_emp,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "degenerate": self.degenerate,
        }


def lookback_steps(model: NetworkModel, h: float, tail_tol: float = 1e-8) -> int:
    """History window length (in steps) the period map must carry."""
    lag = model.max_lag(tail_tol)
    return max(1, int(math.ceil(lag / h - 1e-9)))


def _advance_one_period(model: NetworkModel, ic: InitialCondition, h: float,
                        tail_tol: float) -> tuple[SampledIC, Trajectory]:
    traj = simulate(model, ic, model.omega, h, tail_tol)
    m = lookback_steps(model, h, tail_tol)
    k = traj.states.shape[0] - 1
    n = model.n
    values = np.empty((m + 1, n))
    derivs = np.empty((m + 1, n))
    for q in range(m + 1):
        node = k - m + q
        if node >= 0:
            values[q] = traj.history.values[node]
            derivs[q] = traj.history.derivs[node]
        else:
            t = node * h
            values[q] = traj.history.lookup(t)
            derivs[q] = traj.history.derivative(t)
    return SampledIC(start=-m * h, step=h, values=values, derivs=derivs), traj


def period_map(model: NetworkModel, ic: InitialCondition, h: float,
               tail_tol: float = 1e-8) -> SampledIC:
    """Advance the history one period and re-base it to end at time 0."""
    sampled, _ = _advance_one_period(model, ic, h, tail_tol)
    return sampled


def find_periodic_orbit(model: NetworkModel, ic0: InitialCondition, h: float,
                        fp_tol: float = 1e-10, max_iters: int = 1000,
                        tail_tol: float = 1e-8,
                        xi=None) -> tuple[PeriodSegment, float, int]:
    """Iterate the period map to its fixed point.

    Converges geometrically at factor exp(-alpha*omega) on rate-certified
    models.  Raises NoConvergenceError (with the residual history) when the
    node residual fails to shrink by x0.99 over 20 consecutive iterations or
    max_iters is exhausted.
    """
    xi = np.ones(model.n) if xi is None else np.asarray(xi, dtype=float)
    prev_window: SampledIC | None = None
    current: InitialCondition = ic0
    residuals: list[float] = []
    for it in range(1, max_iters + 1):
        window, traj = _advance_one_period(model, current, h, tail_tol)
        if prev_window is not None:
            res = float(np.max(np.abs(window.values - prev_window.values) / xi[None, :]))
            residuals.append(res)
            if res <= fp_tol:
                k = traj.states.shape[0]
                segment = PeriodSegment(
                    omega=model.omega, h=h,
                    values=traj.states.copy(),
                    derivs=traj.history.derivs[:k].copy())
                return segment, res, it
            if len(residuals) >= 21 and residuals[-1] > 0.99 * residuals[-21]:
                raise NoConvergenceError(residuals)
        prev_window = window
        current = window
    raise NoConvergenceError(residuals)


def verify_periodicity(segment: PeriodSegment, model: NetworkModel, h: float,
                       k_periods: int = 5, tail_tol: float = 1e-8, xi=None) -> float:
    """Simulate several periods from the segment and measure the repeat defect.

    Returns max over nodes of the weighted norm of u(t + omega) - u(t).
    """
    xi = np.ones(model.n) if xi is None else np.asarray(xi, dtype=float)
    ic = segment.as_history(lookback_steps(model, h, tail_tol))
    traj = simulate(model, ic, k_periods * segment.omega, h, tail_tol)
    k = int(round(segment.omega / h))
    diff = traj.states[k:] - traj.states[:-k]
    return float(np.max(np.abs(diff) / xi[None, :]))


def estimate_decay_rate(model: NetworkModel, segment: PeriodSegment,
                        ic_perturbed: InitialCondition, h: float, t_end: float,
                        tail_tol: float = 1e-8, xi=None) -> RateFit:
    """Fit the exponential approach of a perturbed run toward the orbit.

    Fits log of the weighted distance over [t_end/4, t_end], skipping nodes
    below 1e-12.  A fit with fewer than two usable nodes is reported as
    degenerate (convergence faster than measurable), not as a failure.
    """
    xi = np.ones(model.n) if xi is None else np.asarray(xi, dtype=float)
    traj = simulate(model, ic_perturbed, t_end, h, tail_tol)
    orbit = np.stack([segment.eval(float(t)) for t in traj.times])
    err = np.max(np.abs(traj.states - orbit) / xi[None, :], axis=1)
    lo = t_end / 4.0
    mask = (traj.times >= lo) & (err >= 1e-12)
    n_points = int(mask.sum())
    if n_points < 2:
        return RateFit(alpha_emp=math.inf, r_squared=0.0, window=(lo, t_end),
                       n_points=n_points, degenerate=True)
    tt = traj.times[mask]
    le = np.log(err[mask])
    slope, intercept = np.polyfit(tt, le, 1)
    pred = slope * tt + intercept
    ss_res = float(((le - pred) ** 2).sum())
    ss_tot = float(((le - le.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return RateFit(alpha_emp=float(-slope), r_squared=r2, window=(lo, t_end),
                   n_points=n_points)
