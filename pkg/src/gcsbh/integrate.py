"""Adaptive Runge-Kutta stepping with dense output onto a fixed time grid."""
from __future__ import annotations

import numpy as np
from scipy.integrate import DOP853, RK45

from .trajectory import PropagationError

METHODS = {"DOP853": DOP853, "RK45": RK45}


def integrate_on_grid(fun, t_grid, y0, rtol, atol, max_step=np.inf, on_step=None, method=RK45):
    """Integrate ``dy/dt = fun(t, y)`` and return ``y`` at every point of ``t_grid``.

    ``on_step(t, y)`` is called after each accepted step and may raise to
    abort. ``method`` is a scipy OdeSolver class. Returns ``(ys, n_steps)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    ys = np.empty((t_grid.size, np.size(y0)), dtype=complex)
    ys[0] = y0
    if t_grid.size == 1:
        return ys, 0
    solver = method(fun, t_grid[0], np.asarray(y0, dtype=complex), t_grid[-1],
                  rtol=rtol, atol=atol, max_step=max_step)
    nxt = 1
    steps = 0
    while nxt < t_grid.size:
        t_prev = solver.t
        msg = solver.step()
        if solver.status == "failed":
            raise PropagationError(f"integration failed: {msg}", float(solver.t))
        steps += 1
        if on_step is not None:
            on_step(solver.t, solver.y)
        if solver.t >= t_grid[nxt] or solver.status == "finished":
            dense = solver.dense_output()
            while nxt < t_grid.size and t_grid[nxt] <= solver.t:
                ys[nxt] = solver.y if t_grid[nxt] == solver.t else dense(t_grid[nxt])
                nxt += 1
        if solver.status == "finished" and nxt < t_grid.size:
            raise PropagationError("integrator stopped before the end of the grid",
                                   float(solver.t))
        if solver.t == t_prev:
            raise PropagationError("step size underflow", float(solver.t))
    return ys, steps
