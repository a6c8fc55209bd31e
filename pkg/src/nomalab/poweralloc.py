"""Per-user transmit power optimization against the closed-form sum BER.

The objective is 10*log10(sum of per-stage average BERs) as a function
of the per-user power levels in dB, minimized by projected gradient
descent (upper bound p_max_db per user) with central finite-difference
gradients and Armijo backtracking. A fixed list of deterministic start
points covers the useful basins: everyone at the cap, two decode-order
staircases, and a received-power equalizer; an optional warm start is
tried first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import sum_ber
from .detectors import SystemModel
from .errors import OptimizationError

BER_FLOOR = 1e-300


@dataclass(frozen=True)
class PaConfig:
    p_max_db: float = 30.0
    max_iters: int = 500
    fd_step_db: float = 0.01
    tol_db: float = 1e-4
    armijo_c: float = 1e-4
    step0_db: float = 4.0
    min_step_db: float = 1e-6
    mode: str = "auto"
    multistart_points: int = 4


@dataclass(frozen=True)
class PaResult:
    powers_db: tuple[float, ...]  # user order
    cost_db: float
    start_index: int
    start_costs_db: tuple[float, ...]
    iterations: int
    trace: tuple[float, ...]
    at_bound: tuple[bool, ...]

    @property
    def sum_ber(self) -> float:
        return 10.0 ** (self.cost_db / 10.0)


def sum_ber_db_cost(model: SystemModel, powers_db, mode: str = "auto") -> float:
    """Objective value for absolute per-user powers given in dB."""
    linear = [10.0 ** (float(p) / 10.0) for p in powers_db]
    total = sum_ber(model.with_powers(linear), mode)
    return 10.0 * math.log10(max(total, BER_FLOOR))


def _starts(model: SystemModel, cfg: PaConfig, warm_db) -> list[np.ndarray]:
    k = model.k
    pmax = cfg.p_max_db
    order = model.decode_order()
    stair10 = np.full(k, pmax)
    stair5 = np.full(k, pmax)
    for s, idx in enumerate(order):
        stair10[idx] = pmax - 10.0 * s
        stair5[idx] = pmax - 5.0 * s
    sig = np.array([u.sigma for u in model.users])
    equalize = pmax + 20.0 * np.log10(sig.min() / sig)
    starts = [np.full(k, pmax), stair10, equalize, stair5]
    if warm_db is not None:
        warm = np.asarray(warm_db, dtype=float)
        if warm.shape != (k,):
            raise ValueError(f"warm start needs {k} entries")
        starts.insert(0, warm)
    count = max(1, int(cfg.multistart_points))
    return starts[:count]


def _descend(model: SystemModel, p0: np.ndarray, cfg: PaConfig):
    pmax = cfg.p_max_db
    p = np.minimum(np.asarray(p0, dtype=float), pmax)
    cost = sum_ber_db_cost(model, p, cfg.mode)
    trace = [cost]
    k = model.k
    for _ in range(cfg.max_iters):
        grad = np.empty(k)
        for i in range(k):
            probe = np.zeros(k)
            probe[i] = cfg.fd_step_db
            up = sum_ber_db_cost(model, p + probe, cfg.mode)
            dn = sum_ber_db_cost(model, p - probe, cfg.mode)
            grad[i] = (up - dn) / (2.0 * cfg.fd_step_db)
        if not np.all(np.isfinite(grad)) or float(grad @ grad) == 0.0:
            break
        step = cfg.step0_db
        accepted = None
        while step >= cfg.min_step_db:
            cand = np.minimum(p - step * grad, pmax)
            cand_cost = sum_ber_db_cost(model, cand, cfg.mode)
            # sufficient decrease against the projected displacement
            if cand_cost <= cost - cfg.armijo_c * float(grad @ (p - cand)):
                accepted = (cand, cand_cost)
                break
            step *= 0.5
        if accepted is None:
            break
        improvement = cost - accepted[1]
        p, cost = accepted
        trace.append(cost)
        if improvement < cfg.tol_db:
            break
    return p, cost, tuple(trace)


def optimize_powers(model: SystemModel, cfg: PaConfig = PaConfig(),
                    warm_db=None) -> PaResult:
    """Minimize the sum-BER cost over per-user powers, multi-started."""
    best = None
    start_costs = []
    for s_idx, p0 in enumerate(_starts(model, cfg, warm_db)):
        p, cost, trace = _descend(model, p0, cfg)
        start_costs.append(cost)
        if math.isfinite(cost) and (best is None or cost < best[1]):
            best = (p, cost, s_idx, trace)
    if best is None:
        raise OptimizationError("every start point produced a non-finite cost")
    p, cost, s_idx, trace = best
    at_bound = tuple(bool(v >= cfg.p_max_db - 1e-9) for v in p)
    return PaResult(
        powers_db=tuple(float(v) for v in p),
        cost_db=cost,
        start_index=s_idx,
        start_costs_db=tuple(start_costs),
        iterations=len(trace) - 1,
        trace=trace,
        at_bound=at_bound,
    )
