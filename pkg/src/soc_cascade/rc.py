"""Recovery-capacity disruption dynamics (continuous firm states).

Each non-failed firm updates synchronously from the state tau steps back:

    s_i(t) = s_i(t-tau)
             + delta * ( lam * (1 - s_i(t-tau)) * sum_j beta_j * s_j(t-tau)
                         - mu * r_i(t-tau) )

clamped to [0, 1]. A firm reaching 1 is absorbed and stays failed forever,
exactly like an attack seed. The recovery drain r_i is the state itself by
default; in capital-scaled mode it is weighted by normalized log capital so
well-capitalized firms shed damage faster.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .accel import HAVE_NUMBA, USE_NUMBA, njit
from .attack import AttackPlan, select_seeds
from .graph import SupplyNetwork
from .trace import SimTrace

BETA_MODES = ("uniform", "degree", "capital")
RECOVERY_MODES = ("state", "capital")


class RcError(ValueError):
    pass


@dataclass(frozen=True)
class RcConfig:
    lam: float = 0.5
    mu: float = 0.1
    delta: float = 1.0
    tau: int = 1
    beta_mode: str = "degree"
    beta_value: float = 1.0  # used by the uniform mode
    recovery_mode: str = "state"
    threshold: float = 0.5
    max_steps: int = 500
    convergence_eps: float = 1e-6

    def __post_init__(self):
        if self.lam < 0:
            raise RcError(f"lambda must be non-negative, got {self.lam}")
        if not 0 < self.mu <= 1 and self.mu != 0.0:
            raise RcError(f"mu must be 0 or in (0,1], got {self.mu}")
        if self.delta <= 0:
            raise RcError(f"delta must be positive, got {self.delta}")
        if self.tau < 1:
            raise RcError(f"tau must be a positive integer, got {self.tau}")
        if self.beta_mode not in BETA_MODES:
            raise RcError(f"unknown beta mode: {self.beta_mode!r}")
        if self.beta_mode == "uniform" and not 0 <= self.beta_value <= 1:
            raise RcError(f"uniform beta must be in [0,1], got {self.beta_value}")
        if self.recovery_mode not in RECOVERY_MODES:
            raise RcError(f"unknown recovery mode: {self.recovery_mode!r}")
        if self.max_steps < 1:
            raise RcError("max_steps must be positive")
        if self.convergence_eps <= 0:
            raise RcError("convergence_eps must be positive")

    def to_json(self) -> str:
        return json.dumps(
            {
                "lambda": self.lam,
                "mu": self.mu,
                "delta": self.delta,
                "tau": self.tau,
                "beta_mode": self.beta_mode,
                "beta_value": self.beta_value,
                "recovery_mode": self.recovery_mode,
                "threshold": self.threshold,
                "max_steps": self.max_steps,
                "convergence_eps": self.convergence_eps,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "RcConfig":
        body = json.loads(text)
        if "lambda" in body:
            body["lam"] = body.pop("lambda")
        return RcConfig(**body)


@dataclass
class RcState:
    s: np.ndarray  # float64 in [0,1]
    absorbed: np.ndarray  # bool; absorbed => s == 1 forever

    def copy(self) -> "RcState":
        return RcState(self.s.copy(), self.absorbed.copy())


def beta_weights(net: SupplyNetwork, mode: str, beta_value: float = 1.0) -> np.ndarray:
    """Per-slot influence weight of neighbor j on firm i (slot in row i).

    uniform: the constant; degree: 1/deg(i); capital: neighbor log capital
    normalized over i's neighborhood.
    """
    if mode not in BETA_MODES:
        raise RcError(f"unknown beta mode: {mode!r}")
    deg = net.degrees
    if mode == "uniform":
        if not 0 <= beta_value <= 1:
            raise RcError(f"uniform beta must be in [0,1], got {beta_value}")
        return np.full(len(net.indices), float(beta_value))
    if mode == "degree":
        with np.errstate(divide="ignore"):
            inv = np.where(deg > 0, 1.0 / np.maximum(deg, 1), 0.0)
        return np.repeat(inv, deg)
    logcap = net.log_capitals
    gathered = logcap[net.indices]
    totals = np.zeros(net.n_nodes)
    np.add.at(totals, net.edge_dst, gathered)
    bad = (deg > 0) & (totals <= 0)
    if bad.any():
        offender = int(np.flatnonzero(bad)[0])
        raise RcError(
            f"capital-weighted beta undefined: firm {offender} has a "
            "neighborhood with zero total log capital"
        )
    return gathered / np.repeat(np.where(totals > 0, totals, 1.0), deg)


def recovery_scale(net: SupplyNetwork, mode: str) -> np.ndarray:
    """Per-firm factor on the recovery drain: ones, or log capital mapped
    into (0, 1] by an offset min-max (all-equal capital maps to 1)."""
    if mode == "state":
        return np.ones(net.n_nodes)
    logcap = net.log_capitals
    lo, hi = float(logcap.min()), float(logcap.max())
    # offset keeps the lowest-capital firm at a positive scale
    return (logcap - lo + 1.0) / (hi - lo + 1.0)


def _rc_step_seq(indptr, indices, beta, s_lag, absorbed, lam, mu, delta, rscale, out):
    n = len(indptr) - 1
    for i in range(n):
        if absorbed[i] == 1:
            out[i] = 1.0
            continue
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += beta[k] * s_lag[indices[k]]
        v = s_lag[i] + delta * (lam * (1.0 - s_lag[i]) * acc - mu * s_lag[i] * rscale[i])
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        out[i] = v


if HAVE_NUMBA:
    _rc_step_jit = njit(_rc_step_seq)
else:  # pragma: no cover
    _rc_step_jit = _rc_step_seq


def _rc_step_vec(net, beta, s_lag, absorbed, lam, mu, delta, rscale, out):
    acc = np.zeros(net.n_nodes)
    np.add.at(acc, net.edge_dst, beta * s_lag[net.indices])
    np.multiply(lam * (1.0 - s_lag), acc, out=out)
    out -= mu * s_lag * rscale
    out *= delta
    out += s_lag
    np.clip(out, 0.0, 1.0, out=out)
    out[absorbed] = 1.0


def rc_step_arrays(
    net: SupplyNetwork,
    beta: np.ndarray,
    s_lag: np.ndarray,
    absorbed: np.ndarray,
    cfg: RcConfig,
    rscale: np.ndarray,
) -> np.ndarray:
    out = np.empty(net.n_nodes)
    if USE_NUMBA:
        _rc_step_jit(
            net.indptr, net.indices, beta, s_lag,
            absorbed.astype(np.uint8), cfg.lam, cfg.mu, cfg.delta, rscale, out,
        )
    else:
        _rc_step_vec(net, beta, s_lag, absorbed, cfg.lam, cfg.mu, cfg.delta, rscale, out)
    return out


def rc_step(
    net: SupplyNetwork,
    state: RcState,
    cfg: RcConfig,
    history: list[RcState] | None = None,
) -> RcState:
    """One synchronous update; ``history`` holds the last tau states
    (oldest first). Without history the current state is the lag."""
    if history:
        if len(history) < cfg.tau:
            raise RcError(
                f"history holds {len(history)} states but tau={cfg.tau}"
            )
        lag = history[-cfg.tau]
    else:
        if cfg.tau != 1:
            raise RcError(f"tau={cfg.tau} needs a history of past states")
        lag = state
    beta = beta_weights(net, cfg.beta_mode, cfg.beta_value)
    rscale = recovery_scale(net, cfg.recovery_mode)
    s_new = rc_step_arrays(net, beta, lag.s, state.absorbed, cfg, rscale)
    absorbed = state.absorbed | (s_new >= 1.0)
    return RcState(s_new, absorbed)


def rc_run(net: SupplyNetwork, cfg: RcConfig, plan: AttackPlan | None,
           keep_snapshots: bool = False) -> SimTrace:
    """Seed, iterate to convergence/saturation/max_steps, record the trace.

    ``plan=None`` runs with no initial failures (a zero-state control)."""
    n = net.n_nodes
    seeds = select_seeds(net, plan) if plan is not None else []
    s = np.zeros(n)
    absorbed = np.zeros(n, dtype=bool)
    s[seeds] = 1.0
    absorbed[seeds] = True

    beta = beta_weights(net, cfg.beta_mode, cfg.beta_value)
    rscale = recovery_scale(net, cfg.recovery_mode)

    steps = [0]
    affected = [float((s > cfg.threshold).sum()) / n]
    snaps = [s.copy()] if keep_snapshots else None
    history: deque[np.ndarray] = deque([s], maxlen=cfg.tau)
    while len(history) < cfg.tau:
        history.appendleft(s)

    reason = "max_steps"
    for t in range(1, cfg.max_steps + 1):
        s_lag = history[0]
        s_prev = s
        s = rc_step_arrays(net, beta, s_lag, absorbed, cfg, rscale)
        absorbed = absorbed | (s >= 1.0)
        history.append(s)
        steps.append(t)
        affected.append(float((s > cfg.threshold).sum()) / n)
        if keep_snapshots:
            snaps.append(s.copy())
        if absorbed.all():
            reason = "saturated"
            break
        if float(np.abs(s - s_prev).max()) < cfg.convergence_eps:
            reason = "converged"
            break
    return SimTrace(
        steps=np.array(steps, dtype=np.int64),
        affected_ratio=np.array(affected),
        reason=reason,
        snapshots=snaps,
    )


@dataclass
class SweepResult:
    ratios: list[float]
    terminal_affected: list[float]
    critical_ratio: float | None  # smallest swept ratio below the die-out mark

    def to_csv(self) -> str:
        lines = ["ratio,terminal_affected_ratio"]
        for r, a in zip(self.ratios, self.terminal_affected):
            lines.append(f"{float(r)!r},{float(a)!r}")
        return "\n".join(lines) + "\n"


def recovery_sweep(
    net: SupplyNetwork,
    cfg: RcConfig,
    plan: AttackPlan,
    ratios: list[float],
    die_out: float = 0.05,
) -> SweepResult:
    """Run rc_run per recovery ratio r with mu = r * lam.

    Ratios must be positive and ascending; the critical ratio is the first
    with terminal affected ratio below ``die_out``.
    """
    if not ratios or any(r <= 0 for r in ratios):
        raise RcError("ratios must be positive")
    if sorted(ratios) != list(ratios):
        raise RcError("ratios must be sorted ascending")
    terminals = []
    for r in ratios:
        run_cfg = replace(cfg, mu=r * cfg.lam)
        terminals.append(rc_run(net, run_cfg, plan).terminal_affected)
    critical = None
    for r, term in zip(ratios, terminals):
        if term < die_out:
            critical = r
            break
    return SweepResult(list(ratios), terminals, critical)
