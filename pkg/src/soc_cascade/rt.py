"""Risk-transfer disruption dynamics (binary states, stochastic failures).

An alive firm fails with probability equal to the failed fraction of its
neighborhood (evaluated tau steps back), or deterministically once its
capacity sits at the floor while touching a failed neighbor — capacity is
the only memory risk leaves on survivors. With base_exposure below 1 the
draw probability is additionally scaled by how depleted the firm is, so an
untouched capacity buffer shields against neighbor pressure. A firm failing
under the absorb policy burns its own capacity by delta_c; under the
transfer policy it pushes an attenuated beta_j * delta_c onto each
still-alive neighbor. Failure draws come from the counter RNG keyed
(seed, step, firm, stream), so traces are independent of evaluation order
and worker count.
"""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .accel import HAVE_NUMBA, USE_NUMBA, njit
from .attack import AttackPlan, select_seeds
from .graph import SupplyNetwork
from .rc import beta_weights
from .rng import uniform_array, uniform_u64
from .trace import SimTrace

POLICIES = ("absorb", "transfer", "random")
_POLICY_CODE = {"absorb": 0, "transfer": 1, "random": 2}

_STREAM_FAIL = 0
_STREAM_POLICY = 1


class RtError(ValueError):
    pass


@dataclass(frozen=True)
class RtConfig:
    policy: str
    delta_c: float
    c_floor: float = 0.0
    p_absorb: float = 0.5
    beta_mode: str = "degree"
    beta_value: float = 1.0
    tau: int = 1
    max_steps: int = 500
    rng_seed: int = 0
    # fraction of neighbor pressure that penetrates a fully capitalized firm;
    # at 1.0 (default) capacity gates nothing and the failure draw is the
    # plain failed-neighbor fraction. Below 1.0 a firm's draw probability
    # ramps from base_exposure * P up to P as its capacity drains to the
    # floor, so undamaged firms resist and depleted ones are easy prey.
    base_exposure: float = 1.0

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise RtError(f"unknown policy: {self.policy!r}")
        if self.delta_c <= 0:
            raise RtError(f"delta_c must be positive, got {self.delta_c}")
        if self.c_floor < 0:
            raise RtError(f"c_floor must be >= 0, got {self.c_floor}")
        if not 0 <= self.p_absorb <= 1:
            raise RtError(f"p_absorb must be in [0,1], got {self.p_absorb}")
        if self.tau < 1:
            raise RtError(f"tau must be a positive integer, got {self.tau}")
        if self.max_steps < 1:
            raise RtError("max_steps must be positive")
        if not 0 < self.base_exposure <= 1:
            raise RtError(
                f"base_exposure must be in (0,1], got {self.base_exposure}"
            )

    def to_json(self) -> str:
        return json.dumps(
            {
                "policy": self.policy,
                "delta_c": self.delta_c,
                "c_floor": self.c_floor,
                "p_absorb": self.p_absorb,
                "beta_mode": self.beta_mode,
                "beta_value": self.beta_value,
                "tau": self.tau,
                "max_steps": self.max_steps,
                "rng_seed": self.rng_seed,
                "base_exposure": self.base_exposure,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "RtConfig":
        return RtConfig(**json.loads(text))


@dataclass
class RtState:
    s: np.ndarray  # uint8 {0,1}; 1 is absorbing
    c: np.ndarray  # float64 capacity, >= c_floor, non-increasing
    chosen_policy: np.ndarray  # int8: -1 undrawn, 0 absorb, 1 transfer

    def copy(self) -> "RtState":
        return RtState(self.s.copy(), self.c.copy(), self.chosen_policy.copy())


def initial_state(net: SupplyNetwork, cfg: RtConfig) -> RtState:
    c0 = net.log_capitals.copy()
    positive = c0[c0 > 0]
    if len(positive) and cfg.c_floor >= positive.min():
        warnings.warn(
            f"capacity floor {cfg.c_floor} is at or above the smallest "
            f"positive initial capacity {positive.min():.4g}; firms start "
            "on the brink of bankruptcy",
            stacklevel=2,
        )
    return RtState(
        s=np.zeros(net.n_nodes, dtype=np.uint8),
        c=np.maximum(c0, cfg.c_floor),
        chosen_policy=np.full(net.n_nodes, -1, dtype=np.int8),
    )


def failure_probability(net: SupplyNetwork, s_lag: np.ndarray, firm: int) -> float:
    """Failed-neighbor pressure on an alive firm, in [0, 1].

    Both the literal ratio (failed-state sum over failed-sum plus
    alive-sum-plus-one) and its binary simplification (failed count over
    neighbor count) are evaluated and must agree exactly.
    """
    nbrs = net.neighbors(firm)
    if len(nbrs) == 0:
        return 0.0  # no risk channel
    sv = s_lag[nbrs].astype(np.float64)
    num = float(sv.sum())
    den = float(sv[sv == 1].sum()) + float((sv[sv == 0] + 1.0).sum())
    literal = num / den
    simplified = float((s_lag[nbrs] == 1).sum()) / len(nbrs)
    if literal != simplified:
        raise AssertionError(
            f"failure probability forms disagree: {literal} vs {simplified}"
        )
    return literal


def _apply_failures_seq(indptr, indices, beta, new_flag, s, c, chosen,
                        policy_code, p_absorb, delta_c, c_floor, seed, step):
    n = len(indptr) - 1
    for i in range(n):
        if new_flag[i] == 0:
            continue
        s[i] = 1
        pol = policy_code
        if policy_code == 2:
            u2 = uniform_u64(np.uint64(seed), np.uint64(step), np.uint64(i),
                             np.uint64(_STREAM_POLICY))
            pol = 0 if u2 < p_absorb else 1
        chosen[i] = pol
        if pol == 0:
            v = c[i] - delta_c
            c[i] = v if v > c_floor else c_floor
    # transfers accumulate onto each alive receiver, one clamp at the end;
    # beta is the failing firm's own row weight, so a degree-normalized
    # transfer splits delta_c across the neighborhood instead of scaling it
    dec = np.zeros(n, dtype=np.float64)
    for i in range(n):
        if new_flag[i] == 1 and chosen[i] == 1:
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if s[j] == 0:
                    dec[j] += beta[k] * delta_c
    for j in range(n):
        if dec[j] > 0.0:
            v = c[j] - dec[j]
            c[j] = v if v > c_floor else c_floor


def _rt_step_seq(indptr, indices, beta, s_lag, s, c, c0, chosen,
                 policy_code, p_absorb, delta_c, c_floor, base_exposure,
                 seed, step):
    n = len(indptr) - 1
    new_flag = np.zeros(n, dtype=np.uint8)
    n_new = 0
    for i in range(n):
        if s[i] == 1:
            continue
        cnt = 0
        for k in range(indptr[i], indptr[i + 1]):
            cnt += s_lag[indices[k]]
        if cnt == 0:
            continue
        deg = indptr[i + 1] - indptr[i]
        p = cnt / deg
        denom = c0[i] - c_floor
        if denom > 0.0:
            depletion = (c0[i] - c[i]) / denom
        else:
            depletion = 1.0
        p = p * (base_exposure + (1.0 - base_exposure) * depletion)
        u = uniform_u64(np.uint64(seed), np.uint64(step), np.uint64(i),
                        np.uint64(_STREAM_FAIL))
        if u < p or c[i] <= c_floor:
            new_flag[i] = 1
            n_new += 1
    _apply_failures_inner(indptr, indices, beta, new_flag, s, c, chosen,
                          policy_code, p_absorb, delta_c, c_floor, seed, step)
    return n_new


if HAVE_NUMBA:
    _apply_failures_inner = njit(_apply_failures_seq)
    _rt_step_jit = njit(_rt_step_seq)
else:  # pragma: no cover
    _apply_failures_inner = _apply_failures_seq
    _rt_step_jit = _rt_step_seq


def _apply_failures_vec(net, beta, new_ids, state, cfg, step):
    s, c, chosen = state.s, state.c, state.chosen_policy
    if len(new_ids) == 0:
        return
    s[new_ids] = 1
    if cfg.policy == "random":
        u2 = uniform_array(cfg.rng_seed, step, new_ids, stream=_STREAM_POLICY)
        pols = np.where(u2 < cfg.p_absorb, 0, 1).astype(np.int8)
    else:
        pols = np.full(len(new_ids), _POLICY_CODE[cfg.policy], dtype=np.int8)
    chosen[new_ids] = pols
    absorbers = new_ids[pols == 0]
    c[absorbers] = np.maximum(c[absorbers] - cfg.delta_c, cfg.c_floor)
    transferers = new_ids[pols == 1]
    if len(transferers):
        slots = np.concatenate(
            [np.arange(net.indptr[i], net.indptr[i + 1]) for i in transferers]
        )
        dst = net.indices[slots]
        alive = s[dst] == 0
        dec = np.zeros(net.n_nodes)
        np.add.at(dec, dst[alive], beta[slots[alive]] * cfg.delta_c)
        hit = dec > 0.0
        c[hit] = np.maximum(c[hit] - dec[hit], cfg.c_floor)


def rt_step(
    net: SupplyNetwork,
    state: RtState,
    cfg: RtConfig,
    step: int,
    history: list[np.ndarray] | None = None,
) -> tuple[RtState, int]:
    """One synchronous update from the lagged failure snapshot.

    Returns (new state, number of fresh failures). ``history`` holds the
    last tau failure arrays (oldest first); without it the current state
    serves as the lag (tau must be 1).
    """
    if history:
        if len(history) < cfg.tau:
            raise RtError(f"history holds {len(history)} states, tau={cfg.tau}")
        s_lag = history[-cfg.tau]
    else:
        if cfg.tau != 1:
            raise RtError(f"tau={cfg.tau} needs a history of past states")
        s_lag = state.s
    beta = beta_weights(net, cfg.beta_mode, cfg.beta_value)
    c0 = np.maximum(net.log_capitals, cfg.c_floor)
    out = state.copy()
    if USE_NUMBA:
        n_new = int(
            _rt_step_jit(
                net.indptr, net.indices, beta, s_lag,
                out.s, out.c, c0, out.chosen_policy,
                _POLICY_CODE[cfg.policy], cfg.p_absorb, cfg.delta_c,
                cfg.c_floor, cfg.base_exposure,
                np.uint64(cfg.rng_seed & 0xFFFFFFFFFFFFFFFF), np.uint64(step),
            )
        )
        return out, n_new
    deg = net.degrees
    cnt = np.zeros(net.n_nodes, dtype=np.int64)
    np.add.at(cnt, net.edge_dst, s_lag[net.indices].astype(np.int64))
    candidates = (out.s == 0) & (cnt > 0)
    ids = np.flatnonzero(candidates)
    p = cnt[ids] / deg[ids]
    denom = c0[ids] - cfg.c_floor
    safe = np.where(denom > 0.0, denom, 1.0)
    depletion = np.where(denom > 0.0, (c0[ids] - out.c[ids]) / safe, 1.0)
    p = p * (cfg.base_exposure + (1.0 - cfg.base_exposure) * depletion)
    u = uniform_array(cfg.rng_seed, step, ids, stream=_STREAM_FAIL)
    fails = (u < p) | (out.c[ids] <= cfg.c_floor)
    new_ids = ids[fails]
    _apply_failures_vec(net, beta, new_ids, out, cfg, step)
    return out, int(len(new_ids))


def seed_state(net: SupplyNetwork, cfg: RtConfig, seeds: list[int]) -> RtState:
    """Initial failures at step 0, with their capacity updates applied."""
    state = initial_state(net, cfg)
    beta = beta_weights(net, cfg.beta_mode, cfg.beta_value)
    new_ids = np.array(sorted(seeds), dtype=np.int64)
    if USE_NUMBA:
        new_flag = np.zeros(net.n_nodes, dtype=np.uint8)
        new_flag[new_ids] = 1
        _apply_failures_inner(
            net.indptr, net.indices, beta, new_flag,
            state.s, state.c, state.chosen_policy,
            _POLICY_CODE[cfg.policy], cfg.p_absorb, cfg.delta_c,
            cfg.c_floor, np.uint64(cfg.rng_seed & 0xFFFFFFFFFFFFFFFF),
            np.uint64(0),
        )
    else:
        _apply_failures_vec(net, beta, new_ids, state, cfg, 0)
    return state


def rt_run(net: SupplyNetwork, cfg: RtConfig, plan: AttackPlan | None,
           keep_snapshots: bool = False) -> SimTrace:
    """Run until nothing can change any more, everyone failed, or max_steps.

    A quiet step does not end the run: as long as some alive firm touches a
    failed one, its Bernoulli channel stays open. The trace carries both the
    affected ratio and the capacity share sum(c_t)/sum(c_0), with c_0 taken
    before the seeds' own capacity hits.
    """
    n = net.n_nodes
    seeds = select_seeds(net, plan) if plan is not None else []
    c0_total = float(np.maximum(net.log_capitals, cfg.c_floor).sum())
    state = seed_state(net, cfg, seeds)

    def capacity_ratio() -> float:
        return float(state.c.sum()) / c0_total if c0_total > 0 else 1.0

    steps = [0]
    affected = [float(state.s.sum()) / n]
    capacity = [capacity_ratio()]
    snaps = [state.s.copy()] if keep_snapshots else None
    history: deque[np.ndarray] = deque([state.s.copy()], maxlen=cfg.tau)
    while len(history) < cfg.tau:
        history.appendleft(state.s.copy())

    reason = "max_steps"
    for t in range(1, cfg.max_steps + 1):
        state, _ = rt_step(net, state, cfg, t, history=list(history))
        history.append(state.s.copy())
        steps.append(t)
        affected.append(float(state.s.sum()) / n)
        capacity.append(capacity_ratio())
        if keep_snapshots:
            snaps.append(state.s.copy())
        if state.s.all():
            reason = "saturated"
            break
        # extinction: failures are monotone, so once no alive firm touches a
        # failed one (in the newest state), no future step can change anything
        cnt = np.zeros(n, dtype=np.int64)
        np.add.at(cnt, net.edge_dst, state.s[net.indices].astype(np.int64))
        if not ((state.s == 0) & (cnt > 0)).any():
            reason = "converged"
            break
    return SimTrace(
        steps=np.array(steps, dtype=np.int64),
        affected_ratio=np.array(affected),
        reason=reason,
        capacity_ratio=np.array(capacity),
        snapshots=snaps,
    )
