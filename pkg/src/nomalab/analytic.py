"""Closed-form average BER for SIC detection under Rayleigh fading.

The engine works in decoding-stage order (stage 1 decoded first). For a
target stage k it enumerates a tree: magnitude-class assignments for
stages 2..K (weighted by class priors), then per upstream stage j < k a
table of error distances d_j with closed-form probabilities, and at each
leaf the target's conditional BER against an effective noise
    sigma_tot^2 = sigma_n^2 + sum_{j<k} P_j d_j^2 sigma_j^2
                            + sum_{j>k} P_j |x_j|^2 sigma_j^2
(residuals strictly upstream, uncancelled interference strictly
downstream). The per-stage SINR parameter is 2 P_k sigma_k^2 /
sigma_tot^2.

Two leaf modes exist: "exact" walks the Gray decision boundaries of each
axis and combines exact fading averages per bit; "approx" counts
adjacent decision boundaries (4/3/2 for interior/edge/corner symbols)
and charges f(sinr) per neighbor. An all-QPSK fast path evaluates the
same tree with the closed-form error-distance triplet.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .constellation import (Constellation, MagnitudeClass, _axis_gray_labels,
                            magnitude_classes, neighbor_count)
from .detectors import SystemModel
from .errors import CapacityError
from .kernels import cell_probability_closed, erlang_fade_average, qpsk_sep_triplet

QPSK_DISTANCES = (0.0, 2.0, 2.0 * math.sqrt(2.0))
DEFAULT_PRUNE = 1e-12
DEFAULT_MAX_LEAVES = 10_000_000
AUTO_APPROX_ORDER = 64  # alphabets at or above this size default to approx mode


@dataclass(frozen=True)
class SepTable:
    """Error-distance distribution of one decoding stage.

    entries are (distance, probability) pairs, ascending in distance,
    merged when distances coincide; they sum to 1. tx_class is the
    magnitude class the transmitted symbol was restricted to (None for
    the first-decoded stage, which averages over its whole alphabet).
    """

    entries: tuple[tuple[float, float], ...]
    tx_class: MagnitudeClass | None
    sigma_tot_sq: float
    gain: float


@dataclass(frozen=True)
class TreeBranch:
    """One conditioning path of the expansion tree.

    classes holds the magnitude-class assignment for stages 2..K (empty
    for K = 1); distances holds accumulated upstream error distances for
    stages 1..len(distances); weight is the accumulated probability.
    """

    classes: tuple[MagnitudeClass, ...]
    distances: tuple[float, ...] = ()
    weight: float = 1.0


def _check_stage(model: SystemModel, k: int) -> None:
    if not isinstance(k, int) or not 1 <= k <= model.k:
        raise ValueError(f"stage {k} out of range 1..{model.k}")


def effective_noise_variance(model: SystemModel, k: int, d, x_mags) -> float:
    """Effective per-real-dimension noise variance seen by stage k.

    d: upstream error distances, one per stage j < k.
    x_mags: squared magnitudes |x_j|^2, one per downstream stage j > k.
    """
    _check_stage(model, k)
    stages = model.stage_profiles()
    d = tuple(float(v) for v in d)
    x_mags = tuple(float(v) for v in x_mags)
    if len(d) != k - 1:
        raise ValueError(f"expected {k - 1} upstream distances, got {len(d)}")
    if len(x_mags) != model.k - k:
        raise ValueError(f"expected {model.k - k} downstream magnitudes, got {len(x_mags)}")
    total = model.noise_sigma**2
    for dist, u in zip(d, stages[:k - 1]):
        total += u.power * dist * dist * u.sigma**2
    for mag, u in zip(x_mags, stages[k:]):
        total += u.power * mag * u.sigma**2
    return total


def _branch_sigma_tot(model: SystemModel, k: int, branch: TreeBranch) -> float:
    if len(branch.classes) != model.k - 1:
        raise ValueError(
            f"branch carries {len(branch.classes)} class assignments, "
            f"expected {model.k - 1} (stages 2..K)")
    if len(branch.distances) < k - 1:
        raise ValueError(f"branch carries {len(branch.distances)} distances, "
                         f"stage {k} needs {k - 1}")
    x_mags = [cls.squared_magnitude for cls in branch.classes[k - 1:]]
    return effective_noise_variance(model, k, branch.distances[:k - 1], x_mags)


def _stage_gain(model: SystemModel, k: int, sigma_tot_sq: float) -> float:
    u = model.stage_profiles()[k - 1]
    return 2.0 * u.power * u.sigma**2 / sigma_tot_sq


def _first_quadrant(c: Constellation) -> tuple[int, ...]:
    """Representative symbols with nonnegative coordinates, positive on
    any non-degenerate axis."""
    out = []
    for idx in range(c.size):
        p = c.points[idx]
        if (c.m_i == 1 or p.real > 0) and (c.m_q == 1 or p.imag > 0):
            out.append(idx)
    return tuple(out)


def _admissible_tx(c: Constellation, tx_class: MagnitudeClass | None) -> tuple[int, ...]:
    reps = _first_quadrant(c)
    if tx_class is None:
        return reps
    members = set(tx_class.members)
    out = tuple(i for i in reps if i in members)
    if not out:
        raise ValueError("magnitude class has no first-quadrant representative")
    return out


def sep_table_user(model: SystemModel, k: int, branch: TreeBranch) -> SepTable:
    """Closed-form error-distance table for stage k on the given branch."""
    _check_stage(model, k)
    sigma_tot_sq = _branch_sigma_tot(model, k, branch)
    gain = _stage_gain(model, k, sigma_tot_sq)
    tx_class = branch.classes[k - 2] if k >= 2 else None
    c = model.stage_profiles()[k - 1].constellation
    tx_set = _admissible_tx(c, tx_class)
    prior = 1.0 / len(tx_set)
    acc: dict[float, float] = {}
    for tx_idx in tx_set:
        tx = complex(c.points[tx_idx])
        for ci in range(c.m_i):
            for cq in range(c.m_q):
                p = cell_probability_closed(tx, ci, cq, c, gain, model.n_antennas)
                center = complex(c.levels_i[ci], c.levels_q[cq])
                d = round(abs(tx - center), 12)
                acc[d] = acc.get(d, 0.0) + prior * p
    entries = tuple(sorted(acc.items()))
    return SepTable(entries, tx_class, sigma_tot_sq, gain)


def _f_tail(dist: float, gain: float, n: int) -> float:
    """Fading average of Q(dist * sqrt(gain z)), zero at infinite offset."""
    if math.isinf(dist):
        return 0.0
    return erlang_fade_average(gain * dist * dist, n)


def _axis_bit_error_sum(m: int, levels, bounds, t_slot: int, gain: float, n: int) -> float:
    """Sum over this axis's bits of the per-bit error probability for a
    transmitted level. Each cell probability is a difference of fading
    tails measured outward from the transmitted level, so tiny cells
    never fall victim to 1-(1-eps) float cancellation."""
    if m == 1:
        return 0.0
    labels = _axis_gray_labels(m)
    t_level = levels[t_slot]
    slot_prob = []
    for j in range(m):
        lo, hi = bounds[j], bounds[j + 1]
        if lo >= t_level:
            p = _f_tail(lo - t_level, gain, n) - _f_tail(hi - t_level, gain, n)
        elif hi <= t_level:
            p = _f_tail(t_level - hi, gain, n) - _f_tail(t_level - lo, gain, n)
        else:
            p = 1.0 - _f_tail(t_level - lo, gain, n) - _f_tail(hi - t_level, gain, n)
        slot_prob.append(p)
    total = 0.0
    for b in range(len(labels[0])):
        total += sum(p for j, p in enumerate(slot_prob) if labels[j][b] != labels[t_slot][b])
    return total


def conditional_ber_user(model: SystemModel, k: int, branch: TreeBranch,
                         mode: str = "exact") -> float:
    """BER of stage k conditioned on a branch's classes and distances."""
    _check_stage(model, k)
    if mode not in ("exact", "approx"):
        raise ValueError(f"unknown mode {mode!r}")
    sigma_tot_sq = _branch_sigma_tot(model, k, branch)
    gain = _stage_gain(model, k, sigma_tot_sq)
    c = model.stage_profiles()[k - 1].constellation
    tx_class = branch.classes[k - 2] if k >= 2 else None
    tx_set = _admissible_tx(c, tx_class)
    n = model.n_antennas
    total = 0.0
    if mode == "approx":
        f1 = erlang_fade_average(gain, n)
        for tx_idx in tx_set:
            total += neighbor_count(c, tx_idx) * f1
    else:
        for tx_idx in tx_set:
            total += _axis_bit_error_sum(
                c.m_i, c.levels_i, c.boundaries_i, int(c.level_index_i[tx_idx]), gain, n)
            total += _axis_bit_error_sum(
                c.m_q, c.levels_q, c.boundaries_q, int(c.level_index_q[tx_idx]), gain, n)
    return total / (len(tx_set) * c.bits_per_symbol)


def class_assignments(model: SystemModel):
    """Magnitude-class assignments for stages 2..K with prior weights."""
    stages = model.stage_profiles()
    lists = [magnitude_classes(u.constellation) for u in stages[1:]]
    out = []
    for combo in itertools.product(*lists):
        weight = 1.0
        for cls in combo:
            weight *= cls.probability
        out.append((tuple(combo), weight))
    return out


def ber_user_qam(model: SystemModel, k: int, mode: str = "exact",
                 prune_threshold: float = DEFAULT_PRUNE,
                 max_leaves: int = DEFAULT_MAX_LEAVES,
                 return_dropped: bool = False):
    """General tree-expansion BER for stage k, any rectangular alphabets.

    Branches whose accumulated probability falls below prune_threshold
    are dropped; their total mass bounds the truncation error from above
    (each dropped leaf's conditional BER is at most 1). Exceeding
    max_leaves raises CapacityError.
    """
    _check_stage(model, k)
    state = {"total": 0.0, "dropped": 0.0, "leaves": 0}
    table_cache: dict = {}

    def leaf(branch: TreeBranch) -> None:
        state["leaves"] += 1
        if state["leaves"] > max_leaves:
            raise CapacityError(f"expansion tree exceeds {max_leaves} leaves")
        state["total"] += branch.weight * conditional_ber_user(model, k, branch, mode)

    def walk(stage: int, branch: TreeBranch) -> None:
        if stage == k:
            leaf(branch)
            return
        cache_key = (stage, branch.distances[:stage - 1],
                     tuple(cls.squared_magnitude
                           for cls in branch.classes[max(stage - 2, 0):]))
        table = table_cache.get(cache_key)
        if table is None:
            table = sep_table_user(model, stage, branch)
            table_cache[cache_key] = table
        for d, p in table.entries:
            w = branch.weight * p
            if w < prune_threshold:
                state["dropped"] += w
                continue
            walk(stage + 1, TreeBranch(branch.classes, branch.distances + (d,), w))

    for classes, weight in class_assignments(model):
        if weight < prune_threshold:
            state["dropped"] += weight
            continue
        walk(1, TreeBranch(classes, (), weight))

    if return_dropped:
        return state["total"], state["dropped"]
    return state["total"]


def ber_user_qpsk(model: SystemModel, k: int) -> float:
    """All-QPSK fast path: nested closed-form error-distance triplets."""
    _check_stage(model, k)
    stages = model.stage_profiles()
    for u in stages:
        if not u.constellation.is_qpsk:
            raise ValueError("ber_user_qpsk requires every user to be QPSK")
    noise_var = model.noise_sigma**2
    n = model.n_antennas

    def sinr(j: int, d_prefix) -> float:
        sigma_tot = noise_var
        for dist, u in zip(d_prefix, stages[:j - 1]):
            sigma_tot += u.power * dist * dist * u.sigma**2
        for u in stages[j:]:
            sigma_tot += 2.0 * u.power * u.sigma**2
        return 2.0 * stages[j - 1].power * stages[j - 1].sigma**2 / sigma_tot

    def expand(stage: int, d_prefix, weight: float) -> float:
        if stage == k:
            return weight * erlang_fade_average(sinr(k, d_prefix), n)
        triplet = qpsk_sep_triplet(sinr(stage, d_prefix), n)
        total = 0.0
        for dist, p in zip(QPSK_DISTANCES, triplet):
            total += expand(stage + 1, d_prefix + (dist,), weight * p)
        return total

    return expand(1, (), 1.0)


def _resolve_mode(model: SystemModel, k: int, mode: str) -> str:
    if mode in ("exact", "approx"):
        return mode
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    size = model.stage_profiles()[k - 1].constellation.size
    return "approx" if size >= AUTO_APPROX_ORDER else "exact"


def ber_user(model: SystemModel, k: int, mode: str = "auto",
             prune_threshold: float = DEFAULT_PRUNE,
             max_leaves: int = DEFAULT_MAX_LEAVES) -> float:
    """Average BER of decoding stage k, routed to the cheapest valid path."""
    resolved = _resolve_mode(model, k, mode)
    all_qpsk = all(u.constellation.is_qpsk for u in model.users)
    if all_qpsk and resolved == "exact":
        return ber_user_qpsk(model, k)
    return ber_user_qam(model, k, resolved, prune_threshold, max_leaves)


def sum_ber(model: SystemModel, mode: str = "auto",
            prune_threshold: float = DEFAULT_PRUNE,
            max_leaves: int = DEFAULT_MAX_LEAVES) -> float:
    """Sum of per-stage average BERs (the power-allocation objective)."""
    return sum(ber_user(model, k, mode, prune_threshold, max_leaves)
               for k in range(1, model.k + 1))
