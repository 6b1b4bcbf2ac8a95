"""Description lengths for binned event data.

The three-stage code: stage 1 sends the bin widths and cluster sizes as
compositions, stage 2 sends per-cluster source/destination/timestep counts
as multisets, stage 3 sends the weighted incidence matrix and the events
given the margins (two matrix-count terms). The decoupled form replaces the
stage-1 compositions with a per-cluster constant so the objective becomes a
sum of independent cluster costs, which is what the optimizers minimize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import LN2, ec_bits, log2_binomial, log2_multiset
from .events import (
    Binning,
    DiscretizedEvents,
    EmptyClusterError,
    HypergraphSnapshot,
    induce_partition,
    build_snapshot,
)

INF = math.inf


def decoupled_constant(N: int, T: int) -> float:
    """Per-cluster constant of the decoupled objective, log2((N-1)(T-1)).

    Clamped to 0 for the degenerate N=1 or T=1 grids, where only K=1 is
    feasible and the constant cannot affect any comparison.
    """
    return math.log2(max(1, (N - 1) * (T - 1)))


def naive_dl(N: int, S: int, D: int, T: int) -> float:
    """One-level code length: N events, each over S*D*T possibilities."""
    if min(N, S, D, T) < 1:
        raise ValueError("naive_dl needs N, S, D, T >= 1")
    return N * math.log2(S * D * T)


def stage1_dl(N: int, T: int, K: int) -> float:
    """Bits to send the bin widths and cluster sizes as K-compositions."""
    if not 1 <= K <= min(N, T):
        raise ValueError(f"need 1 <= K <= min(N, T), got K={K}, N={N}, T={T}")
    return log2_binomial(T - 1, K - 1) + log2_binomial(N - 1, K - 1)


def _snapshot_stage2(snap: HypergraphSnapshot, S: int, D: int) -> float:
    m = snap.m_k
    return (
        log2_multiset(S, m) + log2_multiset(D, m) + log2_multiset(snap.tau_k, m)
    )


def _snapshot_stage3(snap: HypergraphSnapshot) -> float:
    s_pos = tuple(int(v) for v in snap.source_margin if v > 0)
    d_pos = tuple(int(v) for v in snap.dest_margin if v > 0)
    g_pos = tuple(snap.edges.values())
    n_pos = tuple(int(v) for v in snap.time_margin if v > 0)
    return ec_bits(s_pos, d_pos) + ec_bits(g_pos, n_pos)


def cluster_dl(snap: HypergraphSnapshot, N: int, T: int) -> float:
    """Decoupled description-length cost of one cluster.

    Constant + the three stage-2 multiset terms + the two stage-3 matrix
    count terms (effective-columns estimates, zero entries stripped).
    """
    if snap.m_k < 1:
        raise EmptyClusterError("cluster_dl needs a cluster with at least one event")
    S = len(snap.source_margin)
    D = len(snap.dest_margin)
    return decoupled_constant(N, T) + _snapshot_stage2(snap, S, D) + _snapshot_stage3(snap)


@dataclass(frozen=True)
class DLBreakdown:
    """Bits per encoding stage plus the decoupled per-cluster costs."""

    L0_naive: float
    L1: float
    L2: float
    L3: float
    total: float
    decoupled_total: float
    per_cluster: tuple[float, ...]


def total_dl_exact(d: DiscretizedEvents, b: Binning) -> DLBreakdown:
    """Exact three-stage description length of (d, b), with the decoupled form.

    Raises EmptyClusterError for binnings that leave a cluster without
    events (the stage-1 code sends cluster sizes as positive integers).
    """
    part = induce_partition(d, b)  # validates the binning
    N, T = d.base.N, d.T
    S, D = d.base.S, d.base.D
    const = decoupled_constant(N, T)
    l2_terms, l3_terms = [], []
    for k in range(b.K):
        snap = build_snapshot(d, b, k)
        l2_terms.append(_snapshot_stage2(snap, S, D))
        l3_terms.append(_snapshot_stage3(snap))
    L1 = stage1_dl(N, T, part.K)
    L2 = sum(l2_terms)
    L3 = sum(l3_terms)
    per_cluster = tuple(const + l2 + l3 for l2, l3 in zip(l2_terms, l3_terms))
    return DLBreakdown(
        L0_naive=naive_dl(N, S, D, T),
        L1=L1,
        L2=L2,
        L3=L3,
        total=L1 + L2 + L3,
        decoupled_total=sum(per_cluster),
        per_cluster=per_cluster,
    )


class MarginState:
    """Accumulating margins of one timestep interval (or cluster).

    Events are only ever added, one timestep at a time. Keeps the per-source
    / per-destination / per-edge count dictionaries plus the running
    aggregate sums the effective-columns terms need, updated in O(1) per
    distinct value added.
    """

    __slots__ = ("m", "s_cnt", "d_cnt", "g_cnt", "sum_d2", "lg_s1", "lg_d1", "lg_g1")

    def __init__(self):
        self.m = 0
        self.s_cnt: dict[int, int] = {}
        self.d_cnt: dict[int, int] = {}
        self.g_cnt: dict[int, int] = {}
        self.sum_d2 = 0  # sum of squared destination counts
        self.lg_s1 = 0.0  # sum of lgamma(count + 1) over sources
        self.lg_d1 = 0.0
        self.lg_g1 = 0.0  # ... over edge weights

    def add_counts(self, s_pairs, d_pairs, g_pairs, lgt) -> None:
        """Add one timestep's events, pre-grouped into (value, count) pairs.

        `lgt` is an integer lgamma lookup table covering counts up to the
        total event count.
        """
        s_cnt = self.s_cnt
        for s, c in s_pairs:
            c0 = s_cnt.get(s, 0)
            s_cnt[s] = c0 + c
            self.lg_s1 += lgt[c0 + c + 1] - lgt[c0 + 1]
            self.m += c
        d_cnt = self.d_cnt
        for t, c in d_pairs:
            c0 = d_cnt.get(t, 0)
            d_cnt[t] = c0 + c
            self.lg_d1 += lgt[c0 + c + 1] - lgt[c0 + 1]
            self.sum_d2 += (2 * c0 + c) * c
        g_cnt = self.g_cnt
        for g, c in g_pairs:
            c0 = g_cnt.get(g, 0)
            g_cnt[g] = c0 + c
            self.lg_g1 += lgt[c0 + c + 1] - lgt[c0 + 1]

    @classmethod
    def merged(cls, a: "MarginState", b: "MarginState") -> "MarginState":
        small, big = (a, b) if a.m <= b.m else (b, a)
        out = cls()
        out.m = a.m + b.m
        out.s_cnt = dict(big.s_cnt)
        out.d_cnt = dict(big.d_cnt)
        out.g_cnt = dict(big.g_cnt)
        out.sum_d2 = big.sum_d2
        out.lg_s1 = big.lg_s1
        out.lg_d1 = big.lg_d1
        out.lg_g1 = big.lg_g1
        for s, c in small.s_cnt.items():
            c0 = out.s_cnt.get(s, 0)
            out.s_cnt[s] = c0 + c
            out.lg_s1 += math.lgamma(c0 + c + 1) - math.lgamma(c0 + 1)
        for t, c in small.d_cnt.items():
            c0 = out.d_cnt.get(t, 0)
            out.d_cnt[t] = c0 + c
            out.lg_d1 += math.lgamma(c0 + c + 1) - math.lgamma(c0 + 1)
            out.sum_d2 += 2 * c0 * c + c * c
        for g, c in small.g_cnt.items():
            c0 = out.g_cnt.get(g, 0)
            out.g_cnt[g] = c0 + c
            out.lg_g1 += math.lgamma(c0 + c + 1) - math.lgamma(c0 + 1)
        return out


class IntervalCostEngine:
    """Fast decoupled cluster costs over contiguous timestep intervals.

    Same objective as cluster_dl, organized for the optimizers: fixed
    per-timestep counts live in prefix tables so the time-margin side of the
    cost is O(1), and source/destination/edge margins come from an
    incrementally maintained MarginState. Appending an eventless timestep to
    an interval changes the cost by a single closed-form width increment,
    which is what makes the dynamic program's O(1) endpoint updates valid.
    """

    # Per-R prefix tables for the time-margin term are built while their
    # footprint (edge alphabet x occupied steps) stays below this budget;
    # beyond it the term falls back to a vectorized sum over occupied steps.
    EDGE_TABLE_BUDGET = 200_000

    def __init__(self, d: DiscretizedEvents):
        base = d.base
        self.d = d
        self.T = d.T
        self.N = base.N
        self.S = base.S
        self.D = base.D
        self.const = decoupled_constant(self.N, self.T)

        counts = d.events_in_step
        self.step_events = counts.tolist()
        self.cum_events = np.concatenate([[0], np.cumsum(counts)]).tolist()
        self.occ_rank = np.concatenate([[0], np.cumsum(counts > 0)]).tolist()
        occ_np = counts[counts > 0]
        self.occ_counts = occ_np.tolist()
        P = len(occ_np)

        # integer lgamma table: index i holds lgamma(i), i >= 1. Arguments can
        # reach m + tau <= N + T, count + #nonzero <= 2N, and (for the edge
        # prefix tables) step count + edge alphabet size.
        n_edges_max = min(self.S * self.D, self.N)
        size = self.N + max(self.T, self.S, self.D, self.N, n_edges_max) + 3
        lgt_np = np.concatenate([[0.0, 0.0], np.cumsum(np.log(np.arange(1, size - 1)))])
        self.lgt = lgt_np.tolist()
        self._lgt_np = lgt_np
        self._occ_np = occ_np

        zero = np.zeros(1)
        self.pref_lg1 = np.concatenate([zero, np.cumsum(lgt_np[occ_np + 1])]).tolist()
        self.pref_sq = np.concatenate([zero, np.cumsum(occ_np * occ_np)]).tolist()

        if n_edges_max * (P + 1) <= self.EDGE_TABLE_BUDGET:
            rs = np.arange(2, n_edges_max + 1)
            block = np.cumsum(lgt_np[occ_np[None, :] + rs[:, None]], axis=1)
            block = np.concatenate([np.zeros((len(rs), 1)), block], axis=1)
            self.pref_lgR = [None, None] + [row.tolist() for row in block]
        else:
            self.pref_lgR = None

        # per occupied step: events grouped into (value, count) pairs, so a
        # state update costs O(distinct values), not O(events)
        steps_arr = d.step_of_event
        ev_key = base.sources * base.D + base.dests
        grouped = [
            self._group_by_step(steps_arr, field, P)
            for field in (base.sources, base.dests, ev_key)
        ]
        self.step_pairs: list[tuple[list, list, list]] = [
            (grouped[0][p], grouped[1][p], grouped[2][p]) for p in range(P)
        ]

        # stage-2 multiset terms as functions of m alone
        self.msS = self._ms_table(self.S)
        self.msD = self._ms_table(self.D)

    @staticmethod
    def _group_by_step(steps: np.ndarray, values: np.ndarray, n_occupied: int) -> list[list]:
        # one (value, count) list per occupied step, in step order
        width = int(values.max()) + 1 if len(values) else 1
        uniq, cnt = np.unique(steps * width + values, return_counts=True)
        upairs = np.stack([uniq % width, cnt], axis=1).tolist()
        boundaries = np.searchsorted(uniq // width, np.unique(steps), side="left").tolist()
        boundaries.append(len(uniq))
        return [
            [tuple(pair) for pair in upairs[boundaries[p] : boundaries[p + 1]]]
            for p in range(n_occupied)
        ]

    def _ms_table(self, y: int) -> list[float]:
        lgt = np.asarray(self.lgt[: self.N + y + 1])
        ms = (lgt[y : y + self.N + 1] - lgt[y] - lgt[1 : self.N + 2]) / LN2
        return ms.tolist()

    def new_state(self) -> MarginState:
        return MarginState()

    def add_step_events(self, state: MarginState, step: int) -> None:
        sp, dp, gp = self.step_pairs[self.occ_rank[step]]
        state.add_counts(sp, dp, gp, self.lgt)

    def state_for_interval(self, a: int, z: int) -> MarginState:
        """Margin state for the events of steps [a, z)."""
        state = MarginState()
        lgt = self.lgt
        for p in range(self.occ_rank[a], self.occ_rank[z]):
            sp, dp, gp = self.step_pairs[p]
            state.add_counts(sp, dp, gp, lgt)
        return state

    def width_increment(self, m: int, old_width: int) -> float:
        """Cost change from widening an interval by one eventless step."""
        return math.log2((m + old_width) / old_width)

    def _ec_sd(self, st: MarginState) -> float:
        m = st.m
        nr = len(st.s_cnt)
        nc = len(st.d_cnt)
        if nr <= 1 or nc <= 1:
            return 0.0
        lgt = self.lgt
        if nc == m:  # every destination distinct
            return (lgt[m + 1] - st.lg_s1) / LN2
        if nr == m:  # every source distinct
            return (lgt[m + 1] - st.lg_d1) / LN2
        sc2 = st.sum_d2
        ctilde = (m * m - m + (m * m - sc2) / nr) / (sc2 - m)
        lg = math.lgamma
        bits = -nr * lg(ctilde) - st.lg_s1
        for r in st.s_cnt.values():
            bits += lg(r + ctilde)
        bits += -nc * lgt[nr] - st.lg_d1
        for c in st.d_cnt.values():
            bits += lgt[c + nr]
        bits -= lg(m + nr * ctilde) - lg(nr * ctilde) - lgt[m + 1]
        return bits / LN2

    def _ec_gn(self, st: MarginState, p0: int, p1: int) -> float:
        m = st.m
        nr = len(st.g_cnt)
        nc = p1 - p0
        if nr <= 1 or nc <= 1:
            return 0.0
        lgt = self.lgt
        if nc == m:  # one event per occupied step
            return (lgt[m + 1] - st.lg_g1) / LN2
        if nr == m:  # all edge weights 1
            return (lgt[m + 1] - (self.pref_lg1[p1] - self.pref_lg1[p0])) / LN2
        sc2 = self.pref_sq[p1] - self.pref_sq[p0]
        ctilde = (m * m - m + (m * m - sc2) / nr) / (sc2 - m)
        lg = math.lgamma
        bits = -nr * lg(ctilde) - st.lg_g1
        for w in st.g_cnt.values():
            bits += lg(w + ctilde)
        if self.pref_lgR is not None:
            sum_lgR = self.pref_lgR[nr][p1] - self.pref_lgR[nr][p0]
        else:
            sum_lgR = float(self._lgt_np[self._occ_np[p0:p1] + nr].sum())
        bits += sum_lgR - nc * lgt[nr] - (self.pref_lg1[p1] - self.pref_lg1[p0])
        bits -= lg(m + nr * ctilde) - lg(nr * ctilde) - lgt[m + 1]
        return bits / LN2

    def interval_cost(self, a: int, z: int, state: MarginState) -> float:
        """Decoupled cost of the cluster covering steps [a, z).

        `state` must hold the margins of exactly those steps' events.
        Returns +inf for eventless intervals (inadmissible clusters).
        """
        m = state.m
        if m == 0:
            return INF
        tau = z - a
        lgt = self.lgt
        bits = (
            self.const
            + self.msS[m]
            + self.msD[m]
            + (lgt[m + tau] - lgt[tau] - lgt[m + 1]) / LN2
        )
        bits += self._ec_sd(state)
        bits += self._ec_gn(state, self.occ_rank[a], self.occ_rank[z])
        return bits

    def single_cluster_cost(self) -> float:
        """Decoupled cost of the all-in-one-bin solution (the K=1 reference)."""
        return self.interval_cost(0, self.T, self.state_for_interval(0, self.T))
