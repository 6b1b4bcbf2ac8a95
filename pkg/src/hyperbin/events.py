"""Temporal bipartite event data.

Parsing and validation of (source, destination, time) interaction events,
discretization onto a uniform timestep grid, binnings of the grid, the
event partitions they induce, and per-bin hypergraph snapshots.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np


class EventDataError(ValueError):
    """Raised for malformed event input (bad rows, empty data, ...)."""


class EmptyClusterError(ValueError):
    """Raised when a binning would leave some cluster without any event."""


@dataclass(frozen=True)
class EventSet:
    """Time-ordered bipartite interaction events with dense integer ids.

    `sources[i]`, `dests[i]`, `times[i]` describe event i; ids index into
    `source_labels` / `dest_labels`. Events are sorted by time, ties keeping
    input order. Immutable after construction.
    """

    sources: np.ndarray
    dests: np.ndarray
    times: np.ndarray
    source_labels: tuple[str, ...]
    dest_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", np.asarray(self.sources, dtype=np.int64))
        object.__setattr__(self, "dests", np.asarray(self.dests, dtype=np.int64))
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))
        if self.sources.ndim != 1 or len(self.sources) == 0:
            raise EventDataError("event set needs at least one event")
        if not (len(self.sources) == len(self.dests) == len(self.times)):
            raise EventDataError("sources, dests and times must have equal length")
        if np.any(np.diff(self.times) < 0):
            raise EventDataError("events must be sorted by time")
        if not self.source_labels or not self.dest_labels:
            raise EventDataError("label alphabets must be non-empty")
        if self.sources.min() < 0 or self.sources.max() >= len(self.source_labels):
            raise EventDataError("source id out of range")
        if self.dests.min() < 0 or self.dests.max() >= len(self.dest_labels):
            raise EventDataError("destination id out of range")

    @property
    def N(self) -> int:
        return len(self.times)

    @property
    def S(self) -> int:
        return len(self.source_labels)

    @property
    def D(self) -> int:
        return len(self.dest_labels)


def _parse_timestamp(value, row: int) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise EventDataError(f"row {row}: cannot parse timestamp {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)  # naive stamps read as UTC
    return dt.timestamp()


def parse_events(records: Iterable[tuple]) -> EventSet:
    """Build an EventSet from (source_label, dest_label, timestamp) records.

    Labels are mapped to dense integer ids in first-appearance order;
    timestamps may be numbers or ISO-8601 strings. Events are stably sorted
    by time, so records sharing a timestamp keep their input order.
    Duplicate (s, d, t) triples are allowed (multi-events).
    """
    src_ids: dict[str, int] = {}
    dst_ids: dict[str, int] = {}
    sources, dests, times = [], [], []
    row = 0
    for rec in records:
        row += 1
        try:
            s_label, d_label, t_raw = rec
        except ValueError:
            raise EventDataError(f"row {row}: expected 3 fields, got {rec!r}") from None
        s_label, d_label = str(s_label), str(d_label)
        sources.append(src_ids.setdefault(s_label, len(src_ids)))
        dests.append(dst_ids.setdefault(d_label, len(dst_ids)))
        times.append(_parse_timestamp(t_raw, row))
    if row == 0:
        raise EventDataError("no events in input")
    order = np.argsort(np.asarray(times), kind="stable")
    return EventSet(
        sources=np.asarray(sources)[order],
        dests=np.asarray(dests)[order],
        times=np.asarray(times)[order],
        source_labels=tuple(src_ids),
        dest_labels=tuple(dst_ids),
    )


CSV_HEADER = ("source", "destination", "timestamp")


def read_events_csv(path) -> EventSet:
    """Read events from a CSV file with header source,destination,timestamp."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EventDataError(f"{path}: empty file") from None
        if tuple(h.strip().lower() for h in header) != CSV_HEADER:
            raise EventDataError(
                f"{path}: expected header {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        records = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 3:
                raise EventDataError(f"{path}: row {lineno}: expected 3 columns")
            try:
                stamp = _parse_timestamp(fields[2], lineno)
            except EventDataError as exc:
                raise EventDataError(f"{path}: {exc}") from None
            records.append((fields[0], fields[1], stamp))
    if not records:
        raise EventDataError(f"{path}: no event rows")
    return parse_events(records)


@dataclass(frozen=True)
class DiscretizedEvents:
    """An EventSet mapped onto T uniform timesteps of width delta_t.

    Step k covers [origin + k*delta_t, origin + (k+1)*delta_t) with the last
    step closed on the right; its representative time is the step midpoint,
    so the rounding distortion is at most delta_t / 2.
    """

    base: EventSet
    T: int
    delta_t: float
    origin: float
    step_of_event: np.ndarray
    events_in_step: np.ndarray

    def representative(self, step: int) -> float:
        return self.origin + (step + 0.5) * self.delta_t

    @property
    def N(self) -> int:
        return self.base.N


def _finish_discretization(ev: EventSet, T: int, origin: float, delta_t: float) -> DiscretizedEvents:
    steps = np.floor((ev.times - origin) / delta_t).astype(np.int64)
    np.clip(steps, 0, T - 1, out=steps)
    return DiscretizedEvents(
        base=ev,
        T=T,
        delta_t=delta_t,
        origin=origin,
        step_of_event=steps,
        events_in_step=np.bincount(steps, minlength=T),
    )


def discretize(ev: EventSet, T: int) -> DiscretizedEvents:
    """Round event times onto T uniform steps spanning [t_1, t_N]."""
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    t1 = float(ev.times[0])
    span = float(ev.times[-1]) - t1
    delta_t = span / T if span > 0 else 1.0
    return _finish_discretization(ev, T, t1, delta_t)


def discretize_by_width(ev: EventSet, delta_t: float) -> DiscretizedEvents:
    """Discretize with an explicit step width; T becomes ceil(span / delta_t)."""
    if delta_t <= 0:
        raise ValueError(f"need delta_t > 0, got {delta_t}")
    t1 = float(ev.times[0])
    span = float(ev.times[-1]) - t1
    T = max(1, int(np.ceil(span / delta_t)))
    return _finish_discretization(ev, T, t1, delta_t)


def discretize_on_grid(ev: EventSet, T: int, origin: float, delta_t: float) -> DiscretizedEvents:
    """Discretize onto an explicitly anchored grid.

    Used when the grid is known a priori (synthetic data, re-evaluating a
    stored result) rather than derived from the observed time span. All
    event times must fall inside [origin, origin + T*delta_t].
    """
    if T < 1 or delta_t <= 0:
        raise ValueError("need T >= 1 and delta_t > 0")
    lo, hi = float(ev.times[0]), float(ev.times[-1])
    if lo < origin - 1e-9 * delta_t or hi > origin + T * delta_t + 1e-9 * delta_t:
        raise ValueError("event times fall outside the supplied grid")
    return _finish_discretization(ev, T, origin, delta_t)


@dataclass(frozen=True)
class Binning:
    """Ordered positive timestep-interval widths partitioning the grid."""

    widths: tuple[int, ...]

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if not widths or min(widths) < 1:
            raise ValueError(f"bin widths must be positive integers, got {widths}")

    @property
    def K(self) -> int:
        return len(self.widths)

    @property
    def T(self) -> int:
        return sum(self.widths)

    def starts(self) -> tuple[int, ...]:
        out, acc = [], 0
        for w in self.widths:
            out.append(acc)
            acc += w
        return tuple(out)


@dataclass(frozen=True)
class EventPartition:
    """Contiguous partition of the time-ordered events into K clusters."""

    cluster_of_event: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "cluster_of_event", np.asarray(self.cluster_of_event, dtype=np.int64)
        )
        object.__setattr__(self, "sizes", np.asarray(self.sizes, dtype=np.int64))
        if np.any(np.diff(self.cluster_of_event) < 0):
            raise ValueError("cluster assignments must be contiguous in time")
        if self.sizes.min() < 1:
            raise EmptyClusterError("every cluster needs at least one event")
        if int(self.sizes.sum()) != len(self.cluster_of_event):
            raise ValueError("cluster sizes do not sum to the number of events")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "EventPartition":
        m = np.asarray(sizes, dtype=np.int64)
        return cls(cluster_of_event=np.repeat(np.arange(len(m)), m), sizes=m)

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def N(self) -> int:
        return len(self.cluster_of_event)


def induce_partition(d: DiscretizedEvents, b: Binning) -> EventPartition:
    """Partition of the events induced by a binning of the timesteps."""
    if b.T != d.T:
        raise ValueError(f"binning covers {b.T} steps but the grid has {d.T}")
    cuts = np.cumsum(b.widths)[:-1]
    cluster = np.searchsorted(cuts, d.step_of_event, side="right")
    sizes = np.bincount(cluster, minlength=b.K)
    if sizes.min() < 1:
        empty = int(np.argmin(sizes))
        raise EmptyClusterError(f"cluster {empty} of binning {b.widths} holds no events")
    return EventPartition(cluster_of_event=cluster, sizes=sizes)


def build_snapshot(d: DiscretizedEvents, b: Binning, k: int) -> "HypergraphSnapshot":
    """Weighted incidence snapshot of cluster k under binning b."""
    if not 0 <= k < b.K:
        raise ValueError(f"cluster index {k} out of range for K={b.K}")
    starts = b.starts()
    a = starts[k]
    z = a + b.widths[k]  # exclusive step end
    steps = d.step_of_event
    lo = int(np.searchsorted(steps, a, side="left"))
    hi = int(np.searchsorted(steps, z, side="left"))
    if hi <= lo:
        raise EmptyClusterError(f"cluster {k} of binning {b.widths} holds no events")
    src = d.base.sources[lo:hi]
    dst = d.base.dests[lo:hi]
    D = d.base.D
    uniq, cnt = np.unique(src * D + dst, return_counts=True)
    edges = {
        (int(k) // D, int(k) % D): int(c) for k, c in zip(uniq.tolist(), cnt.tolist())
    }
    return HypergraphSnapshot(
        edges=edges,
        source_margin=np.bincount(src, minlength=d.base.S),
        dest_margin=np.bincount(dst, minlength=d.base.D),
        time_margin=np.bincount(steps[lo:hi] - a, minlength=b.widths[k]),
        m_k=hi - lo,
        tau_k=b.widths[k],
    )


@dataclass(frozen=True)
class HypergraphSnapshot:
    """Weighted bipartite incidence of one temporal bin.

    `edges[(s, d)]` counts events pairing source s with destination d inside
    the bin; the margins are the per-source, per-destination and per-step
    event counts, all summing to m_k.
    """

    edges: dict[tuple[int, int], int]
    source_margin: np.ndarray
    dest_margin: np.ndarray
    time_margin: np.ndarray
    m_k: int
    tau_k: int


def canonical_binning(d: DiscretizedEvents, b: Binning) -> Binning:
    """Deterministic representative of b's binning equivalence class.

    Empty timesteps at cluster boundaries can sit on either side without
    changing the event partition; the canonical member starts every cluster
    at the timestep of its first event (cluster 1 pinned to step 0, the last
    cluster absorbing trailing empty steps).
    """
    part = induce_partition(d, b)
    offsets = np.concatenate([[0], np.cumsum(part.sizes)])
    starts = [0] + [int(d.step_of_event[offsets[k]]) for k in range(1, part.K)]
    starts.append(d.T)
    return Binning(tuple(starts[i + 1] - starts[i] for i in range(part.K)))
