"""Aggregate metrics over session records, mirroring the outcome tables.

Includes realized-efficiency reporting against the complete-network
equilibrium benchmark, equilibrium-architecture frequency with a two-link
slack, per-period link-profitability diagnostics, pooled least-squares
estimation of the effort-adjustment rule, and a per-group summary table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dynamics import SessionRecord
from .equilibria import equilibrium_payoffs, nash_efforts
from .errors import LqnetError, RankDeficientDataError
from .model import GameParams, Network, Treatment, best_response_effort
from .structure import ARCHITECTURES, architecture_distance, stats

Window = tuple[int, int]


@dataclass(frozen=True)
class EfficiencyReport:
    avg_effort: float
    avg_payoff: float
    relative_efficiency: float
    window: Window


@dataclass(frozen=True)
class ArchitectureFrequency:
    exact: float
    within_two: float


@dataclass(frozen=True)
class FrequencyReport:
    per_architecture: dict[str, ArchitectureFrequency]
    window: Window


@dataclass(frozen=True)
class LinkDiagnostics:
    avg_profitable_missing: float
    profitable_missing_share: float
    avg_unprofitable_existing: float
    unprofitable_existing_share: float
    reciprocated_share: float
    window: Window


@dataclass(frozen=True)
class FitResult:
    b0: float
    b1: float
    b2: float
    residual_sum_squares: float
    observation_count: int


@dataclass(frozen=True)
class GroupSummary:
    session_id: str
    means: dict[str, float]
    stds: dict[str, float]


@dataclass(frozen=True)
class TreatmentSummary:
    treatment: str
    window: Window
    per_group: list[GroupSummary]
    overall_means: dict[str, float]
    overall_stds: dict[str, float]


SUMMARY_FIELDS = (
    "link_count",
    "link_fraction",
    "avg_degree",
    "min_degree",
    "max_degree",
    "clustering",
    "avg_effort",
    "avg_payoff",
    "relative_efficiency",
    "nash_effort_on_network",
)


def resolve_window(window, T: int) -> Window:
    """Normalize a window spec ("full", "last10", or a 1-based (start, end))."""
    if window == "full" or window is None:
        return (1, T)
    if window == "last10":
        return (max(1, T - 9), T)
    start, end = int(window[0]), int(window[1])
    if not (1 <= start <= end <= T):
        raise LqnetError(f"window {window} invalid for a {T}-period record")
    return (start, end)


def _params_of(treatment: Treatment | GameParams) -> GameParams:
    return treatment.params if isinstance(treatment, Treatment) else treatment


@lru_cache(maxsize=32)
def complete_equilibrium_average(params: GameParams) -> float:
    """Group-average equilibrium payoff on the complete network (the
    relative-efficiency denominator)."""
    complete = Network.complete(params.n)
    efforts = nash_efforts(params, complete).efforts
    return equilibrium_payoffs(params, complete, efforts).group_average


def efficiency_report(
    records: list[SessionRecord],
    treatment: Treatment | GameParams,
    window="full",
) -> EfficiencyReport:
    """Realized average effort and payoff, and their ratio to the
    complete-network equilibrium payoff."""
    params = _params_of(treatment)
    if not records:
        raise LqnetError("no records supplied")
    efforts = []
    payoffs = []
    resolved: Window | None = None
    for rec in records:
        start, end = resolve_window(window, rec.T)
        resolved = (start, end)
        efforts.append(rec.efforts[start - 1 : end].mean())
        payoffs.append(rec.payoffs[start - 1 : end, :, 4].mean())
    avg_effort = float(np.mean(efforts))
    avg_payoff = float(np.mean(payoffs))
    return EfficiencyReport(
        avg_effort=avg_effort,
        avg_payoff=avg_payoff,
        relative_efficiency=avg_payoff / complete_equilibrium_average(params),
        window=resolved,
    )


def frequency_report(
    records: list[SessionRecord],
    window="full",
    architectures=ARCHITECTURES,
) -> FrequencyReport:
    """Share of record-periods matching each architecture exactly and
    within two links."""
    if not records:
        raise LqnetError("no records supplied")
    exact = {a: 0 for a in architectures}
    near = {a: 0 for a in architectures}
    periods = 0
    resolved: Window | None = None
    for rec in records:
        start, end = resolve_window(window, rec.T)
        resolved = (start, end)
        for t in range(start, end + 1):
            net = rec.network_at(t)
            periods += 1
            for a in architectures:
                d = architecture_distance(net, a)
                exact[a] += d == 0
                near[a] += d <= 2
    return FrequencyReport(
        per_architecture={
            a: ArchitectureFrequency(exact=exact[a] / periods, within_two=near[a] / periods)
            for a in architectures
        },
        window=resolved,
    )


def link_diagnostics(record: SessionRecord, window="full") -> LinkDiagnostics:
    """Profitability of linking decisions at each period's realized efforts.

    A missing pair is profitable when its bilinear benefit exceeds the
    linking cost; an existing link is unprofitable for whoever sponsors it
    when the benefit falls short.  Per-agent counts average over agents
    and then over periods; shares are per-period ratios averaged over the
    periods where their denominator is positive.
    """
    params = record.params
    n = record.n
    start, end = resolve_window(window, record.T)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    prof_missing_counts = []
    prof_missing_shares = []
    unprof_existing_counts = []
    unprof_existing_shares = []
    reciprocated_shares = []
    for t in range(start - 1, end):
        x = record.efforts[t]
        adj = record.networks[t]
        m = record.intents[t]
        benefit = params.lam * np.outer(x, x) - params.kappa
        missing = upper & ~adj
        existing = upper & adj
        prof_missing = missing & (benefit > 0)
        prof_missing_counts.append(2 * prof_missing.sum() / n)
        if missing.sum() > 0:
            prof_missing_shares.append(prof_missing.sum() / missing.sum())
        unprof_sponsored = m & (benefit < 0)
        unprof_existing_counts.append(unprof_sponsored.sum() / n)
        if existing.sum() > 0:
            unprof_existing_shares.append(
                (existing & (benefit < 0)).sum() / existing.sum()
            )
            reciprocated_shares.append((m & m.T & upper).sum() / existing.sum())

    def _mean(values) -> float:
        return float(np.mean(values)) if values else 0.0

    return LinkDiagnostics(
        avg_profitable_missing=_mean(prof_missing_counts),
        profitable_missing_share=_mean(prof_missing_shares),
        avg_unprofitable_existing=_mean(unprof_existing_counts),
        unprofitable_existing_share=_mean(unprof_existing_shares),
        reciprocated_share=_mean(reciprocated_shares),
        window=(start, end),
    )


def _fit_rows(record: SessionRecord) -> tuple[np.ndarray, np.ndarray]:
    params = record.params
    rows = []
    targets = []
    for t in range(1, record.T):
        prev_adj = record.networks[t - 1]
        prev_x = record.efforts[t - 1]
        neighbor_sums = prev_adj @ prev_x
        non_neighbor_sums = prev_x.sum() - prev_x - neighbor_sums
        for i in range(record.n):
            rows.append(
                [
                    prev_x[i],
                    best_response_effort(params, float(neighbor_sums[i])),
                    non_neighbor_sums[i],
                ]
            )
            targets.append(record.efforts[t, i])
    return np.array(rows, dtype=float), np.array(targets, dtype=float)


def fit_effort_model(records: list[SessionRecord]) -> FitResult:
    """Pooled no-intercept least squares of effort on its three regressors.

    Regressors per agent-period: own lagged effort, the best response to
    neighbors' lagged efforts, and the summed lagged effort of
    non-neighbors.  Solved by the 3x3 normal equations.
    """
    if not records:
        raise LqnetError("no records supplied")
    blocks = [_fit_rows(rec) for rec in records if rec.T >= 2]
    if not blocks:
        raise LqnetError("records must span at least 2 periods to build lags")
    x = np.vstack([b[0] for b in blocks])
    y = np.concatenate([b[1] for b in blocks])
    if x.shape[0] < 3:
        raise LqnetError(
            f"need at least 3 agent-period observations, got {x.shape[0]} "
            "(records must span at least 2 periods)"
        )
    gram = x.T @ x
    if np.linalg.matrix_rank(gram, tol=1e-8 * max(1.0, float(np.trace(gram)))) < 3:
        raise RankDeficientDataError(
            "regressor matrix is rank deficient (e.g. frozen identical play)"
        )
    coef = np.linalg.solve(gram, x.T @ y)
    resid = y - x @ coef
    return FitResult(
        b0=float(coef[0]),
        b1=float(coef[1]),
        b2=float(coef[2]),
        residual_sum_squares=float(resid @ resid),
        observation_count=int(x.shape[0]),
    )


def treatment_summary(
    records: list[SessionRecord],
    treatment: Treatment | GameParams,
    window="full",
) -> TreatmentSummary:
    """Per-group means and standard deviations of network statistics,
    effort, payoff, relative efficiency, and the equilibrium-effort
    benchmark recomputed on each period's realized network.

    Standard deviations are population-style across periods within a
    group, and across group means in the overall row.
    """
    params = _params_of(treatment)
    if not records:
        raise LqnetError("no records supplied")
    denominator = complete_equilibrium_average(params)
    groups = []
    resolved: Window | None = None
    for rec in records:
        start, end = resolve_window(window, rec.T)
        resolved = (start, end)
        series: dict[str, list[float]] = {f: [] for f in SUMMARY_FIELDS}
        for t in range(start, end + 1):
            net = rec.network_at(t)
            st = stats(net)
            series["link_count"].append(st.link_count)
            series["link_fraction"].append(st.link_fraction)
            series["avg_degree"].append(st.avg_degree)
            series["min_degree"].append(st.min_degree)
            series["max_degree"].append(st.max_degree)
            series["clustering"].append(st.clustering)
            series["avg_effort"].append(float(rec.efforts[t - 1].mean()))
            series["avg_payoff"].append(float(rec.payoffs[t - 1, :, 4].mean()))
            series["relative_efficiency"].append(
                float(rec.payoffs[t - 1, :, 4].mean()) / denominator
            )
            series["nash_effort_on_network"].append(
                float(nash_efforts(params, net).efforts.efforts.mean())
            )
        groups.append(
            GroupSummary(
                session_id=rec.session_id,
                means={f: float(np.mean(v)) for f, v in series.items()},
                stds={f: float(np.std(v)) for f, v in series.items()},
            )
        )
    name = treatment.name if isinstance(treatment, Treatment) else "custom"
    return TreatmentSummary(
        treatment=name,
        window=resolved,
        per_group=groups,
        overall_means={
            f: float(np.mean([g.means[f] for g in groups])) for f in SUMMARY_FIELDS
        },
        overall_stds={
            f: float(np.std([g.means[f] for g in groups])) for f in SUMMARY_FIELDS
        },
    )
