"""Exact Nash verification and enumeration of equilibrium-supportable networks.

Verification enumerates, per agent, every subset of the other agents as a
candidate intent set.  Effort deviations need no grid: own payoff is
strictly concave in own effort, so the clipped best response dominates
every other effort at any intent set, making the joint effort-plus-link
deviation search exact.

Support checks fix efforts at the network's equilibrium values and search
sponsorship orientations (one sponsor per link): greedy warm starts
first, then backtracking over per-edge sponsor assignments constrained to
each agent's stable sponsor sets, under a hard node budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from . import kernels
from .equilibria import nash_efforts
from .errors import LqnetError, OrientationBudgetError
from .model import (
    EffortProfile,
    GameParams,
    IntentProfile,
    Network,
    StrategyProfile,
    best_response_effort,
)

#: payoff gains at or below this value count as non-improving
DEVIATION_TOL = 1e-9
ORIENTATION_BUDGET = 1 << 20
MAX_VERIFY_N = 16


@dataclass(frozen=True)
class Deviation:
    agent: int
    targets: tuple[int, ...]
    effort: float
    gain: float


@dataclass(frozen=True)
class DeviationReport:
    is_nash: bool
    worst_deviation: Deviation | None
    checked_deviations: int


@dataclass(frozen=True)
class NESupportReport:
    network: Network
    supportable: bool
    witness: StrategyProfile | None
    orientations_tried: int


def _row_masks(matrix: np.ndarray) -> np.ndarray:
    n = matrix.shape[0]
    weights = (np.int64(1) << np.arange(n, dtype=np.int64))
    return (matrix.astype(np.int64) * weights).sum(axis=1).astype(np.int64)


def _mask_to_targets(mask: int) -> tuple[int, ...]:
    out = []
    j = 0
    m = int(mask)
    while m:
        if m & 1:
            out.append(j)
        m >>= 1
        j += 1
    return tuple(out)


def verify_nash(
    params: GameParams, profile: StrategyProfile, backend: str | None = None
) -> DeviationReport:
    """Exhaustive unilateral-deviation check of a full strategy profile."""
    if profile.n != params.n:
        raise LqnetError(f"profile has n={profile.n}, params expect n={params.n}")
    if params.n > MAX_VERIFY_N:
        raise LqnetError(f"verification supports n <= {MAX_VERIFY_N}, got {params.n}")
    m = profile.intents.matrix
    own = _row_masks(m)
    incoming = _row_masks(m.T)
    best_gain, best_mask, best_effort, _ = kernels.deviation_scan(
        profile.efforts.efforts,
        incoming,
        own,
        params.theta,
        params.beta,
        params.lam,
        params.kappa,
        params.effort_min,
        params.effort_max,
        backend=backend,
    )
    agent = int(np.argmax(best_gain))
    gain = float(best_gain[agent])
    checked = params.n * (1 << (params.n - 1))
    if gain <= DEVIATION_TOL:
        return DeviationReport(is_nash=True, worst_deviation=None, checked_deviations=checked)
    dev = Deviation(
        agent=agent,
        targets=_mask_to_targets(int(best_mask[agent])),
        effort=float(best_effort[agent]),
        gain=gain,
    )
    return DeviationReport(is_nash=False, worst_deviation=dev, checked_deviations=checked)


def deviation_gain(
    params: GameParams, profile: StrategyProfile, agent: int, targets
) -> tuple[float, float]:
    """Gain and best-response effort for one specific intent-set deviation.

    The deviating agent switches its intents to ``targets`` and plays the
    best response to the resulting realized neighborhood (others fixed).
    """
    x = profile.efforts.efforts
    m = profile.intents.matrix
    target_set = set(int(t) for t in targets)
    if agent in target_set or not target_set <= set(range(params.n)) - {agent}:
        raise ValueError(f"invalid deviation targets {targets} for agent {agent}")
    incoming = set(np.nonzero(m[:, agent])[0].tolist())
    current_neighbors = incoming | set(np.nonzero(m[agent])[0].tolist())
    s_cur = float(x[sorted(current_neighbors)].sum()) if current_neighbors else 0.0
    x_i = float(x[agent])
    cur = (
        params.theta * x_i
        - 0.5 * params.beta * x_i**2
        + params.lam * x_i * s_cur
        - params.kappa * int(m[agent].sum())
    )
    realized = incoming | target_set
    s_dev = float(x[sorted(realized)].sum()) if realized else 0.0
    x_dev = best_response_effort(params, s_dev)
    dev = (
        params.theta * x_dev
        - 0.5 * params.beta * x_dev**2
        + params.lam * x_dev * s_dev
        - params.kappa * len(target_set)
    )
    return dev - cur, x_dev


# --------------------------------------------------------------------------
# sponsorship-orientation search
# --------------------------------------------------------------------------

def _orientation_intents(n: int, edges, sponsors) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    for (i, j), s in zip(edges, sponsors):
        other = j if s == i else i
        m[s, other] = True
    return m


def _br_payoff_vec(params: GameParams, neighbor_sums: np.ndarray) -> np.ndarray:
    x = np.clip(
        (params.theta + params.lam * neighbor_sums) / params.beta,
        params.effort_min,
        params.effort_max,
    )
    return params.theta * x - 0.5 * params.beta * x * x + params.lam * x * neighbor_sums


def _stable_sponsor_sets(
    params: GameParams, x: np.ndarray, network: Network
) -> list[np.ndarray] | None:
    """Per agent, every sponsored-neighbor set admitting no profitable deviation.

    With efforts fixed, an agent facing incoming links can deviate to any
    target set within (sponsored ∪ non-neighbors); since the best-response
    payoff is nondecreasing in the neighbor-effort total, the best m-target
    deviation takes the m highest-effort candidates, so prefix sums over
    the effort-sorted candidate pool are exact.  Returns one int64 array of
    stable sets per agent (as agent-id bitmasks), or None as soon as some
    agent has no stable set.
    """
    from .kernels import _subset_table

    adj = network.adjacency
    n = network.n
    families: list[np.ndarray] = []
    for i in range(n):
        nb = np.nonzero(adj[i])[0]
        others = np.array([j for j in range(n) if j != i], dtype=np.int64)
        order = others[np.lexsort((others, -x[others]))]
        x_ord = x[order]
        d = len(nb)
        table = _subset_table(d)
        s_sums = table @ x[nb] if d else np.zeros(1)
        counts = table.sum(axis=1)
        all_sum = float(x[nb].sum()) if d else 0.0
        inc = all_sum - s_sums
        member = np.broadcast_to(
            ~adj[i][order], (table.shape[0], len(order))
        ).copy()
        nb_col = {int(v): t for t, v in enumerate(nb)}
        for k, node in enumerate(order):
            t = nb_col.get(int(node))
            if t is not None:
                member[:, k] = table[:, t]
        prefix_sums = inc[:, None] + np.cumsum(np.where(member, x_ord, 0.0), axis=1)
        prefix_counts = np.cumsum(member, axis=1)
        dev = _br_payoff_vec(params, prefix_sums) - params.kappa * prefix_counts
        best = np.maximum(_br_payoff_vec(params, inc), dev.max(axis=1))
        current = float(_br_payoff_vec(params, np.array(all_sum))) - params.kappa * counts
        stable = current + DEVIATION_TOL >= best
        if not stable.any():
            return None
        weights = (np.int64(1) << nb.astype(np.int64)) if d else np.zeros(0, np.int64)
        families.append((table[stable].astype(np.int64) @ weights).astype(np.int64))
    return families


def _drop_all_prunes(params: GameParams, x: np.ndarray, intents: np.ndarray) -> bool:
    """True if some agent profits from withdrawing all its sponsorships."""
    adj = intents | intents.T
    s_all = adj @ x
    own_counts = intents.sum(axis=1)
    current = (
        params.theta * x
        - 0.5 * params.beta * x**2
        + params.lam * x * s_all
        - params.kappa * own_counts
    )
    s_keep = intents.T @ x  # incoming-only neighbor effort sums
    x_drop = np.clip(
        (params.theta + params.lam * s_keep) / params.beta,
        params.effort_min,
        params.effort_max,
    )
    dropped = (
        params.theta * x_drop
        - 0.5 * params.beta * x_drop**2
        + params.lam * x_drop * s_keep
    )
    return bool(np.any(dropped - current > DEVIATION_TOL))


def ne_supportable(
    params: GameParams,
    network: Network,
    backend: str | None = None,
    budget: int = ORIENTATION_BUDGET,
) -> NESupportReport:
    """Search for a sponsorship orientation making the network an equilibrium.

    Efforts are fixed at the network's equilibrium values.  Greedy warm
    starts (lower-degree endpoint sponsors; balanced assignment) are
    checked first, pruned by per-agent no-drop feasibility before the
    full deviation scan.  The remaining orientation space is searched by
    assigning each link a sponsor under per-agent stable-set constraints
    (exact, see `_stable_sponsor_sets`), so negative verdicts never need
    all 2**links orientations.  ``orientations_tried`` counts warm starts
    plus search-tree assignments; past ``budget`` the search raises
    instead of guessing.
    """
    from .equilibria import balanced_sponsorship

    x = nash_efforts(params, network, backend=backend).efforts.efforts
    n = network.n
    edges = network.edges()
    deg = network.degrees

    def check(sponsors) -> StrategyProfile | None:
        intents_m = _orientation_intents(n, edges, sponsors)
        if _drop_all_prunes(params, x, intents_m):
            return None
        profile = StrategyProfile(EffortProfile(x), IntentProfile(intents_m))
        if verify_nash(params, profile, backend=backend).is_nash:
            return profile
        return None

    tried = 0
    warm: list[tuple[int, ...]] = []
    if edges:
        warm.append(tuple(i if (deg[i], i) <= (deg[j], j) else j for i, j in edges))
        balanced = balanced_sponsorship(network).matrix
        warm.append(tuple(i if balanced[i, j] else j for i, j in edges))
    else:
        warm.append(())
    seen: set[tuple[int, ...]] = set()
    for sponsors in warm:
        if sponsors in seen:
            continue
        seen.add(sponsors)
        tried += 1
        witness = check(sponsors)
        if witness is not None:
            return NESupportReport(network, True, witness, tried)

    families = _stable_sponsor_sets(params, x, network)
    if families is None:
        return NESupportReport(network, False, None, tried)
    family_sizes = [np.bitwise_count(fam) for fam in families]

    sponsored = [0] * n
    refused = [0] * n

    def feasible(agent: int) -> bool:
        fam = families[agent]
        sp = sponsored[agent]
        return bool(np.any(((fam & sp) == sp) & ((fam & refused[agent]) == 0)))

    def max_additional(agent: int) -> int:
        """Most extra sponsorships this agent can still take on."""
        fam = families[agent]
        ok = ((fam & sponsored[agent]) == sponsored[agent]) & (
            (fam & refused[agent]) == 0
        )
        if not ok.any():
            return -1
        return int(family_sizes[agent][ok].max()) - int(
            bin(sponsored[agent]).count("1")
        )

    def capacity_ok(assigned: int) -> bool:
        remaining = len(edges) - assigned
        total = 0
        for agent in range(n):
            extra = max_additional(agent)
            if extra < 0:
                return False
            total += extra
        return total >= remaining

    nodes = 0

    def assignments(k: int):
        nonlocal nodes
        if k == len(edges):
            yield tuple(i if (sponsored[i] >> j) & 1 else j for i, j in edges)
            return
        i, j = edges[k]
        for sponsor in sorted((i, j), key=lambda v: (deg[v], v)):
            other = j if sponsor == i else i
            nodes += 1
            if nodes > budget:
                raise OrientationBudgetError(
                    f"orientation search exceeded its budget of {budget} "
                    f"assignments on a {len(edges)}-link network"
                )
            sponsored[sponsor] |= 1 << other
            refused[other] |= 1 << sponsor
            if feasible(sponsor) and feasible(other) and capacity_ok(k + 1):
                yield from assignments(k + 1)
            sponsored[sponsor] &= ~(1 << other)
            refused[other] &= ~(1 << sponsor)

    if not capacity_ok(0):
        return NESupportReport(network, False, None, tried)

    # every completed assignment gives each agent exactly one of its stable
    # sets, so the confirming scan can only fail on a float knife edge; the
    # generator then simply continues
    for sponsors in assignments(0):
        if sponsors in seen:
            continue
        seen.add(sponsors)
        witness = check(sponsors)
        if witness is not None:
            return NESupportReport(network, True, witness, tried + nodes)
    return NESupportReport(network, False, None, tried + nodes)


# --------------------------------------------------------------------------
# canonical forms and enumeration
# --------------------------------------------------------------------------

MAX_CANONICAL_N = 7


@lru_cache(maxsize=None)
def _canonical_bits(n: int, bits: int) -> int:
    pairs = list(combinations(range(n), 2))
    adj = np.zeros((n, n), dtype=bool)
    for idx, (i, j) in enumerate(pairs):
        if (bits >> idx) & 1:
            adj[i, j] = adj[j, i] = True
    best = None
    for perm in permutations(range(n)):
        acc = 0
        for idx, (i, j) in enumerate(pairs):
            if adj[perm[i], perm[j]]:
                acc |= 1 << idx
        if best is None or acc < best:
            best = acc
    return best


def _network_bits(network: Network) -> int:
    acc = 0
    for idx, (i, j) in enumerate(combinations(range(network.n), 2)):
        if network.adjacency[i, j]:
            acc |= 1 << idx
    return acc


def canonical_form(network: Network) -> int:
    """Isomorphism-invariant id: minimum edge bitstring over all relabelings."""
    if network.n > MAX_CANONICAL_N:
        raise LqnetError(
            f"canonical forms use brute-force permutation, feasible for n <= "
            f"{MAX_CANONICAL_N}; got {network.n}"
        )
    return _canonical_bits(network.n, _network_bits(network))


def graph_atlas(n: int) -> list[Network]:
    """All non-isomorphic undirected graphs on n nodes (n <= 5)."""
    if n > 5:
        raise LqnetError(f"full graph atlas supported for n <= 5, got {n}")
    pairs = list(combinations(range(n), 2))
    reps: dict[int, Network] = {}
    for bits in range(1 << len(pairs)):
        canon = _canonical_bits(n, bits)
        if canon not in reps:
            edges = [pairs[idx] for idx in range(len(pairs)) if (canon >> idx) & 1]
            reps[canon] = Network.from_edges(n, edges)
    return [reps[k] for k in sorted(reps, key=lambda c: (bin(c).count("1"), c))]


def enumerate_candidates(n: int) -> list[Network]:
    """Candidate networks for enumeration: the full atlas for n <= 5, else
    the named architectures."""
    if n <= 5:
        return graph_atlas(n)
    return [Network.empty(n), Network.star(n), Network.complete(n)]


def enumerate_ne_networks(
    params: GameParams,
    candidates: list[Network] | None = None,
    backend: str | None = None,
) -> list[NESupportReport]:
    """Support report per candidate network, deduplicated up to isomorphism.

    For n <= 5 the default candidate set is the complete non-isomorphic
    atlas; for larger groups it is empty/star/complete plus any supplied
    candidates.
    """
    base = enumerate_candidates(params.n)
    if candidates:
        base = base + list(candidates)
    unique: list[Network] = []
    seen_keys: set = set()
    for net in base:
        if net.n != params.n:
            raise LqnetError(f"candidate has n={net.n}, params expect n={params.n}")
        key = canonical_form(net) if params.n <= MAX_CANONICAL_N else _network_bits(net)
        if key in seen_keys:
            continue
        seen_keys.add(key)
        unique.append(net)
    return [ne_supportable(params, net, backend=backend) for net in unique]
