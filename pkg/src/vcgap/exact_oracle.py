"""Ground-truth minimum vertex cover for desk-scale instances.

Branch and bound with degree-one folding, a greedy-matching lower bound, and
max-degree branching; an explicit node budget turns oversized searches into
an "unknown" result instead of a wrong number. A subset-enumeration mode
doubles as an independent check for small graphs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .bipartite_vc import maximal_matching_cover
from .errors import ArgumentError
from .graph_core import CoverPartition, Graph, verify_cover

STATUS_OPTIMAL = "optimal"
STATUS_UNKNOWN = "unknown"


@dataclass(frozen=True)
class ExactResult:
    status: str
    size: int | None
    cover: CoverPartition | None
    nodes_explored: int


class _Budget(Exception):
    pass


def exact_vc(g: Graph, budget: int = 1_000_000) -> ExactResult:
    """Provably minimum vertex cover, or an explicit unknown when the node
    budget runs out."""
    adj = {v: set(ns) for v, ns in g.adjacency.items()}
    start = maximal_matching_cover(g)
    best = [len(start.in_cover), set(start.in_cover)]
    counter = [0]

    def matching_bound(a: dict[int, set[int]]) -> int:
        used: set[int] = set()
        size = 0
        for u in sorted(a):
            if u in used:
                continue
            for w in sorted(a[u]):
                if w not in used:
                    used.add(u)
                    used.add(w)
                    size += 1
                    break
        return size

    def remove_vertex(a: dict[int, set[int]], v: int) -> None:
        for w in a.pop(v):
            a[w].discard(v)

    def search(a: dict[int, set[int]], chosen: set[int]) -> None:
        counter[0] += 1
        if counter[0] > budget:
            raise _Budget()
        a = {v: set(ns) for v, ns in a.items()}
        chosen = set(chosen)
        # reductions: drop isolated vertices, fold degree-one vertices
        changed = True
        while changed:
            changed = False
            for v in sorted(a):
                if v not in a:
                    continue
                if not a[v]:
                    del a[v]
                    changed = True
                elif len(a[v]) == 1:
                    w = next(iter(a[v]))
                    chosen.add(w)
                    remove_vertex(a, w)
                    if v in a and not a[v]:
                        del a[v]
                    changed = True
        if not a:
            if len(chosen) < best[0]:
                best[0] = len(chosen)
                best[1] = chosen
            return
        if len(chosen) + matching_bound(a) >= best[0]:
            return
        v = max(sorted(a), key=lambda u: len(a[u]))
        # branch: v in the cover
        a1 = {u: set(ns) for u, ns in a.items()}
        remove_vertex(a1, v)
        search(a1, chosen | {v})
        # branch: v out, so all its neighbors are in
        ns = sorted(a[v])
        a2 = {u: set(ns2) for u, ns2 in a.items()}
        for w in ns:
            remove_vertex(a2, w)
        search(a2, chosen | set(ns))

    try:
        search(adj, set())
    except _Budget:
        return ExactResult(STATUS_UNKNOWN, None, None, counter[0])
    partition = CoverPartition.from_cover(g, best[1])
    ok, uncovered = verify_cover(g, partition)
    assert ok, f"oracle produced an infeasible cover: {uncovered[:5]}"
    return ExactResult(STATUS_OPTIMAL, best[0], partition, counter[0])


def exact_vc_enumerate(g: Graph, limit_n: int = 22) -> ExactResult:
    """Subset enumeration by increasing size; independent of the search above."""
    if g.n > limit_n:
        raise ArgumentError(f"enumeration limited to n <= {limit_n}, got {g.n}")
    verts = g.vertices
    for size in range(g.n + 1):
        for subset in itertools.combinations(verts, size):
            partition = CoverPartition.from_cover(g, subset)
            ok, _ = verify_cover(g, partition)
            if ok:
                return ExactResult(STATUS_OPTIMAL, size, partition, 0)
    raise AssertionError("unreachable: the full vertex set always covers")


@dataclass(frozen=True)
class GapReport:
    """Relaxation values against the exact optimum."""

    z_lp: float
    z_sdp: float
    z_exact: int
    gap_lp: float
    gap_sdp: float

    def to_dict(self) -> dict:
        return {
            "z_lp": self.z_lp,
            "z_sdp": self.z_sdp,
            "z_exact": self.z_exact,
            "gap_lp": self.gap_lp,
            "gap_sdp": self.gap_sdp,
        }


def lp_gap_report(g: Graph, budget: int = 1_000_000, sdp_cfg=None) -> GapReport:
    """Solve the relaxations and the exact problem, report integrality gaps.

    Gaps for edgeless graphs (all values zero) are defined as 1.0.
    """
    from .lp_relax import build_vc_lp, simplex_solve
    from .sdp_solve import SolverConfig, admm_solve, build_sdp_single

    lp = simplex_solve(build_vc_lp(g))
    sdp = admm_solve(build_sdp_single(g), sdp_cfg or SolverConfig())
    exact = exact_vc(g, budget)
    if exact.status != STATUS_OPTIMAL:
        raise ArgumentError(f"oracle exhausted its budget on n={g.n}; raise the budget")
    z_lp = lp.objective_value
    z_sdp = sdp.objective_value
    # relaxation values below solver noise count as zero
    gap_lp = exact.size / z_lp if z_lp > 1e-6 else 1.0
    gap_sdp = exact.size / z_sdp if z_sdp > 1e-6 else 1.0
    return GapReport(z_lp, z_sdp, exact.size, gap_lp, gap_sdp)
