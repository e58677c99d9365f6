"""Exact numerical analysis of concrete chains.

Graph precomputation (SCC/BSCC decomposition, qualitative reachability)
followed by linear solving.  Probability-0 and probability-1 state sets are
always classified by graph analysis, never by numeric thresholding; the
linear systems that remain are nonsingular by construction.

Systems up to :data:`DIRECT_SOLVE_MAX_STATES` states go through a direct
sparse LU factorization (Gaussian elimination with partial pivoting); larger
systems fall back to damped fixed-point iteration driven to a residual of
:data:`RESIDUAL_TOL`.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dtmc import ConcreteDtmc, RewardStructure
from .errors import SolverFailure

DIRECT_SOLVE_MAX_STATES = 5000
RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 10**6


# ---------------------------------------------------------------------------
# Graph structure
# ---------------------------------------------------------------------------

def _successor_lists(matrix: sp.csr_matrix) -> list[np.ndarray]:
    m = matrix.tocsr()
    return [m.indices[m.indptr[s]:m.indptr[s + 1]] for s in range(m.shape[0])]


def _predecessor_lists(matrix: sp.csr_matrix) -> list[np.ndarray]:
    return _successor_lists(matrix.T.tocsr())


def strongly_connected_components(successors: list, n: int) -> list[list[int]]:
    """Iterative Tarjan over adjacency lists; components in reverse topological order."""
    preorder: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    assigned: set[int] = set()
    scc_stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if root in preorder:
            continue
        stack = [root]
        while stack:
            v = stack[-1]
            if v not in preorder:
                preorder[v] = counter
                counter += 1
            descend = False
            for w in successors[v]:
                if w not in preorder:
                    stack.append(int(w))
                    descend = True
                    break
            if descend:
                continue
            lowlink[v] = preorder[v]
            for w in successors[v]:
                w = int(w)
                if w in assigned:
                    continue
                if preorder[w] > preorder[v]:
                    lowlink[v] = min(lowlink[v], lowlink[w])
                else:
                    lowlink[v] = min(lowlink[v], preorder[w])
            stack.pop()
            if lowlink[v] == preorder[v]:
                comp = [v]
                assigned.add(v)
                while scc_stack and preorder[scc_stack[-1]] > preorder[v]:
                    u = scc_stack.pop()
                    assigned.add(u)
                    comp.append(u)
                components.append(comp)
            else:
                scc_stack.append(v)
    return components


def bscc_decomposition(chain: ConcreteDtmc) -> list[frozenset[int]]:
    """Bottom strongly connected components: the recurrent classes of the chain.

    A component is bottom iff no edge leaves it.  Components are returned
    ordered by their smallest state index.
    """
    succ = _successor_lists(chain.matrix)
    sccs = strongly_connected_components(succ, chain.n_states)
    bsccs = []
    for comp in sccs:
        members = set(comp)
        if all(int(t) in members for s in comp for t in succ[s]):
            bsccs.append(frozenset(members))
    bsccs.sort(key=min)
    return bsccs


def _backward_closure(pred: list, seeds, passable) -> set[int]:
    """States that can reach ``seeds`` through ``passable`` intermediate states.

    Seeds are included unconditionally; every other state added lies in
    ``passable`` and has an edge into the growing set.
    """
    reached = set(seeds)
    queue = deque(reached)
    while queue:
        s = queue.popleft()
        for p in pred[s]:
            p = int(p)
            if p not in reached and p in passable:
                reached.add(p)
                queue.append(p)
    return reached


def prob01_until(chain: ConcreteDtmc, avoid: frozenset[int], target: frozenset[int]):
    """Qualitative analysis for constrained reachability.

    Returns ``(no, yes)``: the states from which the target is unreachable
    without entering ``avoid``, and the states that reach it almost surely.
    States in both input sets count as target.
    """
    n = chain.n_states
    avoid = frozenset(avoid) - frozenset(target)
    target = frozenset(target)
    pred = _predecessor_lists(chain.matrix)

    allowed = set(range(n)) - avoid
    can_reach = _backward_closure(pred, target, allowed)
    no = frozenset(set(range(n)) - can_reach)

    transient_allowed = allowed - target
    less_than_one = _backward_closure(pred, no, transient_allowed)
    yes = frozenset(set(range(n)) - less_than_one)
    return no, yes


# ---------------------------------------------------------------------------
# Linear solving
# ---------------------------------------------------------------------------

def _solve_direct(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    try:
        x = spla.spsolve(A.tocsc(), b)
    except Exception as exc:  # singular factorization
        raise SolverFailure(f"direct solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverFailure("direct solve produced non-finite values")
    return np.atleast_1d(x)


def _solve_fixed_point(A: sp.csr_matrix, b: np.ndarray, damping: float = 1.0) -> np.ndarray:
    """Solve x = A x + b by (damped) iteration; requires spectral radius < 1."""
    x = b.copy()
    for _ in range(MAX_ITERATIONS):
        nxt = A @ x + b
        if damping != 1.0:
            nxt = damping * nxt + (1.0 - damping) * x
        if np.max(np.abs(nxt - x), initial=0.0) <= RESIDUAL_TOL:
            return nxt
        x = nxt
    raise SolverFailure(f"fixed-point iteration did not reach residual {RESIDUAL_TOL}")


def _solve_reach_system(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """Solve (I - A) x = b for substochastic A."""
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    if n <= DIRECT_SOLVE_MAX_STATES:
        return _solve_direct(sp.identity(n, format="csr") - A, b)
    return _solve_fixed_point(A, b)


def reach_probability(chain: ConcreteDtmc, avoid, target) -> np.ndarray:
    """Probability, per state, of reaching ``target`` without entering ``avoid``.

    Avoid and target states are made absorbing, probability-0/1 states are
    identified by graph analysis, and the linear system ``x = P x`` is solved
    on the remaining states only.
    """
    n = chain.n_states
    target = frozenset(target)
    avoid = frozenset(avoid) - target
    no, yes = prob01_until(chain, avoid, target)

    x = np.zeros(n)
    for s in yes:
        x[s] = 1.0
    unknown = sorted(set(range(n)) - set(no) - set(yes))
    if unknown:
        idx = np.array(unknown)
        yes_idx = np.array(sorted(yes)) if yes else np.zeros(0, dtype=int)
        P = chain.matrix
        A = P[idx][:, idx]
        b = np.asarray(P[idx][:, yes_idx].sum(axis=1)).ravel() if len(yes_idx) else np.zeros(len(idx))
        x[idx] = _solve_reach_system(A.tocsr(), b)
    return np.clip(x, 0.0, 1.0)


def expected_total_reward(chain: ConcreteDtmc, reward, target, from_state: int | None = None) -> float:
    """Expected reward accumulated from ``from_state`` until first entering ``target``.

    Follows the reachability-reward convention: states that do not reach the
    target almost surely get ``+inf``; target states contribute 0 and
    accumulate nothing.
    """
    rs = chain.reward(reward) if isinstance(reward, str) else reward
    s0 = chain.initial if from_state is None else from_state
    target = frozenset(target)
    if s0 in target:
        return 0.0

    _, yes = prob01_until(chain, frozenset(), target)
    if s0 not in yes:
        return float("inf")

    interior = sorted(yes - target)
    n = chain.n_states
    state_r = rs.state_vector(n)
    P = chain.matrix
    # One-step expected reward: state reward plus transition rewards out of s.
    rho = state_r.copy()
    for (s, t), r in rs.transition_rewards.items():
        rho[s] += P[s, t] * r

    idx = np.array(interior)
    A = P[idx][:, idx].tocsr()
    x = _solve_reach_system(A, rho[idx])
    values = np.zeros(n)
    values[idx] = x
    return float(values[s0])


def stationary_distribution(chain_or_matrix) -> np.ndarray:
    """Stationary distribution of an irreducible chain: pi P = pi, sum(pi) = 1.

    One balance equation is replaced by the normalization constraint.  The
    argument may be a :class:`ConcreteDtmc` or a row-stochastic matrix.
    """
    if isinstance(chain_or_matrix, ConcreteDtmc):
        matrix = chain_or_matrix.matrix
    else:
        matrix = sp.csr_matrix(chain_or_matrix)
    n = matrix.shape[0]
    if n == 1:
        return np.ones(1)
    sccs = strongly_connected_components(_successor_lists(matrix), n)
    if len(sccs) != 1:
        raise SolverFailure("stationary distribution requested for a reducible matrix")

    if n <= DIRECT_SOLVE_MAX_STATES:
        A = (matrix.T - sp.identity(n)).tolil()
        A[n - 1, :] = np.ones(n)
        b = np.zeros(n)
        b[n - 1] = 1.0
        pi = _solve_direct(A.tocsr(), b)
    else:
        # Damped power iteration; damping breaks periodicity.
        pi = np.full(n, 1.0 / n)
        PT = matrix.T.tocsr()
        for _ in range(MAX_ITERATIONS):
            nxt = 0.5 * (PT @ pi) + 0.5 * pi
            if np.max(np.abs(nxt - pi)) <= RESIDUAL_TOL:
                pi = nxt
                break
            pi = nxt
        else:
            raise SolverFailure(f"power iteration did not reach residual {RESIDUAL_TOL}")
    pi = np.maximum(pi, 0.0)
    total = pi.sum()
    if total <= 0:
        raise SolverFailure("stationary solve produced a zero vector")
    return pi / total


def steady_state(chain: ConcreteDtmc, from_state: int | None = None) -> np.ndarray:
    """Long-run distribution over all states, started from ``from_state``.

    Mixes each recurrent class's stationary distribution by the probability
    of being absorbed into it; transient states receive 0.
    """
    s0 = chain.initial if from_state is None else from_state
    result = np.zeros(chain.n_states)
    for bscc in bscc_decomposition(chain):
        weight = float(reach_probability(chain, frozenset(), bscc)[s0])
        if weight == 0.0:
            continue
        members = sorted(bscc)
        idx = np.array(members)
        sub = chain.matrix[idx][:, idx]
        pi = stationary_distribution(sub)
        for local, s in enumerate(members):
            result[s] += weight * pi[local]
    return result


def long_run_average_reward(chain: ConcreteDtmc, reward, from_state: int | None = None) -> float:
    """Long-run average reward per step: steady-state weighted state and transition rewards."""
    rs = chain.reward(reward) if isinstance(reward, str) else reward
    ss = steady_state(chain, from_state)
    value = float(ss @ rs.state_vector(chain.n_states))
    P = chain.matrix
    for (s, t), r in rs.transition_rewards.items():
        value += float(ss[s]) * float(P[s, t]) * r
    return value


def next_probability(chain: ConcreteDtmc, from_state: int, target) -> float:
    """One-step probability of landing in ``target`` from ``from_state``."""
    row = chain.matrix.getrow(from_state)
    target = frozenset(target)
    return float(sum(v for t, v in zip(row.indices, row.data) if int(t) in target))
