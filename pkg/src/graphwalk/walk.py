"""Discrete-time coined walk on the edges of a graph.

The state holds two amplitudes per edge, one per pole.  A step applies the
marking oracle, then the coin on every edge, then a scattering pass in which
each node diffuses the amplitudes facing it with the degree-d Grover operator
(2/d)J - I.  Searching runs the walk and samples the edge distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .graph import Graph, PolarityMap, check_polarity

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
MINUS_X = -PAULI_X


class CallCapExceededError(RuntimeError):
    """Raised when repeated sampling exceeds the oracle-call budget.

    Attributes:
        calls: Number of samples drawn before giving up.
    """

    def __init__(self, calls: int):
        super().__init__(f"no marked edge found after {calls} oracle calls")
        self.calls = calls


def _check_unitary(matrix: np.ndarray, what: str, tol: float = 1e-12) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {m.shape}")
    if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=tol):
        raise ValueError(f"{what} is not unitary within {tol}")
    return m


@dataclass(frozen=True, eq=False)
class CoinSpec:
    """A 2x2 unitary applied to the (+, -) amplitude pair of every edge."""

    matrix: np.ndarray = field(default_factory=lambda: PAULI_X.copy())

    def __post_init__(self):
        m = _check_unitary(self.matrix, "coin")
        if m.shape != (2, 2):
            raise ValueError(f"coin must be 2x2, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True, eq=False)
class OracleSpec:
    """Marked edges and the 2x2 unitary the step applies to each of them.

    The action runs before the coin and touches marked edges only.  The
    default is minus the pole swap: composed with the X coin that follows it
    leaves marked edges with a plain sign flip per step, the reflection the
    search amplifies.

    Attributes:
        marked: Edge indices carrying the mark.
        matrix: The 2x2 unitary applied to each marked edge's amplitude pair.
    """

    marked: frozenset[int] = frozenset()
    matrix: np.ndarray = field(default_factory=lambda: MINUS_X.copy())

    def __post_init__(self):
        object.__setattr__(self, "marked", frozenset(int(k) for k in self.marked))
        m = _check_unitary(self.matrix, "oracle action")
        if m.shape != (2, 2):
            raise ValueError(f"oracle action must be 2x2, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)


@dataclass
class WalkState:
    """Walk state: one complex amplitude per (edge, pole) pair.

    Attributes:
        psi: Array of shape (n_edges, 2); column 0 is the + pole, column 1
            the - pole.
        t: Number of steps taken.
    """

    psi: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.ndim != 2 or self.psi.shape[1] != 2:
            raise ValueError(f"state must have shape (n_edges, 2), got {self.psi.shape}")

    @property
    def n_edges(self) -> int:
        return self.psi.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def copy(self) -> "WalkState":
        return WalkState(self.psi.copy(), self.t)


def diagonal_state(g: Graph) -> WalkState:
    """Uniform superposition over all (edge, pole) pairs, the search start."""
    if g.n_edges == 0:
        raise ValueError("graph has no edges to walk on")
    psi = np.full((g.n_edges, 2), 1.0 / np.sqrt(2 * g.n_edges), dtype=complex)
    return WalkState(psi, t=0)


@dataclass(frozen=True)
class DiffusionOperator:
    """Grover diffusion (2/d)J - I on d amplitudes."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"diffusion dimension must be positive, got {self.dim}")

    @property
    def matrix(self) -> np.ndarray:
        d = self.dim
        return (2.0 / d) * np.ones((d, d)) - np.eye(d)


def apply_oracle(state: WalkState, oracle: OracleSpec) -> WalkState:
    """Apply the oracle action to every marked edge, in place, and return it."""
    if oracle.marked:
        idx = np.fromiter(oracle.marked, dtype=int)
        if idx.min() < 0 or idx.max() >= state.n_edges:
            raise ValueError(
                f"marked edge index out of range for {state.n_edges} edges"
            )
        state.psi[idx] = state.psi[idx] @ oracle.matrix.T
    return state


def apply_coin(state: WalkState, coin: CoinSpec) -> WalkState:
    """Apply the coin to the amplitude pair of every edge, in place."""
    state.psi = state.psi @ coin.matrix.T
    return state


@lru_cache(maxsize=64)
def _scatter_plan(g: Graph, p: PolarityMap):
    """Precompute flat gather/scatter indexing for the per-node diffusions.

    Incident amplitudes are gathered node by node into one flat vector;
    segment sums then give each node's diffusion via y_i = (2/d) * sum - x_i.
    """
    check_polarity(g, p)
    edge_idx: list[int] = []
    comp_idx: list[int] = []
    seg_starts: list[int] = []
    degrees: list[int] = []
    pos = 0
    for u in range(g.n):
        if not g.adjacency[u]:
            continue
        seg_starts.append(pos)
        degrees.append(len(g.adjacency[u]))
        for _, k in g.adjacency[u]:
            edge_idx.append(k)
            comp_idx.append(p.component_at(k, u))
            pos += 1
    return (
        np.array(edge_idx, dtype=np.intp),
        np.array(comp_idx, dtype=np.intp),
        np.array(seg_starts, dtype=np.intp),
        np.array(degrees, dtype=np.intp),
    )


def apply_scattering(state: WalkState, g: Graph, p: PolarityMap) -> WalkState:
    """Diffuse, at every node, the amplitudes of incident edges facing it.

    Each (edge, pole) amplitude faces exactly one node, so the per-node
    blocks partition the state and the whole pass costs O(sum of degrees).
    """
    if state.n_edges != g.n_edges:
        raise ValueError(
            f"state has {state.n_edges} edges, graph has {g.n_edges}"
        )
    edge_idx, comp_idx, seg_starts, degrees = _scatter_plan(g, p)
    x = state.psi[edge_idx, comp_idx]
    sums = np.add.reduceat(x, seg_starts)
    state.psi[edge_idx, comp_idx] = np.repeat(sums * (2.0 / degrees), degrees) - x
    return state


def step(
    state: WalkState,
    g: Graph,
    p: PolarityMap,
    coin: CoinSpec | None = None,
    oracle: OracleSpec | None = None,
) -> WalkState:
    """Advance one step: oracle, then coin, then scattering.  In place."""
    if oracle is not None:
        apply_oracle(state, oracle)
    apply_coin(state, coin if coin is not None else CoinSpec())
    apply_scattering(state, g, p)
    state.t += 1
    return state


def edge_probabilities(state: WalkState) -> np.ndarray:
    """Per-edge measurement probabilities |psi+|^2 + |psi-|^2.

    Raises:
        ValueError: If the state norm has drifted from 1 by more than 1e-9.
    """
    probs = np.abs(state.psi[:, 0]) ** 2 + np.abs(state.psi[:, 1]) ** 2
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"state norm drifted: total probability {total!r}")
    return probs


def _sample_edge(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF sample of an edge index from a probability vector."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(probs) - 1))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def evolve(
    g: Graph,
    p: PolarityMap,
    oracle: OracleSpec | None,
    steps: int,
    coin: CoinSpec | None = None,
) -> WalkState:
    """Run `steps` steps from the uniform superposition and return the state."""
    if steps < 0:
        raise ValueError(f"step count must be nonnegative, got {steps}")
    state = diagonal_state(g)
    for _ in range(steps):
        step(state, g, p, coin=coin, oracle=oracle)
    return state


def search(
    g: Graph,
    p: PolarityMap,
    oracle: OracleSpec,
    steps: int,
    seed=None,
    coin: CoinSpec | None = None,
) -> int:
    """Run the walk for `steps` steps and measure one edge.

    Returns:
        The sampled edge index (not necessarily a marked one).
    """
    if not oracle.marked:
        raise ValueError("search needs at least one marked edge")
    state = evolve(g, p, oracle, steps, coin=coin)
    return _sample_edge(edge_probabilities(state), _as_rng(seed))


def guaranteed_search(
    g: Graph,
    p: PolarityMap,
    oracle: OracleSpec,
    steps: int,
    seed=None,
    coin: CoinSpec | None = None,
    max_calls: int = 1_000_000,
) -> tuple[int, int]:
    """Sample repeatedly until a marked edge comes up.

    The final distribution is computed once; each draw models one
    run-and-measure round followed by an oracle check of the outcome.

    Returns:
        (edge, calls): the marked edge found and the number of draws used.

    Raises:
        CallCapExceededError: After `max_calls` unsuccessful draws.
    """
    if not oracle.marked:
        raise ValueError("search needs at least one marked edge")
    if max_calls < 1:
        raise ValueError(f"call cap must be positive, got {max_calls}")
    state = evolve(g, p, oracle, steps, coin=coin)
    probs = edge_probabilities(state)
    rng = _as_rng(seed)
    for calls in range(1, max_calls + 1):
        edge = _sample_edge(probs, rng)
        if edge in oracle.marked:
            return edge, calls
    raise CallCapExceededError(max_calls)


@dataclass(frozen=True)
class SweepReport:
    """Marked-edge probability as a function of step count.

    Attributes:
        probs: p_marked at t = 0..t_max inclusive.
        t_star: Smallest t maximizing probs.
        p_star: probs[t_star].
        n_nodes / n_edges / marked / t_max: Run metadata.
        predicted_t: Analytic peak-time estimate, when one is known.
    """

    probs: tuple[float, ...]
    t_star: int
    p_star: float
    n_nodes: int
    n_edges: int
    marked: tuple[int, ...]
    t_max: int
    predicted_t: float | None = None

    def to_csv(self) -> str:
        """Serialize as CSV, one row per step."""
        if self.predicted_t is None:
            lines = ["t,p_marked"]
            lines += [f"{t},{p!r}" for t, p in enumerate(self.probs)]
        else:
            lines = ["t,p_marked,predicted_T"]
            lines += [
                f"{t},{p!r},{self.predicted_t!r}" for t, p in enumerate(self.probs)
            ]
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        out = {
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "marked": list(self.marked),
            "t_max": self.t_max,
            "t_star": self.t_star,
            "p_star": self.p_star,
            "p_t": list(self.probs),
        }
        if self.predicted_t is not None:
            out["predicted_T"] = self.predicted_t
        return out


def sweep(
    g: Graph,
    p: PolarityMap,
    oracle: OracleSpec,
    t_max: int,
    coin: CoinSpec | None = None,
    predicted_t: float | None = None,
) -> SweepReport:
    """Record the marked-edge probability at every t in 0..t_max.

    The walk starts in the uniform superposition; ties for the maximum go to
    the smallest t.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    marked = tuple(sorted(oracle.marked))
    state = diagonal_state(g)
    probs = []
    for _ in range(t_max + 1):
        dist = edge_probabilities(state)
        probs.append(float(dist[list(marked)].sum()) if marked else 0.0)
        step(state, g, p, coin=coin, oracle=oracle)
    t_star = int(np.argmax(probs))
    return SweepReport(
        probs=tuple(probs),
        t_star=t_star,
        p_star=probs[t_star],
        n_nodes=g.n,
        n_edges=g.n_edges,
        marked=marked,
        t_max=t_max,
        predicted_t=predicted_t,
    )


def step_matrix(
    g: Graph,
    p: PolarityMap,
    coin: CoinSpec | None = None,
    oracle: OracleSpec | None = None,
) -> np.ndarray:
    """Dense matrix of one step on the 2|E| amplitudes.

    Basis order: amplitude (edge k, pole c) sits at index 2k + c.  Useful for
    spectra and for checking compiled circuits against the model.
    """
    dim = 2 * g.n_edges
    mat = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        state = WalkState(np.zeros((g.n_edges, 2), dtype=complex))
        state.psi[j // 2, j % 2] = 1.0
        step(state, g, p, coin=coin, oracle=oracle)
        mat[:, j] = state.psi.reshape(-1)
    return mat
