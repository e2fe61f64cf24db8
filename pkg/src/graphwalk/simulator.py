"""Sparse state-vector simulation of compiled walk circuits.

Walk circuits act on a single excitation shared by the edge qubits, so of the
2^n basis states only O(edges) ever carry amplitude.  States are dicts from
basis index to amplitude; qubit 0 is the leftmost bit of the basis label.
Projecting back onto the walk's edge amplitudes checks that nothing leaked
out of the one-excitation subspace and that every register returned to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import walk
from .compiler import Circuit, Gate, Instruction, QubitLayout, compile_step
from .walk import WalkState

PRUNE_EPS = 1e-15
GATE_NORM_TOL = 1e-13
CIRCUIT_NORM_TOL = 1e-12


class SimulationError(RuntimeError):
    """Raised when a circuit run violates a runtime invariant."""


class SubspaceLeakageError(SimulationError):
    """Raised when amplitude leaves the single-excitation walk subspace.

    Attributes:
        leaked: Total probability weight outside the subspace.
    """

    def __init__(self, leaked: float):
        super().__init__(
            f"probability weight {leaked:.3e} left the walk subspace"
        )
        self.leaked = leaked


@dataclass
class SparseState:
    """Amplitudes over computational basis states, keyed by basis index.

    Attributes:
        amps: Map from basis index to complex amplitude.
        n_qubits: Width of the register; qubit q is bit (n_qubits - 1 - q)
            of the key, so basis labels read left to right as qubit 0, 1, ...
    """

    amps: dict[int, complex]
    n_qubits: int

    def mask(self, q: int) -> int:
        if not 0 <= q < self.n_qubits:
            raise SimulationError(f"qubit {q} outside register of {self.n_qubits}")
        return 1 << (self.n_qubits - 1 - q)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))

    def basis_label(self, key: int) -> str:
        return format(key, f"0{self.n_qubits}b")

    def to_json_list(self) -> list[dict]:
        """Dump as a list of {basis, re, im} entries sorted by basis string."""
        return [
            {"basis": self.basis_label(k), "re": float(a.real), "im": float(a.imag)}
            for k, a in sorted(self.amps.items())
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_json_list(), indent=2) + "\n"


def init_walk_superposition(layout: QubitLayout) -> SparseState:
    """Uniform single-excitation state over all edge qubits, registers zero."""
    n = layout.n_qubits
    amp = 1.0 / np.sqrt(2 * layout.n_edges)
    amps: dict[int, complex] = {}
    for plus, minus in layout.edge_qubits:
        amps[1 << (n - 1 - plus)] = complex(amp)
        amps[1 << (n - 1 - minus)] = complex(amp)
    return SparseState(amps, n)


def apply_instruction(state: SparseState, ins: Instruction) -> SparseState:
    """Apply one gate, returning a new pruned state.

    Raises:
        SimulationError: If the squared norm drifts by more than 1e-13.
    """
    n = state.n_qubits
    before = state.norm_sq()
    tmask = [state.mask(q) for q in ins.targets]
    cmask = 0
    for q in ins.controls:
        cmask |= state.mask(q)
    out: dict[int, complex] = {}
    if ins.gate is Gate.X:
        m = tmask[0]
        out = {k ^ m: a for k, a in state.amps.items()}
    elif ins.gate is Gate.Z:
        m = tmask[0]
        out = {k: (-a if k & m else a) for k, a in state.amps.items()}
    elif ins.gate is Gate.CNOT:
        m = tmask[0]
        out = {(k ^ m if k & cmask else k): a for k, a in state.amps.items()}
    elif ins.gate is Gate.SWAP:
        ma, mb = tmask
        both = ma | mb
        out = {
            (k ^ both if bool(k & ma) != bool(k & mb) else k): a
            for k, a in state.amps.items()
        }
    elif ins.gate is Gate.MCX:
        m = tmask[0]
        out = {
            (k ^ m if k & cmask == cmask else k): a for k, a in state.amps.items()
        }
    elif ins.gate is Gate.CTRL_UNITARY:
        all_t = 0
        for m in tmask:
            all_t |= m
        u = ins.matrix
        for k, a in state.amps.items():
            if k & cmask != cmask:
                out[k] = out.get(k, 0j) + a
                continue
            val = 0
            for i, m in enumerate(tmask):
                if k & m:
                    val |= 1 << i
            base = k & ~all_t
            col = u[:, val]
            for new_val in np.nonzero(np.abs(col) > PRUNE_EPS)[0]:
                nk = base
                for i, m in enumerate(tmask):
                    if new_val >> i & 1:
                        nk |= m
                out[nk] = out.get(nk, 0j) + col[new_val] * a
    else:
        raise SimulationError(f"unknown gate {ins.gate!r}")
    out = {k: a for k, a in out.items() if abs(a) > PRUNE_EPS}
    result = SparseState(out, n)
    after = result.norm_sq()
    if abs(after - before) > GATE_NORM_TOL * max(1.0, before):
        raise SimulationError(
            f"gate {ins.gate.value} changed the squared norm by {after - before:.3e}"
        )
    return result


def run(circuit: Circuit, state: SparseState | None = None) -> SparseState:
    """Run all instructions, starting from the walk superposition by default.

    Raises:
        SimulationError: If the squared norm drifts by more than 1e-12 over
            the whole circuit, or any single gate breaks unitarity.
    """
    if state is None:
        state = init_walk_superposition(circuit.layout)
    if state.n_qubits != circuit.n_qubits:
        raise SimulationError(
            f"state has {state.n_qubits} qubits, circuit expects {circuit.n_qubits}"
        )
    before = state.norm_sq()
    for ins in circuit.instructions:
        state = apply_instruction(state, ins)
    after = state.norm_sq()
    if abs(after - before) > CIRCUIT_NORM_TOL * max(1.0, before):
        raise SimulationError(
            f"circuit changed the squared norm by {after - before:.3e}"
        )
    return state


def _project(state: SparseState, layout: QubitLayout) -> tuple[np.ndarray, float]:
    """Split a state into walk amplitudes and leaked weight."""
    n = state.n_qubits
    onehot: dict[int, tuple[int, int]] = {}
    for e, (plus, minus) in enumerate(layout.edge_qubits):
        onehot[1 << (n - 1 - plus)] = (e, 0)
        onehot[1 << (n - 1 - minus)] = (e, 1)
    psi = np.zeros((layout.n_edges, 2), dtype=complex)
    leaked = 0.0
    for k, a in state.amps.items():
        slot = onehot.get(k)
        if slot is None:
            leaked += abs(a) ** 2
        else:
            psi[slot] = a
    return psi, leaked


def project_to_walk_state(
    state: SparseState, layout: QubitLayout, tol: float = 1e-10
) -> WalkState:
    """Read the walk amplitudes back out of a circuit state.

    Raises:
        SubspaceLeakageError: If more than `tol` probability weight sits on
            basis states that are not a single excitation of an edge qubit
            (registers not restored, or multiple excitations).
    """
    psi, leaked = _project(state, layout)
    if leaked > tol:
        raise SubspaceLeakageError(leaked)
    return WalkState(psi)


def measure_edge(state: SparseState, layout: QubitLayout, seed=None) -> int:
    """Sample one edge from a circuit state's edge distribution."""
    walk_state = project_to_walk_state(state, layout)
    probs = np.abs(walk_state.psi[:, 0]) ** 2 + np.abs(walk_state.psi[:, 1]) ** 2
    total = float(probs.sum())
    if total <= 0.0:
        raise SimulationError("no probability weight on the edge qubits")
    return walk._sample_edge(probs, walk._as_rng(seed))


def step_circuit_matrix(circuit: Circuit) -> tuple[np.ndarray, float]:
    """Dense action of the circuit on the 2|E| walk amplitudes.

    Runs the circuit on each single-excitation basis state and projects the
    result; basis order matches walk.step_matrix (edge k's poles at rows
    2k and 2k+1).

    Returns:
        (matrix, max_leakage): the matrix and the worst per-column weight
        that left the walk subspace.
    """
    layout = circuit.layout
    n = circuit.n_qubits
    dim = 2 * layout.n_edges
    mat = np.zeros((dim, dim), dtype=complex)
    worst = 0.0
    for j in range(dim):
        e, c = divmod(j, 2)
        key = 1 << (n - 1 - layout.edge_qubits[e][c])
        final = run(circuit, SparseState({key: 1.0 + 0j}, n))
        psi, leaked = _project(final, layout)
        worst = max(worst, leaked)
        mat[:, j] = psi.reshape(-1)
    return mat, worst


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of checking a compiled step against the walk operator.

    Attributes:
        max_deviation: Largest entrywise gap between the circuit's action
            and the walk's one-step matrix.
        max_leakage: Worst per-column weight off the walk subspace.
        tolerance: Threshold both numbers are held to.
        n_qubits: Circuit width.
    """

    max_deviation: float
    max_leakage: float
    tolerance: float
    n_qubits: int

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance and self.max_leakage <= self.tolerance

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "max_deviation": self.max_deviation,
            "max_leakage": self.max_leakage,
            "tolerance": self.tolerance,
            "qubits": self.n_qubits,
        }


def verify_circuit_equivalence(
    g,
    p,
    marked,
    circuit: Circuit | None = None,
    tolerance: float = 1e-10,
    enumeration_seed: int | None = None,
) -> EquivalenceReport:
    """Compare a compiled step circuit against the walk model matrix.

    Compiles the step for (g, p, marked) when no circuit is given.  The walk
    side uses the standard pole-swap coin and sign oracle.
    """
    if circuit is None:
        circuit = compile_step(g, p, marked, enumeration_seed=enumeration_seed)
    model = walk.step_matrix(
        g, p, oracle=walk.OracleSpec(marked=frozenset(marked))
    )
    actual, leakage = step_circuit_matrix(circuit)
    deviation = float(np.abs(actual - model).max())
    return EquivalenceReport(
        max_deviation=deviation,
        max_leakage=leakage,
        tolerance=tolerance,
        n_qubits=circuit.n_qubits,
    )
