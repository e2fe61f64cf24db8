"""Sparse circuit simulator: gate semantics, projection, and equivalence."""

from __future__ import annotations

import json

import numpy as np
import pytest

from graphwalk import (
    Circuit,
    Gate,
    Instruction,
    Locus,
    OracleSpec,
    PolarityMap,
    SimulationError,
    SparseState,
    SubspaceLeakageError,
    build_layout,
    compile_step,
    compile_transfer,
    complete_graph,
    diagonal_state,
    greedy_coloring,
    init_walk_superposition,
    measure_edge,
    path_graph,
    polarity_from_coloring,
    project_to_walk_state,
    run,
    star_graph,
    step,
    sweep,
    verify_circuit_equivalence,
)
from graphwalk.simulator import apply_instruction
from helpers import (
    dense_instruction_matrix,
    dense_to_sparse,
    random_sparse_state,
    sparse_to_dense,
)

EDGE0 = Locus("edge", 0)


def coloring_polarity(g):
    return polarity_from_coloring(g, greedy_coloring(g))


def hub_polarity(m):
    return PolarityMap((0,) * m)


def test_init_superposition_single_edge():
    g = complete_graph(2)
    layout = build_layout(g, coloring_polarity(g))
    state = init_walk_superposition(layout)
    amp = 1 / np.sqrt(2)
    assert state.n_qubits == 4
    assert state.amps.keys() == {0b1000, 0b0100}
    assert state.amps[0b1000] == pytest.approx(amp)
    assert state.amps[0b0100] == pytest.approx(amp)


def test_init_superposition_path3():
    g = path_graph(3)
    layout = build_layout(g, coloring_polarity(g))
    state = init_walk_superposition(layout)
    assert len(state.amps) == 2 * g.n_edges
    assert all(a == pytest.approx(0.5) for a in state.amps.values())
    assert state.norm_sq() == pytest.approx(1.0)


def test_mask_and_label_orientation():
    state = SparseState({}, 4)
    assert state.mask(0) == 0b1000
    assert state.mask(3) == 0b0001
    assert state.basis_label(0b1000) == "1000"
    with pytest.raises(SimulationError, match="outside"):
        state.mask(4)


def test_x_gate_moves_leftmost_bit():
    state = SparseState({0b00: 1.0 + 0j}, 2)
    out = apply_instruction(state, Instruction(Gate.X, (), (0,), EDGE0))
    assert out.amps == {0b10: 1.0 + 0j}


def test_mcx_fires_only_when_all_controls_set():
    ins = Instruction(Gate.MCX, (0, 1), (2,), EDGE0)
    armed = apply_instruction(SparseState({0b110: 1.0 + 0j}, 3), ins)
    assert armed.amps == {0b111: 1.0 + 0j}
    idle = apply_instruction(SparseState({0b100: 1.0 + 0j}, 3), ins)
    assert idle.amps == {0b100: 1.0 + 0j}


def test_ctrl_unitary_applies_payload_when_armed():
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    ins = Instruction(Gate.CTRL_UNITARY, (0,), (1,), EDGE0, swap)
    armed = apply_instruction(SparseState({0b10: 1.0 + 0j}, 2), ins)
    assert armed.amps == {0b11: 1.0 + 0j}
    idle = apply_instruction(SparseState({0b01: 1.0 + 0j}, 2), ins)
    assert idle.amps == {0b01: 1.0 + 0j}


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.mark.parametrize(
    "name, build",
    [
        ("x", lambda rng: Instruction(Gate.X, (), (2,), EDGE0)),
        ("z", lambda rng: Instruction(Gate.Z, (), (0,), EDGE0)),
        ("cnot", lambda rng: Instruction(Gate.CNOT, (3,), (1,), EDGE0)),
        ("swap", lambda rng: Instruction(Gate.SWAP, (), (0, 4), EDGE0)),
        ("mcx", lambda rng: Instruction(Gate.MCX, (0, 2, 4), (1,), EDGE0)),
        (
            "ctrl-unitary",
            lambda rng: Instruction(
                Gate.CTRL_UNITARY, (1,), (3, 0), EDGE0, random_unitary(4, rng)
            ),
        ),
    ],
)
def test_sparse_gates_match_dense_construction(name, build):
    n = 5
    rng = np.random.default_rng(hash(name) % 2**32)
    ins = build(rng)
    mat = dense_instruction_matrix(ins, n)
    np.testing.assert_allclose(mat @ mat.conj().T, np.eye(1 << n), atol=1e-12)
    for _ in range(3):
        state = random_sparse_state(n, rng)
        expected = mat @ sparse_to_dense(state)
        out = apply_instruction(state, ins)
        np.testing.assert_allclose(sparse_to_dense(out), expected, atol=1e-13)


def test_apply_instruction_is_out_of_place():
    state = SparseState({0b01: 1.0 + 0j}, 2)
    apply_instruction(state, Instruction(Gate.X, (), (0,), EDGE0))
    assert state.amps == {0b01: 1.0 + 0j}


def test_non_unitary_payload_caught_by_norm_check():
    bad = Instruction(
        Gate.CTRL_UNITARY,
        (0,),
        (1,),
        EDGE0,
        np.array([[0.5, 0], [0, 0.5]], dtype=complex),
    )
    with pytest.raises(SimulationError, match="norm"):
        apply_instruction(SparseState({0b11: 1.0 + 0j}, 2), bad)


def test_gate_beyond_register_rejected():
    state = SparseState({0: 1.0 + 0j}, 2)
    with pytest.raises(SimulationError, match="outside"):
        apply_instruction(state, Instruction(Gate.X, (), (5,), EDGE0))


def test_run_empty_circuit_is_identity():
    g = path_graph(3)
    layout = build_layout(g, coloring_polarity(g))
    out = run(Circuit(layout, ()))
    assert out.amps == init_walk_superposition(layout).amps


def test_run_rejects_width_mismatch():
    g = path_graph(3)
    circ = compile_step(g, coloring_polarity(g), [0])
    with pytest.raises(SimulationError, match="qubits"):
        run(circ, SparseState({0: 1.0 + 0j}, 3))


def test_compiled_step_matches_engine_step():
    g = path_graph(3)
    p = coloring_polarity(g)
    circ = compile_step(g, p, [0])
    final = project_to_walk_state(run(circ), circ.layout)
    model = diagonal_state(g)
    step(model, g, p, oracle=OracleSpec(marked=frozenset({0})))
    np.testing.assert_allclose(final.psi, model.psi, atol=1e-12)


def test_repeated_steps_match_sweep_probabilities():
    g = star_graph(4)
    p = hub_polarity(4)
    circ = compile_step(g, p, [0])
    expected = sweep(g, p, OracleSpec(marked=frozenset({0})), 2).probs
    state = init_walk_superposition(circ.layout)
    for t in (1, 2):
        state = run(circ, state)
        walk_view = project_to_walk_state(state, circ.layout)
        got = float(np.sum(np.abs(walk_view.psi[0]) ** 2))
        assert got == pytest.approx(expected[t], abs=1e-10)


def test_support_stays_linear_in_edges():
    g = star_graph(4)
    circ = compile_step(g, hub_polarity(4), [0])
    cap = 4 * circ.layout.n_edges
    state = init_walk_superposition(circ.layout)
    for _ in range(3):
        for ins in circ.instructions:
            state = apply_instruction(state, ins)
            assert len(state.amps) <= cap


def test_project_init_state_gives_diagonal():
    g = path_graph(3)
    layout = build_layout(g, coloring_polarity(g))
    walk_view = project_to_walk_state(init_walk_superposition(layout), layout)
    np.testing.assert_allclose(walk_view.psi, diagonal_state(g).psi)


def test_project_detects_register_leakage():
    g = star_graph(3)
    layout = build_layout(g, hub_polarity(3))
    halfway = Circuit(layout, compile_transfer(layout, 0))
    stuck = run(halfway, init_walk_superposition(layout))
    with pytest.raises(SubspaceLeakageError) as info:
        project_to_walk_state(stuck, layout)
    assert info.value.leaked > 0.4


def test_measure_edge_one_hot():
    g = path_graph(3)
    layout = build_layout(g, coloring_polarity(g))
    key = 1 << (layout.n_qubits - 1 - layout.edge_qubits[1][0])
    state = SparseState({key: 1.0 + 0j}, layout.n_qubits)
    assert measure_edge(state, layout, seed=0) == 1


def test_measure_edge_uniform_from_init():
    g = star_graph(5)
    layout = build_layout(g, hub_polarity(5))
    state = init_walk_superposition(layout)
    rng = np.random.default_rng(11)
    draws = np.bincount(
        [measure_edge(state, layout, rng) for _ in range(5000)], minlength=5
    )
    np.testing.assert_allclose(draws / 5000, 0.2, atol=0.03)


def test_measure_edge_frequency_after_peak_steps():
    g = star_graph(4)
    p = hub_polarity(4)
    circ = compile_step(g, p, [0])
    state = init_walk_superposition(circ.layout)
    for _ in range(2):
        state = run(circ, state)
    rng = np.random.default_rng(3)
    n = 10_000
    hits = sum(measure_edge(state, circ.layout, rng) == 0 for _ in range(n))
    p_star = 0.90625
    sigma = np.sqrt(p_star * (1 - p_star) / n)
    assert abs(hits / n - p_star) < 3 * sigma


def test_measure_edge_rejects_empty_edge_weight():
    g = path_graph(3)
    layout = build_layout(g, coloring_polarity(g))
    with pytest.raises(SimulationError, match="no probability"):
        measure_edge(SparseState({}, layout.n_qubits), layout)


def test_state_dump_sorted_and_typed():
    state = SparseState({0b10: 0.6 + 0j, 0b01: 0.8j}, 2)
    dump = state.to_json_list()
    assert [d["basis"] for d in dump] == ["01", "10"]
    assert dump[0] == {"basis": "01", "re": 0.0, "im": 0.8}
    parsed = json.loads(state.to_json())
    assert parsed == dump


def test_dense_sparse_roundtrip():
    rng = np.random.default_rng(0)
    state = random_sparse_state(4, rng)
    back = dense_to_sparse(sparse_to_dense(state), 4)
    assert back.amps == state.amps


@pytest.mark.parametrize(
    "g",
    [path_graph(3), star_graph(2), complete_graph(3)],
    ids=["path3", "star2", "triangle"],
)
def test_verify_circuit_equivalence_passes(g):
    p = coloring_polarity(g)
    report = verify_circuit_equivalence(g, p, [0])
    assert report.ok
    assert report.max_deviation < 1e-12
    assert report.max_leakage < 1e-12


def test_verify_catches_tampered_circuit():
    g = path_graph(3)
    p = coloring_polarity(g)
    circ = compile_step(g, p, [0])
    stray = Instruction(Gate.X, (), (0,), EDGE0)
    bad = Circuit(circ.layout, circ.instructions + (stray,))
    report = verify_circuit_equivalence(g, p, [0], circuit=bad)
    assert not report.ok
    assert report.max_deviation > 0.1


def test_equivalence_report_json():
    g = star_graph(2)
    report = verify_circuit_equivalence(g, hub_polarity(2), [0])
    doc = report.to_json_dict()
    assert set(doc) == {"ok", "max_deviation", "max_leakage", "tolerance", "qubits"}
    assert doc["ok"] is True
    assert doc["tolerance"] == 1e-10
