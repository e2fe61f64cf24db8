"""Shared test utilities: dense gate oracles and random-state builders.

The dense builders reconstruct each gate's full 2^n matrix from first
principles (basis-by-basis bit arithmetic), independent of the sparse
simulator's dictionary transforms, so the two can be compared.
"""

from __future__ import annotations

import numpy as np

from graphwalk import Gate, Instruction, SparseState, WalkState


def bit_of(key: int, qubit: int, n: int) -> int:
    return key >> (n - 1 - qubit) & 1


def with_bit(key: int, qubit: int, n: int, value: int) -> int:
    mask = 1 << (n - 1 - qubit)
    return (key | mask) if value else (key & ~mask)


def dense_instruction_matrix(ins: Instruction, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one instruction, built basis by basis."""
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        if ins.gate is Gate.X:
            mat[with_bit(b, ins.targets[0], n, 1 - bit_of(b, ins.targets[0], n)), b] = 1
        elif ins.gate is Gate.Z:
            mat[b, b] = -1 if bit_of(b, ins.targets[0], n) else 1
        elif ins.gate is Gate.CNOT:
            t = ins.targets[0]
            if bit_of(b, ins.controls[0], n):
                mat[with_bit(b, t, n, 1 - bit_of(b, t, n)), b] = 1
            else:
                mat[b, b] = 1
        elif ins.gate is Gate.SWAP:
            qa, qb = ins.targets
            img = with_bit(b, qa, n, bit_of(b, qb, n))
            img = with_bit(img, qb, n, bit_of(b, qa, n))
            mat[img, b] = 1
        elif ins.gate is Gate.MCX:
            t = ins.targets[0]
            if all(bit_of(b, c, n) for c in ins.controls):
                mat[with_bit(b, t, n, 1 - bit_of(b, t, n)), b] = 1
            else:
                mat[b, b] = 1
        elif ins.gate is Gate.CTRL_UNITARY:
            if not all(bit_of(b, c, n) for c in ins.controls):
                mat[b, b] = 1
                continue
            val = 0
            for i, q in enumerate(ins.targets):
                val |= bit_of(b, q, n) << i
            for new_val in range(ins.matrix.shape[0]):
                img = b
                for i, q in enumerate(ins.targets):
                    img = with_bit(img, q, n, new_val >> i & 1)
                mat[img, b] = ins.matrix[new_val, val]
        else:
            raise AssertionError(f"unhandled gate {ins.gate}")
    return mat


def sparse_to_dense(state: SparseState) -> np.ndarray:
    vec = np.zeros(1 << state.n_qubits, dtype=complex)
    for k, a in state.amps.items():
        vec[k] = a
    return vec


def dense_to_sparse(vec: np.ndarray, n: int) -> SparseState:
    return SparseState({k: complex(a) for k, a in enumerate(vec) if a != 0}, n)


def random_sparse_state(n: int, rng: np.random.Generator, support: int = 12) -> SparseState:
    keys = rng.choice(1 << n, size=min(support, 1 << n), replace=False)
    amps = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    amps /= np.linalg.norm(amps)
    return SparseState({int(k): complex(a) for k, a in zip(keys, amps)}, n)


def random_walk_state(n_edges: int, rng: np.random.Generator) -> WalkState:
    psi = rng.normal(size=(n_edges, 2)) + 1j * rng.normal(size=(n_edges, 2))
    psi /= np.linalg.norm(psi)
    return WalkState(psi)
