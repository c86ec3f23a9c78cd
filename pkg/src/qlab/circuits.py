"""The gate-complexity computational model.

Circuits are sequences of 2-local gates over qubit wires (wire 0 is the most
significant index; ancilla wires are appended after the system wires).  A
bounded POVM effect is obtained by conjugating a tensor product of per-wire
marks (|0><0| or identity) through the circuit unitary and projecting the
ancillas onto the all-zero state.  Single-qubit gates are embedded as 2-local
gates with identity on a partner wire, so every gate counts as one 2-local
unitary.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .tensor import (
    DensityMatrix,
    InvariantViolation,
    PovmEffect,
    effect as make_effect,
)

PROJ0 = "proj0"
IDENT = "identity"

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_T = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
_SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)

SINGLE_QUBIT_GATES = {"H": _H, "S": _S, "Sdg": _S.conj().T, "T": _T, "X": _X, "Y": _Y, "Z": _Z}


class EnumerationTooLarge(ValueError):
    """Raised when an exhaustive effect enumeration would exceed the cap."""


@dataclass(frozen=True)
class TwoLocalGate:
    """An arbitrary 2-local unitary on an ordered pair of distinct wires.

    The first target is the more significant of the two gate indices.
    """

    targets: tuple
    unitary: np.ndarray
    name: str = ""

    def __post_init__(self):
        i, j = self.targets
        if i == j:
            raise InvariantViolation("gate targets must be distinct wires")
        u = np.asarray(self.unitary, dtype=complex)
        if u.shape != (4, 4):
            raise InvariantViolation(f"2-local unitary must be 4x4, got {u.shape}")
        dev = np.max(np.abs(u.conj().T @ u - np.eye(4)))
        if dev > 1e-10:
            raise InvariantViolation(f"gate deviates from unitarity by {dev:.3e}")
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "targets", (int(i), int(j)))

    def adjoint(self) -> "TwoLocalGate":
        nm = self.name + "_dg" if self.name else ""
        return TwoLocalGate(self.targets, self.unitary.conj().T, nm)


def single_qubit_gate(u2: np.ndarray, wire: int, partner: int, name: str = "") -> TwoLocalGate:
    """Embed a 1-qubit unitary as 2-local with identity on ``partner``."""
    if wire == partner:
        raise InvariantViolation("partner wire must differ from target wire")
    return TwoLocalGate((wire, partner), np.kron(np.asarray(u2, dtype=complex), _I2), name)


def named_gate(name: str, wires, partner_pool=None) -> TwoLocalGate:
    """Gate from the fixed library; 1-qubit names take (wire,) plus a partner."""
    if name in SINGLE_QUBIT_GATES:
        (w,) = wires
        pool = partner_pool if partner_pool is not None else [x for x in range(w + 2) if x != w]
        partner = min(x for x in pool if x != w)
        return single_qubit_gate(SINGLE_QUBIT_GATES[name], w, partner, name)
    if name == "CNOT":
        return TwoLocalGate(tuple(wires), _CNOT, "CNOT")
    if name == "SWAP":
        return TwoLocalGate(tuple(wires), _SWAP, "SWAP")
    raise KeyError(f"unknown gate {name!r}")


@dataclass(frozen=True)
class QuantumCircuit:
    """Sequence of 2-local gates over system plus ancilla wires.

    Gate complexity is the gate count.  The ancilla count may never exceed
    the gate count (an untouched ancilla is pointless and the model forbids
    it), which is checked at construction.
    """

    system_wires: int
    ancilla_wires: int
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.system_wires < 0 or self.ancilla_wires < 0:
            raise InvariantViolation("wire counts must be nonnegative")
        if self.ancilla_wires > len(gates):
            raise InvariantViolation(
                f"ancilla count {self.ancilla_wires} exceeds gate count {len(gates)}"
            )
        n = self.total_wires
        for g in gates:
            for t in g.targets:
                if t < 0 or t >= n:
                    raise InvariantViolation(f"gate target {t} out of range for {n} wires")

    @property
    def total_wires(self) -> int:
        return self.system_wires + self.ancilla_wires

    @property
    def gate_complexity(self) -> int:
        return len(self.gates)

    def adjoint(self) -> "QuantumCircuit":
        return QuantumCircuit(
            self.system_wires,
            self.ancilla_wires,
            tuple(g.adjoint() for g in reversed(self.gates)),
        )


@dataclass(frozen=True)
class OutcomePattern:
    """Per-wire marks in {proj0, identity} over system plus ancilla wires."""

    marks: tuple

    def __init__(self, marks):
        marks = tuple(marks)
        for m in marks:
            if m not in (PROJ0, IDENT):
                raise InvariantViolation(f"invalid mark {m!r}")
        object.__setattr__(self, "marks", marks)

    @property
    def is_trivial(self) -> bool:
        """All-identity pattern: the effect is the full identity (allowed, flagged)."""
        return all(m == IDENT for m in self.marks)

    def __len__(self):
        return len(self.marks)

    def diagonal(self) -> np.ndarray:
        diag = np.array([1.0], dtype=complex)
        for m in self.marks:
            local = np.array([1.0, 0.0]) if m == PROJ0 else np.array([1.0, 1.0])
            diag = np.kron(diag, local)
        return diag


@dataclass(frozen=True)
class GateBudget:
    gates: int
    outcomes: int = 2

    def __post_init__(self):
        if self.gates < 0:
            raise InvariantViolation("gate budget must be nonnegative")
        if self.outcomes < 1:
            raise InvariantViolation("outcome count must be positive")


@dataclass(frozen=True)
class BoundedEffect:
    """A POVM effect realized by a circuit and an outcome pattern.

    ``operator`` caches <0|_anc U (tensor of marks) U^dag |0>_anc on the
    system wires.
    """

    circuit: QuantumCircuit
    pattern: OutcomePattern
    operator: PovmEffect

    @property
    def gate_complexity(self) -> int:
        return self.circuit.gate_complexity

    @property
    def is_trivial(self) -> bool:
        return self.pattern.is_trivial


# ---------------------------------------------------------------------------
# Dense gate application
# ---------------------------------------------------------------------------

def _apply_gate_rows(tensor_mat: np.ndarray, u4: np.ndarray, wires, n: int) -> np.ndarray:
    """Contract a 4x4 unitary into the row axes (wires) of a 2n-axis tensor."""
    i, j = wires
    ut = u4.reshape(2, 2, 2, 2)
    res = np.tensordot(ut, tensor_mat, axes=([2, 3], [i, j]))
    return np.moveaxis(res, [0, 1], [i, j])


def _conjugate(mat: np.ndarray, gate: TwoLocalGate, n: int) -> np.ndarray:
    dim = 1 << n
    t = mat.reshape([2] * (2 * n))
    i, j = gate.targets
    t = _apply_gate_rows(t, gate.unitary, (i, j), n)
    t = _apply_gate_rows(t, gate.unitary.conj(), (n + i, n + j), n)
    return t.reshape(dim, dim)


def conjugate_through_circuit(mat: np.ndarray, circuit: QuantumCircuit) -> np.ndarray:
    """U mat U^dag where U is the circuit unitary (gates applied in order)."""
    out = np.asarray(mat, dtype=complex)
    n = circuit.total_wires
    for g in circuit.gates:
        out = _conjugate(out, g, n)
    return out


def circuit_unitary(circuit: QuantumCircuit) -> np.ndarray:
    """Full unitary on system+ancilla wires (use only at small wire counts)."""
    n = circuit.total_wires
    dim = 1 << n
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        t = u.reshape([2] * n + [dim])
        t = _apply_gate_rows(t, g.unitary, g.targets, n)
        u = t.reshape(dim, dim)
    return u


def apply_circuit(state: DensityMatrix | np.ndarray, circuit: QuantumCircuit) -> np.ndarray:
    """Append ancillas in |0>, apply the gates in order, keep all wires.

    The caller traces out whatever it does not need.
    """
    rho = state.entries if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
    if rho.shape[0] != 1 << circuit.system_wires:
        raise InvariantViolation(
            f"state dim {rho.shape[0]} does not match {circuit.system_wires} system wires"
        )
    if circuit.ancilla_wires:
        anc = np.zeros((1 << circuit.ancilla_wires,) * 2, dtype=complex)
        anc[0, 0] = 1.0
        rho = np.kron(rho, anc)
    return conjugate_through_circuit(rho, circuit)


def _project_ancillas_zero(mat: np.ndarray, system_wires: int, ancilla_wires: int) -> np.ndarray:
    if ancilla_wires == 0:
        return mat
    ds = 1 << system_wires
    da = 1 << ancilla_wires
    return mat.reshape(ds, da, ds, da)[:, 0, :, 0]


def effect_from_circuit(
    circuit: QuantumCircuit, pattern: OutcomePattern, bound_tol: float = 1e-9
) -> BoundedEffect:
    """Build the bounded effect <0|_anc U (marks) U^dag |0>_anc."""
    if len(pattern) != circuit.total_wires:
        raise InvariantViolation(
            f"pattern covers {len(pattern)} wires, circuit has {circuit.total_wires}"
        )
    marks = np.diag(pattern.diagonal())
    conj = conjugate_through_circuit(marks, circuit)
    op = _project_ancillas_zero(conj, circuit.system_wires, circuit.ancilla_wires)
    op = (op + op.conj().T) / 2.0
    return BoundedEffect(circuit, pattern, make_effect(op, bound_tol=bound_tol))


def absorb_channel_into_effect(eff: BoundedEffect, pre_circuit: QuantumCircuit) -> BoundedEffect:
    """Pull a pre-processing circuit into the effect: Phi^dag[Lambda].

    The effect must act on the full output of ``pre_circuit`` (its system and
    ancilla wires); the composed effect acts on the pre-circuit's system wires
    with gate complexity exactly the sum of the two gate counts.
    """
    out_wires = pre_circuit.total_wires
    if eff.circuit.system_wires != out_wires:
        raise InvariantViolation(
            f"effect acts on {eff.circuit.system_wires} wires, channel outputs {out_wires}"
        )
    composed = QuantumCircuit(
        pre_circuit.system_wires,
        pre_circuit.ancilla_wires + eff.circuit.ancilla_wires,
        tuple(eff.circuit.gates) + tuple(pre_circuit.adjoint().gates),
    )
    return effect_from_circuit(composed, eff.pattern)


# ---------------------------------------------------------------------------
# Enumeration over a finite gate set
# ---------------------------------------------------------------------------

CLIFFORD_T = ("H", "S", "T", "CNOT")


def _gate_slots(names, total_wires: int):
    slots = []
    for name in names:
        if name in SINGLE_QUBIT_GATES:
            for w in range(total_wires):
                partner = 0 if w != 0 else 1
                if total_wires < 2:
                    raise InvariantViolation("single-qubit gates need a partner wire")
                slots.append(single_qubit_gate(SINGLE_QUBIT_GATES[name], w, partner, name))
        elif name == "CNOT":
            for i in range(total_wires):
                for j in range(total_wires):
                    if i != j:
                        slots.append(TwoLocalGate((i, j), _CNOT, "CNOT"))
        else:
            raise KeyError(f"unknown gate {name!r} in gate set")
    return slots


def enumeration_size(wires: int, budget: GateBudget, gate_set=CLIFFORD_T, ancilla_wires=None) -> int:
    anc = _default_ancillas(wires, budget.gates, ancilla_wires)
    total = wires + anc
    if budget.gates == 0:
        n_circ = 1
    else:
        s = len(_gate_slots(gate_set, total))
        n_circ = sum(s**g for g in range(budget.gates + 1))
    return n_circ * (1 << total)


def _default_ancillas(wires: int, budget_gates: int, ancilla_wires) -> int:
    if ancilla_wires is not None:
        return ancilla_wires
    return 1 if (wires == 1 and budget_gates >= 1) else 0


def enumerate_bounded_effects(
    wires: int,
    budget: GateBudget,
    gate_set=CLIFFORD_T,
    ancilla_wires: int | None = None,
    cap: int = 10**7,
):
    """Yield every effect of at most ``budget.gates`` gates from the finite set.

    Deterministic order: gate count ascending, then lexicographic over slot
    choices, then lexicographic over outcome patterns.  The finite gate set
    realizes a strict subset of all 2-local circuits, so downstream optima are
    certified lower bounds only.
    """
    size = enumeration_size(wires, budget, gate_set, ancilla_wires)
    if size > cap:
        raise EnumerationTooLarge(f"enumeration would yield {size} effects > cap {cap}")
    anc = _default_ancillas(wires, budget.gates, ancilla_wires)
    total = wires + anc
    patterns = [OutcomePattern(m) for m in itertools.product((PROJ0, IDENT), repeat=total)]
    slots = _gate_slots(gate_set, total) if budget.gates > 0 else []
    for g in range(budget.gates + 1):
        for combo in itertools.product(slots, repeat=g):
            if g >= anc:
                circ = QuantumCircuit(wires, anc, combo)
                pats = patterns
            else:
                # too few gates to carry ancillas (only happens for g = 0)
                circ = QuantumCircuit(wires, 0, combo)
                pats = [
                    OutcomePattern(m)
                    for m in itertools.product((PROJ0, IDENT), repeat=wires)
                ]
            for pat in pats:
                yield effect_from_circuit(circ, pat)


# ---------------------------------------------------------------------------
# Reversible lookup compilation
# ---------------------------------------------------------------------------

def _toffoli_gates(c1: int, c2: int, target: int):
    """Toffoli as five 2-local gates via the controlled-sqrt(X) ladder."""
    cv = _controlled(_SQRT_X)
    cvdg = _controlled(_SQRT_X.conj().T)
    return [
        TwoLocalGate((c2, target), cv, "CV"),
        TwoLocalGate((c1, c2), _CNOT, "CNOT"),
        TwoLocalGate((c2, target), cvdg, "CVdg"),
        TwoLocalGate((c1, c2), _CNOT, "CNOT"),
        TwoLocalGate((c1, target), cv, "CV"),
    ]


def _controlled(u2: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u2
    return out


def _mcx_gates(controls, target: int, ancillas):
    """Multi-controlled X via a Toffoli ladder with uncomputation."""
    k = len(controls)
    if k == 1:
        return [TwoLocalGate((controls[0], target), _CNOT, "CNOT")]
    if k == 2:
        return _toffoli_gates(controls[0], controls[1], target)
    need = k - 1
    if len(ancillas) < need:
        raise InvariantViolation(f"need {need} ancillas for {k}-controlled X")
    work = list(ancillas[:need])
    forward = []
    forward += _toffoli_gates(controls[0], controls[1], work[0])
    for idx in range(2, k):
        forward += _toffoli_gates(controls[idx], work[idx - 2], work[idx - 1])
    middle = [TwoLocalGate((work[k - 2], target), _CNOT, "CNOT")]
    backward = [g.adjoint() for g in reversed(forward)]
    return forward + middle + backward


def compile_lookup_function(table: dict) -> QuantumCircuit:
    """Compile a total k-bit to v-bit lookup table into a reversible circuit.

    The circuit maps |x>|0...0> to |x>|f(x)> on k input wires followed by v
    output wires; multi-controlled X gates are decomposed into Toffolis (five
    2-local gates each) with one borrowed ancilla per ladder step.  The
    reported gate count is whatever the construction actually used.
    """
    keys = sorted(table)
    if not keys:
        raise InvariantViolation("lookup table is empty")
    k = len(keys[0])
    v = len(table[keys[0]])
    if any(len(x) != k for x in keys) or any(len(table[x]) != v for x in keys):
        raise InvariantViolation("inconsistent key/value widths in lookup table")
    if k < 1 or k > 20:
        raise InvariantViolation("lookup inputs limited to 1..20 bits")
    if len(keys) != (1 << k) or len(set(keys)) != len(keys):
        raise InvariantViolation(f"table is not total on {k}-bit inputs")

    inputs = list(range(k))
    outputs = list(range(k, k + v))
    n_anc = k - 1 if k >= 3 else 0
    ancillas = list(range(k + v, k + v + n_anc))
    gates = []
    for x in keys:
        bits = [int(c) for c in x]
        out_bits = [j for j, c in enumerate(table[x]) if c == "1"]
        if not out_bits:
            continue
        zero_controls = [inputs[i] for i, b in enumerate(bits) if b == 0]
        flips = [
            single_qubit_gate(_X, w, 0 if w != 0 else 1, "X") for w in zero_controls
        ]
        gates += flips
        for j in out_bits:
            gates += _mcx_gates(inputs, outputs[j], ancillas)
        gates += flips
    return QuantumCircuit(k + v, n_anc if gates else 0, tuple(gates))


def evaluate_lookup_circuit(circuit: QuantumCircuit, x_bits: str, k: int, v: int) -> str:
    """Run the compiled table on a basis input; returns the v output bits."""
    n = circuit.total_wires
    if n > 20:
        raise InvariantViolation("evaluation limited to 20 wires")
    vec = np.zeros(1 << n, dtype=complex)
    idx = int(x_bits, 2) << (n - k)
    vec[idx] = 1.0
    t = vec.reshape([2] * n)
    for g in circuit.gates:
        i, j = g.targets
        ut = g.unitary.reshape(2, 2, 2, 2)
        t = np.tensordot(ut, t, axes=([2, 3], [i, j]))
        t = np.moveaxis(t, [0, 1], [i, j])
    vec = t.reshape(-1)
    out = int(np.argmax(np.abs(vec)))
    amp = abs(vec[out])
    if amp < 1.0 - 1e-8:
        raise RuntimeError(f"lookup circuit output is not a basis state (peak {amp:.6f})")
    out_bits = format(out, f"0{n}b")
    return out_bits[k : k + v]


# ---------------------------------------------------------------------------
# Uniform random Cliffords
# ---------------------------------------------------------------------------

class _PauliRep:
    """Signed n-qubit Pauli as x/z bit arrays with a sign bit."""

    __slots__ = ("x", "z", "neg")

    def __init__(self, x, z, neg=False):
        self.x = np.array(x, dtype=bool)
        self.z = np.array(z, dtype=bool)
        self.neg = bool(neg)

    def anticommutes(self, other) -> bool:
        s = np.count_nonzero(self.x & other.z) + np.count_nonzero(self.z & other.x)
        return bool(s % 2)

    def is_identity_away_from(self, i):
        m = np.ones(len(self.x), dtype=bool)
        m[i] = False
        return not (self.x[m].any() or self.z[m].any())

    def apply_h(self, j):
        if self.x[j] and self.z[j]:
            self.neg = not self.neg
        self.x[j], self.z[j] = self.z[j], self.x[j]

    def apply_s(self, j):
        if self.x[j] and self.z[j]:
            self.neg = not self.neg
        self.z[j] ^= self.x[j]

    def apply_sdg(self, j):
        if self.x[j] and not self.z[j]:
            self.neg = not self.neg
        self.z[j] ^= self.x[j]

    def apply_cnot(self, c, t):
        if self.x[c] and self.z[t] and (self.x[t] == self.z[c]):
            self.neg = not self.neg
        self.x[t] ^= self.x[c]
        self.z[c] ^= self.z[t]

    def apply_swap(self, a, b):
        self.x[a], self.x[b] = self.x[b], self.x[a]
        self.z[a], self.z[b] = self.z[b], self.z[a]

    def apply_x(self, j):
        if self.z[j]:
            self.neg = not self.neg

    def apply_z(self, j):
        if self.x[j]:
            self.neg = not self.neg

    def apply_named(self, name, wires):
        if name == "H":
            self.apply_h(wires[0])
        elif name == "S":
            self.apply_s(wires[0])
        elif name == "Sdg":
            self.apply_sdg(wires[0])
        elif name == "X":
            self.apply_x(wires[0])
        elif name == "Z":
            self.apply_z(wires[0])
        elif name == "CNOT":
            self.apply_cnot(*wires)
        elif name == "SWAP":
            self.apply_swap(*wires)
        else:
            raise KeyError(name)


def _random_pauli_block(rng, n, lo, nontrivial):
    while True:
        x = np.zeros(n, dtype=bool)
        z = np.zeros(n, dtype=bool)
        for j in range(lo, n):
            c = rng.integers(0, 4)
            x[j] = c in (1, 3)
            z[j] = c in (2, 3)
        if nontrivial and not (x.any() or z.any()):
            continue
        return _PauliRep(x, z, bool(rng.integers(0, 2)))


def _emit(ops, paulis, name, wires):
    ops.append((name, tuple(wires)))
    for p in paulis:
        p.apply_named(name, wires)


def _normalize_to_x(ops, paulis, q: _PauliRep, lo: int):
    """Emit gates turning q into +/- X_lo (q must be nontrivial on [lo, n))."""
    n = len(q.x)
    for j in range(lo, n):
        if q.z[j]:
            if q.x[j]:
                _emit(ops, paulis, "Sdg", (j,))
            else:
                _emit(ops, paulis, "H", (j,))
    supp = [j for j in range(lo, n) if q.x[j]]
    head = supp[0]
    for j in supp[1:]:
        _emit(ops, paulis, "CNOT", (head, j))
    if head != lo:
        _emit(ops, paulis, "SWAP", (head, lo))


def random_clifford(wires: int, seed: int) -> QuantumCircuit:
    """Uniformly random Clifford circuit, deterministic given the seed.

    Samples one uniformly random anticommuting (P, Q) pair per qubit and
    emits the normalization circuit mapping them to (X_i, Z_i); the returned
    circuit is the inverse of the total normalization, which ranges uniformly
    over the Clifford group as the pairs range over their choices.
    """
    if wires < 1 or wires > 10:
        raise InvariantViolation("random_clifford supports 1..10 wires")
    rng = np.random.default_rng(seed)
    n = wires
    ops = []
    for i in range(n):
        p = _random_pauli_block(rng, n, i, nontrivial=True)
        while True:
            q = _random_pauli_block(rng, n, i, nontrivial=False)
            if p.anticommutes(q):
                break
        pair = [p, q]
        _normalize_to_x(ops, pair, p, i)
        if not (q.is_identity_away_from(i) and q.z[i] and not q.x[i]):
            _emit(ops, pair, "H", (i,))
            _normalize_to_x(ops, pair, q, i)
            _emit(ops, pair, "H", (i,))
        if p.neg:
            _emit(ops, pair, "Z", (i,))
        if q.neg:
            _emit(ops, pair, "X", (i,))

    # Invert the normalization: reverse order, adjoint each generator.
    inv_names = {"H": "H", "S": "Sdg", "Sdg": "S", "X": "X", "Z": "Z", "CNOT": "CNOT", "SWAP": "SWAP"}
    inv_ops = [(inv_names[name], w) for name, w in reversed(ops)]

    ancilla = 1 if (n == 1 and inv_ops) else 0
    partner_of = lambda w: (1 if w == 0 else 0)
    gates = []
    for name, w in inv_ops:
        if name in SINGLE_QUBIT_GATES:
            gates.append(single_qubit_gate(SINGLE_QUBIT_GATES[name], w[0], partner_of(w[0]) if n > 1 else 1, name))
        elif name == "CNOT":
            gates.append(TwoLocalGate(w, _CNOT, "CNOT"))
        elif name == "SWAP":
            gates.append(TwoLocalGate(w, _SWAP, "SWAP"))
    return QuantumCircuit(n, ancilla, tuple(gates))


def clifford_system_unitary(circuit: QuantumCircuit) -> np.ndarray:
    """System-wire unitary of a Clifford circuit (ancilla partner is inert)."""
    u = circuit_unitary(circuit)
    if circuit.ancilla_wires == 0:
        return u
    ds = 1 << circuit.system_wires
    da = 1 << circuit.ancilla_wires
    block = u.reshape(ds, da, ds, da)[:, 0, :, 0]
    dev = np.max(np.abs(block.conj().T @ block - np.eye(ds)))
    if dev > 1e-9:
        raise InvariantViolation("ancilla wires are entangled; no system unitary exists")
    return block


# ---------------------------------------------------------------------------
# Parameterized 2-local gates (for random-restart searches)
# ---------------------------------------------------------------------------

_PAULI_1Q = [np.eye(2, dtype=complex), _X, _Y, _Z]
_SU4_BASIS = [
    np.kron(_PAULI_1Q[a], _PAULI_1Q[b])
    for a in range(4)
    for b in range(4)
    if not (a == 0 and b == 0)
]


def su4_gate(params, targets) -> TwoLocalGate:
    """2-local gate exp(i sum_k params_k P_k) over the 15 two-qubit Paulis."""
    params = np.asarray(params, dtype=float)
    if params.shape != (15,):
        raise InvariantViolation("need exactly 15 parameters for a 2-local gate")
    h = sum(t * p for t, p in zip(params, _SU4_BASIS))
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(1j * w)) @ v.conj().T
    return TwoLocalGate(tuple(targets), u, "su4")


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def circuit_to_json(circuit: QuantumCircuit) -> str:
    return json.dumps(
        {
            "system_wires": circuit.system_wires,
            "ancilla_wires": circuit.ancilla_wires,
            "gates": [
                {
                    "targets": list(g.targets),
                    "re": [[float(x) for x in row] for row in g.unitary.real],
                    "im": [[float(x) for x in row] for row in g.unitary.imag],
                }
                for g in circuit.gates
            ],
        }
    )


def circuit_from_json(text: str) -> QuantumCircuit:
    payload = json.loads(text)
    gates = tuple(
        TwoLocalGate(
            tuple(g["targets"]),
            np.asarray(g["re"], dtype=float) + 1j * np.asarray(g["im"], dtype=float),
        )
        for g in payload["gates"]
    )
    return QuantumCircuit(payload["system_wires"], payload["ancilla_wires"], gates)
