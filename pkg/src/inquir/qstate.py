"""Quantum state backends.

Two interchangeable backends sit behind the runtime:

* :class:`StatevectorBackend` — dense complex128 statevector, capped at 20
  active qubits.  Measurements are genuine parity projections; which outcome
  is taken comes from the :class:`OutcomeOracle`.
* :class:`AbstractBackend` — allocation bookkeeping only.  No amplitudes, so
  measurement outcomes come straight from the oracle (``BornRule`` degrades to
  a seeded fair coin) and fidelity queries are unsupported.

Qubits are addressed by opaque integer uids chosen by the caller.
"""

from __future__ import annotations

import cmath
import math
import warnings

import numpy as np

from .errors import (
    AlreadyAllocated, ArityMismatch, CapacityExceeded, DimensionMismatch,
    ForcedOutcomeImpossible, ScriptExhausted, UnknownQubit, UnsupportedGate,
)

__all__ = [
    "OutcomeOracle", "BornRule", "Scripted",
    "StatevectorBackend", "AbstractBackend", "EPR_PAIR", "states_equal",
]

_SQ2 = 1.0 / math.sqrt(2.0)

# the state genEnt produces on a fresh pair
EPR_PAIR = np.array([_SQ2, 0.0, 0.0, _SQ2], dtype=complex)

_GATES_CONST = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(0.25j * math.pi)]], dtype=complex),
    "Tdg": np.array([[1, 0], [0, cmath.exp(-0.25j * math.pi)]], dtype=complex),
}

_GATES_PARAM = {
    "RX": lambda t: np.array([[math.cos(t / 2), -1j * math.sin(t / 2)],
                              [-1j * math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RY": lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)],
                              [math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RZ": lambda t: np.array([[cmath.exp(-0.5j * t), 0],
                              [0, cmath.exp(0.5j * t)]], dtype=complex),
    "U1": lambda l: np.array([[1, 0], [0, cmath.exp(1j * l)]], dtype=complex),
    "U2": lambda p, l: _SQ2 * np.array(
        [[1, -cmath.exp(1j * l)],
         [cmath.exp(1j * p), cmath.exp(1j * (p + l))]], dtype=complex),
    "U3": lambda t, p, l: np.array(
        [[math.cos(t / 2), -cmath.exp(1j * l) * math.sin(t / 2)],
         [cmath.exp(1j * p) * math.sin(t / 2),
          cmath.exp(1j * (p + l)) * math.cos(t / 2)]], dtype=complex),
}

_CX = np.array([[1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 0]], dtype=complex).reshape(2, 2, 2, 2)

_NORM_TOL = 1e-12


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """2x2 (or 4x4 for CX) unitary for a named gate; raises UnsupportedGate."""
    if name == "CX":
        return _CX.reshape(4, 4)
    if name in _GATES_CONST:
        return _GATES_CONST[name]
    if name in _GATES_PARAM:
        return _GATES_PARAM[name](*params)
    raise UnsupportedGate(f"no such gate: {name}")


def states_equal(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Vector equality up to global phase."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        return False
    k = int(np.argmax(np.abs(a)))
    if abs(a[k]) < tol or abs(b[k]) < tol:
        return np.allclose(a, b, atol=tol)
    phase = b[k] / a[k]
    return np.allclose(a * phase, b, atol=tol)


# ---------------------------------------------------------------------------
# outcome oracles
# ---------------------------------------------------------------------------

class OutcomeOracle:
    """Source of measurement outcomes.  ``draw(p_zero)`` returns 0 or 1."""

    def draw(self, p_zero: float) -> int:
        raise NotImplementedError


class BornRule(OutcomeOracle):
    """Sample outcomes with the Born probabilities, from a seeded generator."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.default_rng([seed, 0xB0])

    def draw(self, p_zero: float) -> int:
        return 0 if self._rng.random() < p_zero else 1


class Scripted(OutcomeOracle):
    """Force a fixed outcome sequence.

    Raises :class:`ScriptExhausted` when the script runs out and
    :class:`ForcedOutcomeImpossible` when the requested outcome has
    (numerically) zero probability.
    """

    def __init__(self, bits):
        self.bits = [int(b) for b in bits]
        self._pos = 0

    def draw(self, p_zero: float) -> int:
        if self._pos >= len(self.bits):
            raise ScriptExhausted(f"script of {len(self.bits)} bits exhausted")
        bit = self.bits[self._pos]
        self._pos += 1
        p = p_zero if bit == 0 else 1.0 - p_zero
        if p < 1e-12:
            raise ForcedOutcomeImpossible(
                f"scripted outcome {bit} has probability {p:.3e}")
        return bit


# ---------------------------------------------------------------------------
# statevector backend
# ---------------------------------------------------------------------------

class StatevectorBackend:
    """Dense simulator over the currently-allocated qubits.

    The state is held as an ndarray of shape ``(2,) * n``; ``self._axis`` maps
    each uid to its axis.  Discarding a qubit that is still entangled performs
    a destructive Z measurement first (outcome from an internal seeded stream,
    never from the programmer-visible oracle) and warns.
    """

    MAX_QUBITS = 20

    def __init__(self, oracle: OutcomeOracle | None = None, seed: int = 0):
        self.oracle = oracle if oracle is not None else BornRule(seed)
        self._discard_rng = np.random.default_rng([seed, 0xD1])
        self._state = np.ones((), dtype=complex)  # scalar 1: zero qubits
        self._axis: dict[int, int] = {}

    # -- bookkeeping --------------------------------------------------------

    @property
    def n_active(self) -> int:
        return len(self._axis)

    def has(self, uid: int) -> bool:
        return uid in self._axis

    def _ax(self, uid: int) -> int:
        try:
            return self._axis[uid]
        except KeyError:
            raise UnknownQubit(f"qubit {uid} is not allocated") from None

    def _grow(self, uid: int, extra: int):
        if uid in self._axis:
            raise AlreadyAllocated(f"qubit {uid} is already allocated")
        if self.n_active + extra > self.MAX_QUBITS:
            raise CapacityExceeded(
                f"statevector backend capped at {self.MAX_QUBITS} qubits")

    def alloc(self, uid: int):
        """Append a fresh |0> qubit."""
        self._grow(uid, 1)
        self._state = np.tensordot(self._state, np.array([1.0, 0.0], dtype=complex), axes=0)
        self._axis[uid] = self._state.ndim - 1

    def make_pair(self, uid1: int, uid2: int):
        """Append two fresh qubits jointly in the EPR state."""
        self._grow(uid1, 2)
        self._grow(uid2, 2)
        self._state = np.tensordot(self._state, EPR_PAIR.reshape(2, 2), axes=0)
        self._axis[uid1] = self._state.ndim - 2
        self._axis[uid2] = self._state.ndim - 1

    # -- gates --------------------------------------------------------------

    def apply_gate(self, name: str, uids, params=(), exponent_bit=None):
        """Apply a gate; ``exponent_bit`` of 0 skips it (classical control)."""
        if exponent_bit == 0:
            return
        if name == "CX":
            if len(uids) != 2:
                raise ArityMismatch(f"CX takes 2 qubits, got {len(uids)}")
            self._apply_2q(_CX, self._ax(uids[0]), self._ax(uids[1]))
        else:
            mat = gate_matrix(name, tuple(params))
            if len(uids) != 1:
                raise ArityMismatch(f"{name} takes 1 qubit, got {len(uids)}")
            self._apply_1q(mat, self._ax(uids[0]))
        self._check_norm()

    def _apply_1q(self, mat: np.ndarray, ax: int):
        out = np.tensordot(mat, self._state, axes=[[1], [ax]])
        self._state = np.moveaxis(out, 0, ax)

    def _apply_2q(self, mat4: np.ndarray, ax1: int, ax2: int):
        out = np.tensordot(mat4, self._state, axes=[[2, 3], [ax1, ax2]])
        self._state = np.moveaxis(out, [0, 1], [ax1, ax2])

    # -- measurement --------------------------------------------------------

    def _z_signed(self, axes) -> np.ndarray:
        signed = self._state.copy()
        zdiag = np.array([1.0, -1.0])
        for ax in axes:
            shape = [1] * signed.ndim
            shape[ax] = 2
            signed = signed * zdiag.reshape(shape)
        return signed

    def measure(self, uids) -> int:
        """Joint parity measurement of ``uids``: projects onto the even/odd
        eigenspace of Z x ... x Z and renormalizes.  Returns the outcome bit."""
        axes = [self._ax(u) for u in uids]
        signed = self._z_signed(axes)
        expect = float(np.real(np.vdot(self._state, signed)))
        p_zero = min(1.0, max(0.0, 0.5 * (1.0 + expect)))
        bit = self.oracle.draw(p_zero)
        sign = 1.0 if bit == 0 else -1.0
        proj = 0.5 * (self._state + sign * signed)
        norm = float(np.linalg.norm(proj))
        self._state = proj / norm
        return bit

    def _project_out(self, uid: int, value: int):
        ax = self._axis[uid]
        self._state = np.take(self._state, value, axis=ax)
        del self._axis[uid]
        for u, a in self._axis.items():
            if a > ax:
                self._axis[u] = a - 1

    def discard(self, uid: int, quiet: bool = False):
        """Remove a qubit.  If it still carries amplitude in both basis states
        it is Z-measured first (internal randomness) with a warning; ``quiet``
        suppresses the warning for callers that know the qubit is clean of the
        rest of the state (e.g. one half of a consumed comm pair)."""
        ax = self._ax(uid)
        probs = np.abs(self._state) ** 2
        other = tuple(i for i in range(self._state.ndim) if i != ax)
        p = probs.sum(axis=other) if other else probs
        p0 = float(p[0])
        if p0 > 1.0 - 1e-9:
            value = 0
        elif p0 < 1e-9:
            value = 1
        else:
            if not quiet:
                warnings.warn(
                    f"discarding entangled qubit {uid}; measuring it out",
                    RuntimeWarning, stacklevel=2)
            value = 0 if self._discard_rng.random() < p0 else 1
        self._project_out(uid, value)
        if self.n_active:
            self._state = self._state / np.linalg.norm(self._state)

    # -- inspection ---------------------------------------------------------

    def reduced_density(self, uids) -> np.ndarray:
        """Reduced density matrix of ``uids`` (in the given order)."""
        axes = [self._ax(u) for u in uids]
        k = len(axes)
        rest = [i for i in range(self._state.ndim) if i not in axes]
        psi = np.transpose(self._state, axes + rest).reshape(2 ** k, -1)
        return psi @ psi.conj().T

    def fidelity(self, uids, ref: np.ndarray) -> float:
        """<ref| rho |ref> for the reduced state of ``uids``."""
        ref = np.asarray(ref, dtype=complex).ravel()
        k = len(uids)
        if ref.shape != (2 ** k,):
            raise DimensionMismatch(
                f"reference has dimension {ref.shape[0]}, expected {2 ** k}")
        rho = self.reduced_density(uids)
        return float(np.real(ref.conj() @ rho @ ref))

    def statevector(self, order=None) -> np.ndarray:
        """Flat statevector; ``order`` (uids) fixes the qubit ordering."""
        if order is None:
            order = [u for u, _ in sorted(self._axis.items(), key=lambda kv: kv[1])]
        axes = [self._ax(u) for u in order]
        return np.transpose(self._state, axes).ravel()

    def _check_norm(self):
        norm = float(np.linalg.norm(self._state))
        assert abs(norm - 1.0) <= 1e-10, f"norm drifted to {norm}"
        if abs(norm - 1.0) > _NORM_TOL:
            self._state = self._state / norm


# ---------------------------------------------------------------------------
# abstract backend
# ---------------------------------------------------------------------------

class AbstractBackend:
    """Tracks allocation only; outcomes come from the oracle (p = 1/2)."""

    MAX_QUBITS = None

    def __init__(self, oracle: OutcomeOracle | None = None, seed: int = 0):
        self.oracle = oracle if oracle is not None else BornRule(seed)
        self._live: set[int] = set()

    @property
    def n_active(self) -> int:
        return len(self._live)

    def has(self, uid: int) -> bool:
        return uid in self._live

    def _add(self, uid: int):
        if uid in self._live:
            raise AlreadyAllocated(f"qubit {uid} is already allocated")
        self._live.add(uid)

    def alloc(self, uid: int):
        self._add(uid)

    def make_pair(self, uid1: int, uid2: int):
        self._add(uid1)
        self._add(uid2)

    def apply_gate(self, name: str, uids, params=(), exponent_bit=None):
        gate_matrix(name, tuple(params))  # validates the gate name
        expect = 2 if name == "CX" else 1
        if len(uids) != expect:
            raise ArityMismatch(f"{name} takes {expect} qubit(s), got {len(uids)}")
        for u in uids:
            if u not in self._live:
                raise UnknownQubit(f"qubit {u} is not allocated")

    def measure(self, uids) -> int:
        for u in uids:
            if u not in self._live:
                raise UnknownQubit(f"qubit {u} is not allocated")
        return self.oracle.draw(0.5)

    def discard(self, uid: int, quiet: bool = False):
        if uid not in self._live:
            raise UnknownQubit(f"qubit {uid} is not allocated")
        self._live.remove(uid)

    def reduced_density(self, uids):
        raise NotImplementedError("abstract backend has no amplitudes")

    def fidelity(self, uids, ref):
        raise NotImplementedError("abstract backend has no amplitudes")
