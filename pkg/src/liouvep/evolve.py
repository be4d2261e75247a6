"""Deterministic time evolution of density matrices under any generator.

States are propagated with exact matrix exponentials of ``L * dt`` (the
generators in scope are tiny and time independent), so no discretization
error enters acceptance comparisons.  For q < 1 the hybrid generator does
not preserve the trace; the raw trace is recorded before renormalization
because it equals the postselection success probability of the matching
trajectory protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import expm, unvec, vec

__all__ = ["EvolutionResult", "TraceUnderflowError", "propagate", "expectation"]


class TraceUnderflowError(RuntimeError):
    """Unnormalized trace fell below threshold: postselection probability ~ 0."""


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: list[np.ndarray]  # Hermitian, trace one
    raw_traces: np.ndarray  # trace before renormalization

    def expectations(self, obs):
        return np.array([expectation(rho, obs) for rho in self.states])


def _check_density_matrix(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > 1e-10:
        raise ValueError("initial state is not Hermitian within 1e-10")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("initial state does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
        raise ValueError("initial state is not positive semidefinite within 1e-10")
    return rho


def propagate(superop, rho0, times):
    """Evolve ``rho0`` under the generator and renormalize at the output times.

    The linear (unnormalized) evolution is computed stepwise with one matrix
    exponential per distinct time increment; renormalization to unit trace and
    Hermitian symmetrization are readout operations applied per output time.
    """
    rho0 = _check_density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted and nonnegative")

    d = superop.dim
    m = superop.matrix
    v = vec(rho0)
    props: dict[float, np.ndarray] = {}
    states = []
    raw = np.empty(times.size)
    t_prev = 0.0
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            if dt not in props:
                props[dt] = expm(m * dt)
            v = props[dt] @ v
        t_prev = t
        rho = unvec(v, d)
        tr = np.trace(rho).real
        raw[k] = tr
        if tr < 1e-14:
            raise TraceUnderflowError(
                f"raw trace {tr:.3e} at t={t}: postselection probability is numerically zero"
            )
        rho = 0.5 * (rho + rho.conj().T) / tr
        states.append(rho)
    return EvolutionResult(times=times, states=states, raw_traces=raw)


def expectation(rho, obs):
    """Real expectation value ``Re tr(obs @ rho)`` of a Hermitian observable."""
    rho = np.asarray(rho, dtype=complex)
    obs = np.asarray(obs, dtype=complex)
    if rho.shape != obs.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape} vs observable {obs.shape}")
    val = np.trace(obs @ rho)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)
