"""Model definition and construction of the dissipative generators.

A :class:`LindbladModel` is a Hermitian Hamiltonian plus a list of jump
channels ``(operator, rate)``; the effective jump operator of a channel is
``Gamma = sqrt(rate) * operator``.  From a model we build

* the full Liouvillian ``L`` (jump term plus continuous dissipation),
* the effective non-Hermitian Hamiltonian ``H_eff = H - i/2 sum Gamma^+ Gamma``,
* the no-jump generator ``L' = -i H_eff (.) + i (.) H_eff^+``, and
* the hybrid generator ``L_H(q) = q L + (1-q) L'`` which rescales only the
  jump ("sandwich") terms by ``q``.

Superoperator matrices act on column-stacked density matrices, see
:mod:`liouvep.numerics`.  Basis convention for qubits: index 0 is the excited
state ``|up>``, so ``SIGMA_Z = diag(1, -1)`` and ``SIGMA_MINUS`` lowers
``|up> -> |down>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import kron, vec, unvec

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "IDENTITY_2",
    "JumpChannel",
    "LindbladModel",
    "Superoperator",
    "QubitStateSpec",
    "dissipator_superop",
    "liouvillian",
    "effective_hamiltonian",
    "nojump_superop",
    "hybrid_liouvillian",
    "qubit_state",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class JumpChannel:
    """One dissipation channel: ``D[sqrt(rate) * operator]``.

    ``jump_weight`` multiplies the hybrid parameter q for this channel only,
    generalizing the single-channel hybrid construction channelwise.
    """

    operator: np.ndarray
    rate: float
    jump_weight: float = 1.0

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"channel operator must be square, got shape {op.shape}")
        if self.rate < 0:
            raise ValueError(f"channel rate must be nonnegative, got {self.rate}")
        if self.jump_weight < 0:
            raise ValueError(f"jump_weight must be nonnegative, got {self.jump_weight}")
        object.__setattr__(self, "operator", op)

    @property
    def dim(self):
        return self.operator.shape[0]

    @property
    def gamma_op(self):
        """Effective jump operator ``sqrt(rate) * operator``."""
        return np.sqrt(self.rate) * self.operator


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: np.ndarray
    channels: tuple[JumpChannel, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError(f"hamiltonian must be square, got shape {h.shape}")
        if np.linalg.norm(h - h.conj().T) > _HERM_TOL * max(1.0, np.linalg.norm(h)):
            raise ValueError("hamiltonian is not Hermitian within tolerance")
        channels = tuple(self.channels)
        for ch in channels:
            if ch.dim != h.shape[0]:
                raise ValueError(
                    f"channel dimension {ch.dim} does not match Hamiltonian dimension {h.shape[0]}"
                )
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "dim", h.shape[0])


@dataclass(frozen=True)
class Superoperator:
    """A d^2 x d^2 generator acting on column-stacked density matrices."""

    matrix: np.ndarray
    kind: str  # "full" | "nojump" | "hybrid"
    model: LindbladModel
    q: float | None = None

    @property
    def dim(self):
        return self.model.dim

    def apply(self, rho):
        """Apply the generator to a density matrix (not its vectorization)."""
        return unvec(self.matrix @ vec(rho), self.dim)


def _jump_superop(gamma_op):
    # sandwich part  Gamma (.) Gamma^+  on vectorized operators
    return kron(gamma_op.conj(), gamma_op)


def _anticomm_superop(gamma_op):
    d = gamma_op.shape[0]
    gdg = gamma_op.conj().T @ gamma_op
    return 0.5 * (kron(np.eye(d), gdg) + kron(gdg.T, np.eye(d)))


def dissipator_superop(channel):
    """Matrix of ``D[Gamma] = Gamma (.) Gamma^+ - 1/2 {Gamma^+ Gamma, .}``."""
    g = channel.gamma_op
    return _jump_superop(g) - _anticomm_superop(g)


def _hamiltonian_superop(h):
    d = h.shape[0]
    return -1j * (kron(np.eye(d), h) - kron(h.T, np.eye(d)))


def liouvillian(model):
    """Full Lindblad generator of the model (kind ``"full"``)."""
    mat = _hamiltonian_superop(model.hamiltonian)
    for ch in model.channels:
        mat = mat + dissipator_superop(ch)
    return Superoperator(matrix=mat, kind="full", model=model)


def effective_hamiltonian(model):
    """Non-Hermitian ``H - i/2 sum_mu Gamma_mu^+ Gamma_mu``."""
    h = model.hamiltonian.astype(complex)
    for ch in model.channels:
        g = ch.gamma_op
        h = h - 0.5j * (g.conj().T @ g)
    return h


def nojump_superop(model):
    """Generator with all jump terms removed (kind ``"nojump"``).

    Its spectrum is ``{-i (h_i - conj(h_j))}`` over eigenvalue pairs of the
    effective Hamiltonian.
    """
    he = effective_hamiltonian(model)
    d = model.dim
    mat = -1j * kron(np.eye(d), he) + 1j * kron(he.conj(), np.eye(d))
    return Superoperator(matrix=mat, kind="nojump", model=model)


def hybrid_liouvillian(model, q):
    """Hybrid generator: jump terms weighted by q, dissipation kept in full.

    Equals ``q * L + (1-q) * L'`` when every channel has unit jump weight.
    ``q > 1`` is allowed for spectral studies; only the trajectory layer
    restricts q to [0, 1].
    """
    if q < 0:
        raise ValueError(f"hybrid parameter q must be nonnegative, got {q}")
    mat = nojump_superop(model).matrix.copy()
    for ch in model.channels:
        mat += (q * ch.jump_weight) * _jump_superop(ch.gamma_op)
    return Superoperator(matrix=mat, kind="hybrid", model=model, q=float(q))


@dataclass(frozen=True)
class QubitStateSpec:
    """Bloch angles of a pure qubit state
    ``cos(theta/2)|up> + sin(theta/2) e^{i phi} |down>``."""

    theta: float
    phi: float


def qubit_state(spec):
    """Unit-norm state vector for the given Bloch angles."""
    return np.array(
        [np.cos(spec.theta / 2.0), np.sin(spec.theta / 2.0) * np.exp(1j * spec.phi)],
        dtype=complex,
    )
