"""Qubit presets and their closed-form spectral data.

Two single-qubit dissipative models are built in:

* ``example1``: ``H = (omega/2) sigma_z`` with a ``sigma_x`` decay channel.
  Its no-jump generator is diagonal (no degeneracy anywhere), while the full
  generator has a second-order exceptional point; the hybrid EP sits at
  ``gamma_x = omega / q``.
* ``example2``: ``H = (omega/2) sigma_x`` with a ``sigma_-`` decay channel.
  The effective Hamiltonian has a second-order EP at ``gamma_- = 2 omega``,
  the full generator a second-order EP at ``gamma_- = 4 omega``, and the
  hybrid EP interpolates between them (third order at q = 0).

Rate bookkeeping: a preset with decay rate ``gamma`` uses the jump operator
``Gamma = sqrt(gamma) * op``, which is the normalization under which all the
closed forms below hold verbatim; writing the dissipator with a ``gamma/2``
prefactor instead would rescale every spectrum by one half.

The closed-form functions are implemented directly from the analytic
expressions (radicals and Cardano roots), never through the numerical
eigensolver, so the two routes provide independent evidence when
cross-checked.  Matrix-valued results follow the package basis convention
(excited state first); tabulated forms that were stated ground-state-first
are conjugated by ``sigma_x`` on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lindblad import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    JumpChannel,
    LindbladModel,
)

__all__ = [
    "Example1Params",
    "Example2Params",
    "ClosedFormSpectrum",
    "example1_model",
    "example1_hybrid_spectrum",
    "example1_ep",
    "example1_generalized_eigenmatrix",
    "example2_model",
    "example2_nhh_spectrum",
    "example2_nhh_generalized_eigenvector",
    "example2_liouvillian_spectrum",
    "example2_lep_generalized_eigenmatrix",
    "example2_hybrid_ep",
    "example2_hybrid_spectrum",
    "example2_hybrid_eigenmatrices_tabulated",
    "preset_model",
    "model_from_json",
]

_NAMED_OPERATORS = {
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "sigma_minus": SIGMA_MINUS,
    "sigma_plus": SIGMA_PLUS,
}

# ground-first -> excited-first basis exchange
_P = SIGMA_X.real


def _exchange(m):
    return _P @ np.asarray(m, dtype=complex) @ _P


@dataclass(frozen=True)
class Example1Params:
    omega: float
    gamma_x: float
    q: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.gamma_x < 0 or self.q < 0:
            raise ValueError("gamma_x and q must be nonnegative")


@dataclass(frozen=True)
class Example2Params:
    omega: float
    gamma_minus: float
    q: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.gamma_minus < 0 or self.q < 0:
            raise ValueError("gamma_minus and q must be nonnegative")


@dataclass(frozen=True)
class ClosedFormSpectrum:
    """Analytic spectrum with its auxiliary radicals.

    ``eigenvalues`` is a plain (unsorted) array; comparisons against numerics
    are multiset comparisons because branch indices reshuffle as parameters
    move.  ``eigenmatrices``/``eigenvectors`` are unnormalized proportional
    forms when present.
    """

    eigenvalues: np.ndarray
    auxiliary: dict[str, complex]
    eigenmatrices: list[np.ndarray] | None = None
    eigenvectors: list[np.ndarray] | None = None


def example1_model(p):
    return LindbladModel(
        hamiltonian=0.5 * p.omega * SIGMA_Z,
        channels=(JumpChannel(operator=SIGMA_X, rate=p.gamma_x),),
    )


def example1_hybrid_spectrum(p):
    """Closed-form hybrid spectrum of example 1.

    Eigenvalues ``{-gamma(1-q), -gamma +/- Omega', -gamma(1+q)}`` with
    ``Omega' = sqrt(q^2 gamma^2 - omega^2)``.  The coherence eigenmatrices
    carry ``q * gamma`` in the lower-left entry; the q-independent tabulated
    form (plain ``gamma``) solves the eigenproblem only at q = 1.
    """
    w, g, q = p.omega, p.gamma_x, p.q
    omega_p = np.sqrt(complex(q * q * g * g - w * w))
    lams = np.array([-g * (1 - q), -g + omega_p, -g - omega_p, -g * (1 + q)])
    mats = [
        np.eye(2, dtype=complex) / 2.0,
        np.array([[0.0, -1j * w + omega_p], [q * g, 0.0]]),
        np.array([[0.0, -1j * w - omega_p], [q * g, 0.0]]),
        np.diag([-1.0, 1.0]).astype(complex),
    ]
    return ClosedFormSpectrum(
        eigenvalues=lams,
        auxiliary={"Omega_prime": complex(omega_p)},
        eigenmatrices=mats,
    )


def example1_ep(q, omega=1.0):
    """Hybrid EP location ``omega / q``; None at q = 0 (EP pushed to infinity)."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0:
        return None
    return omega / q


def example1_generalized_eigenmatrix(a):
    """One-parameter family of generalized eigenmatrices at the example-1 LEP.

    Every member satisfies the Jordan chain at ``gamma_x = omega``, q = 1,
    eigenvalue ``-omega``, with the chain source ``[[0, -i omega], [gamma_x, 0]]``.
    """
    return np.array([[0.0, a], [1j * a - 1j, 0.0]], dtype=complex)


def example2_model(p):
    return LindbladModel(
        hamiltonian=0.5 * p.omega * SIGMA_X,
        channels=(JumpChannel(operator=SIGMA_MINUS, rate=p.gamma_minus),),
    )


def example2_nhh_spectrum(p):
    """Effective-Hamiltonian spectrum of example 2.

    ``h_{1,2} = (-i gamma -/+ zeta) / 4`` with ``zeta = sqrt(4 omega^2 -
    gamma^2)``.  Eigenvectors are ``[i gamma +/- zeta, -2 omega]`` paired so
    that the eigenproblem is satisfied (the tabulated pairing has the zeta
    signs swapped between eigenvalue and eigenvector).
    """
    w, g = p.omega, p.gamma_minus
    zeta = np.sqrt(complex(4 * w * w - g * g))
    lams = np.array([(-1j * g - zeta) / 4.0, (-1j * g + zeta) / 4.0])
    vecs = [
        np.array([1j * g + zeta, -2.0 * w], dtype=complex),
        np.array([1j * g - zeta, -2.0 * w], dtype=complex),
    ]
    return ClosedFormSpectrum(
        eigenvalues=lams, auxiliary={"zeta": complex(zeta)}, eigenvectors=vecs
    )


def example2_nhh_generalized_eigenvector(a, omega=1.0):
    """Generalized-eigenvector family ``[a, i(4+a)]`` at the example-2 HEP
    (``gamma_- = 2 omega``); satisfies ``(H_eff - h) v~ = c(a) [2 i omega,
    -2 omega]`` for every a."""
    return np.array([a, 1j * (4.0 + a)], dtype=complex)


def example2_liouvillian_spectrum(p):
    """Full-generator spectrum of example 2 at q = 1.

    ``{0, -gamma/2, -(3/4) gamma +/- beta/4}`` with ``beta =
    sqrt(gamma^2 - 16 omega^2)``; the eigenmatrices are exact (stated in the
    ground-first convention, conjugated here into the package basis).
    """
    w, g = p.omega, p.gamma_minus
    beta = np.sqrt(complex(g * g - 16 * w * w))
    lams = np.array([0.0, -g / 2.0, -0.75 * g + beta / 4.0, -0.75 * g - beta / 4.0])
    denom = g * g + 2 * w * w
    rho_ss = _exchange(
        np.array([[g * g + w * w, 1j * g * w], [-1j * g * w, w * w]]) / denom
    )
    rho_1 = SIGMA_X.copy()
    rho_2 = _exchange(np.array([[-g + beta, 4j * w], [-4j * w, g - beta]]))
    rho_3 = _exchange(np.array([[-g - beta, 4j * w], [-4j * w, g + beta]]))
    return ClosedFormSpectrum(
        eigenvalues=lams,
        auxiliary={"beta": complex(beta)},
        eigenmatrices=[rho_ss, rho_1, rho_2, rho_3],
    )


def example2_lep_generalized_eigenmatrix():
    """Generalized eigenmatrix at the example-2 LEP (``gamma = 4 omega``,
    eigenvalue ``-3 omega``): ``4 diag(1, -1)`` up to the usual family and
    basis-exchange sign freedom."""
    return 4.0 * np.diag([1.0, -1.0]).astype(complex)


def example2_hybrid_ep(q, omega=1.0):
    """Hybrid EP location of example 2 for q in (0, 1].

    ``gamma(q) = sqrt(2) f^{-1/2} (3 f^2 + 3 q^2 + 2 f)^{1/2} omega`` with
    ``f = q^{2/3} (1 + sqrt(1 - q^2))^{1/3}``; evaluates to 4 omega at q = 1
    and tends to 2 omega (the effective-Hamiltonian EP) as q -> 0+.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"formula domain is q in (0, 1], got {q}")
    f = q ** (2.0 / 3.0) * (1.0 + np.sqrt(1.0 - q * q)) ** (1.0 / 3.0)
    return float(np.sqrt(2.0) * f**-0.5 * np.sqrt(3 * f * f + 3 * q * q + 2 * f) * omega)


def _cardano_pieces(w, g, q):
    """Cube-root data of the cubic for the non-sigma_x sector of example 2.

    After the shift ``lambda = -gamma/2 + t`` the cubic is
    ``t^3 + (omega^2 - gamma^2/4) t - q gamma omega^2 / 2 = 0``;
    ``D/6`` and ``(gamma^2 - 4 omega^2) / (2 D)`` are its two Cardano cube
    roots (principal branch for D, partner fixed by the product constraint).
    """
    radicand = complex(108 * q**2 * g**2 * w**4 - (g**2 - 4 * w**2) ** 3)
    d_cubed = 54 * q * g * w**2 + 3 * np.sqrt(3.0) * np.sqrt(radicand)
    d = d_cubed ** (1.0 / 3.0)
    return d


def example2_hybrid_spectrum(p, literal=False):
    """Closed-form hybrid spectrum of example 2.

    ``lambda_1 = -gamma/2`` for every q (eigenmatrix sigma_x); the other three
    eigenvalues are cubic roots expressed through ``F0 = (D^2 + 3 (gamma^2 -
    4 omega^2)) / (12 D)``: ``lambda_0 = -gamma/2 + 2 F0`` and
    ``lambda_{2,3} = -gamma/2 - F0 +/- i sqrt(3) (F0 - D/6)``.

    With ``literal=True`` the complex pair uses the tabulated imaginary
    coefficient ``(F0 - 2 D)`` instead of the Cardano-consistent
    ``(F0 - D/6)``; the literal variant disagrees with direct
    diagonalization away from degenerate points and exists so the
    verification harness can log those deviations.
    """
    w, g, q = p.omega, p.gamma_minus, p.q
    scale = max(w, g, 1e-30)
    d = _cardano_pieces(w, g, q)
    if abs(d) ** 3 <= 1e-20 * scale**3:
        # triple root of the cubic (q = 0 at gamma = 2 omega): everything at -gamma/2
        lams = np.array([-g / 2.0] * 4, dtype=complex)
        return ClosedFormSpectrum(
            eigenvalues=lams,
            auxiliary={
                "D": complex(d),
                "F0": 0.0j,
                "u_plus": 1.0 + np.sqrt(3.0),
                "u_minus": 1.0 - np.sqrt(3.0),
            },
        )
    f0 = (d * d + 3 * (g * g - 4 * w * w)) / (12 * d)
    coef = (f0 - 2 * d) if literal else (f0 - d / 6.0)
    lams = np.array(
        [
            -g / 2.0 + 2 * f0,
            -g / 2.0,
            -g / 2.0 - f0 + 1j * np.sqrt(3.0) * coef,
            -g / 2.0 - f0 - 1j * np.sqrt(3.0) * coef,
        ]
    )
    return ClosedFormSpectrum(
        eigenvalues=lams,
        auxiliary={
            "D": complex(d),
            "F0": complex(f0),
            "u_plus": 1.0 + np.sqrt(3.0),
            "u_minus": 1.0 - np.sqrt(3.0),
        },
    )


def example2_hybrid_eigenmatrices_tabulated(p):
    """Tabulated element formulas for the hybrid eigenmatrices of example 2.

    Returned verbatim (conjugated into the package basis); several elements
    are dimensionally inconsistent as stated and disagree with the direct
    eigensolver, so these are inputs for the deviations log, not oracles.
    Keys: "rho0", "rho1", "rho2", "rho3".
    """
    w, g, q = p.omega, p.gamma_minus, p.q
    d = _cardano_pieces(w, g, q)
    f0 = (d * d + 3 * (g * g - 4 * w * w)) / (12 * d)
    up = 1.0 + np.sqrt(3.0)
    um = 1.0 - np.sqrt(3.0)

    r00_0 = (
        -(d**3 - 54 * q * g * w**2) * (3 * g - d) / 6.0
        + 3 * g**3 * (g - d) / 2.0
        + g**2 * (d * d - w * w * (27 * q + 12))
        + 3 * g * w * w * d * (3 * q + 2)
        + 24 * w * w
        - w * w * d * d
    )
    r01_0 = 3j * w * d * d * (4 * f0 - g * (2 * q + 1))
    r11_0 = 6 * d * d * (4 * g * q * f0 + w * w * d)
    rho0 = np.array([[r00_0, r01_0], [-r01_0, r11_0]])

    r00_2 = (
        4 * d * d * (g * g - w * w)
        - up * (d**3 - 9 * g**3 + 36 * g * w * w) * d / 3.0
        + um * (g * d**3 - 16 * w * w * g * g - 3 * (g * g - 4 * w * w) ** 2)
    )
    r01_2 = -1j * w * d * (d * d * um + 6 * g * d * (2 * q + 1) + 3 * up * (g * g - 4 * w * w))
    r11_2 = -2 * d * (um * q * g * d * d - 6 * w * w * d + 3 * up * q * g * (g * g - 4 * w * w))
    rho2 = np.array([[r00_2, r01_2], [-r01_2, r11_2]])
    rho3 = np.array([[r00_2, -r01_2], [r01_2, r11_2]])

    return {
        "rho0": _exchange(rho0),
        "rho1": SIGMA_X.copy(),
        "rho2": _exchange(rho2),
        "rho3": _exchange(rho3),
    }


def preset_model(name, omega, gamma):
    """Build one of the named presets."""
    if name == "example1":
        return example1_model(Example1Params(omega=omega, gamma_x=gamma))
    if name == "example2":
        return example2_model(Example2Params(omega=omega, gamma_minus=gamma))
    raise ValueError(f"unknown preset {name!r}; expected 'example1' or 'example2'")


def _matrix_from_json(entries, what):
    m = np.asarray(
        [[complex(re, im) for re, im in row] for row in entries], dtype=complex
    )
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix of [re, im] pairs")
    return m


def model_from_json(doc):
    """Build a model from a JSON-style dict.

    Either ``{"preset": "example1"|"example2", "omega": w, "gamma": g}`` or an
    explicit description ``{"dim": d, "hamiltonian": [[[re, im], ...], ...],
    "channels": [{"operator": name-or-matrix, "rate": r, "q": weight}, ...]}``.
    """
    if "preset" in doc:
        return preset_model(doc["preset"], float(doc["omega"]), float(doc["gamma"]))
    dim = int(doc["dim"])
    h = _matrix_from_json(doc["hamiltonian"], "hamiltonian")
    if h.shape[0] != dim:
        raise ValueError(f"hamiltonian dimension {h.shape[0]} does not match dim={dim}")
    channels = []
    for ch in doc.get("channels", []):
        op = ch["operator"]
        if isinstance(op, str):
            if op not in _NAMED_OPERATORS:
                raise ValueError(f"unknown operator name {op!r}")
            op = _NAMED_OPERATORS[op]
        else:
            op = _matrix_from_json(op, "channel operator")
        channels.append(
            JumpChannel(
                operator=op,
                rate=float(ch["rate"]),
                jump_weight=float(ch.get("q", 1.0)),
            )
        )
    return LindbladModel(hamiltonian=h, channels=tuple(channels))
