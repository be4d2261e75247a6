"""Monte Carlo quantum-jump unraveling with postselection.

A trajectory is a pure state evolving under the effective non-Hermitian
Hamiltonian between jumps; in each time step of width dt a jump of channel mu
fires with probability ``<psi| Gamma_mu^+ Gamma_mu |psi> dt`` (at most one
jump per step), otherwise the state is propagated by the exact no-jump
exponential and renormalized.

Two detection protocols are supported:

* ``TwoDetector(q)`` splits every jump operator into ``sqrt(q) Gamma``
  (detector 1) and ``sqrt(1-q) Gamma`` (detector 2); postselection keeps the
  trajectories with zero detector-2 clicks.
* ``InefficientDetector(eta)`` runs a single perfectly counted detector and
  afterwards thins the record: each jump is detected with probability eta and
  a trajectory survives only if none of its jumps was detected.  This is
  statistically equivalent to the two-detector protocol at ``q = 1 - eta``.

Reproducibility: trajectory i draws its uniforms from a dedicated stream
seeded by ``(master_seed, i)``; detection thinning draws from the separate
stream ``(master_seed, i, 1)``.  Results are therefore independent of any
batching or execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .evolve import expectation
from .lindblad import effective_hamiltonian
from .numerics import expm

__all__ = [
    "TrajectoryConfig",
    "TwoDetector",
    "InefficientDetector",
    "JumpEvent",
    "TrajectoryRecord",
    "EnsembleStats",
    "EffectiveChannel",
    "EffectiveChannels",
    "build_effective_channels",
    "default_dt",
    "step",
    "run_ensemble",
    "postselect_two_detector",
    "postselect_inefficient",
    "ensemble_average",
]

_JUMP_PROB_CAP = 0.05
_DETECT_STREAM_KEY = 1
_BATCH = 4096


class JumpEvent(NamedTuple):
    time: float
    channel: int
    detector: int


@dataclass(frozen=True)
class TwoDetector:
    """Beam-splitter monitoring: fraction q of clicks goes to detector 1."""

    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"two-detector q must lie in [0, 1], got {self.q}")


@dataclass(frozen=True)
class InefficientDetector:
    """Single detector registering each jump with probability eta."""

    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"detector efficiency must lie in [0, 1], got {self.eta}")

    @property
    def equivalent_q(self):
        return 1.0 - self.eta


@dataclass(frozen=True)
class TrajectoryConfig:
    """Ensemble parameters.

    ``dt=None`` selects ``1e-3 * 2 pi / scale`` (halved as needed), where the
    scale is set by the Hamiltonian and total jump rate; an explicitly given
    dt must satisfy the per-step jump probability cap of 0.05.
    """

    t_max: float
    n_traj: int
    master_seed: int
    sample_times: np.ndarray
    dt: float | None = None

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.n_traj <= 0:
            raise ValueError("n_traj must be positive")
        st = np.asarray(self.sample_times, dtype=float)
        if st.ndim != 1 or st.size == 0:
            raise ValueError("sample_times must be a nonempty 1-d sequence")
        if np.any(st < 0) or np.any(st > self.t_max + 1e-12):
            raise ValueError("sample_times must lie in [0, t_max]")
        object.__setattr__(self, "sample_times", st)
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")


class EffectiveChannel(NamedTuple):
    gamma_op: np.ndarray
    channel: int
    detector: int


@dataclass(frozen=True)
class EffectiveChannels:
    """Jump operators seen by the stochastic integrator, plus the no-jump flow."""

    channels: tuple[EffectiveChannel, ...]
    h_eff: np.ndarray
    _propagators: dict = field(default_factory=dict, repr=False, compare=False)

    def propagator(self, dt):
        if dt not in self._propagators:
            self._propagators[dt] = expm(-1j * self.h_eff * dt)
        return self._propagators[dt]

    @property
    def total_rate_bound(self):
        """sup over unit states of the total jump rate (largest eigenvalue
        of the summed ``Gamma^+ Gamma``)."""
        if not self.channels:
            return 0.0
        tot = sum(c.gamma_op.conj().T @ c.gamma_op for c in self.channels)
        return float(np.linalg.eigvalsh(tot).max())


def build_effective_channels(model, setup):
    """Split the model channels according to the detection setup."""
    chans = []
    for i, ch in enumerate(model.channels):
        g = ch.gamma_op
        if isinstance(setup, TwoDetector):
            qi = setup.q * ch.jump_weight
            if not 0.0 <= qi <= 1.0:
                raise ValueError(
                    f"effective jump fraction {qi} of channel {i} outside [0, 1]"
                )
            chans.append(EffectiveChannel(np.sqrt(qi) * g, i, 1))
            chans.append(EffectiveChannel(np.sqrt(1.0 - qi) * g, i, 2))
        elif isinstance(setup, InefficientDetector):
            chans.append(EffectiveChannel(g, i, 1))
        else:
            raise TypeError(f"unknown detector setup {setup!r}")
    return EffectiveChannels(channels=tuple(chans), h_eff=effective_hamiltonian(model))


def default_dt(model, channels=None):
    """Default step: 1e-3 of the fastest period, halved until the jump cap holds."""
    h = model.hamiltonian
    rate = (
        channels.total_rate_bound
        if channels is not None
        else build_effective_channels(model, InefficientDetector(1.0)).total_rate_bound
    )
    scale = max(2.0 * np.linalg.norm(h, 2), rate, 1e-12)
    dt = 1e-3 * 2.0 * np.pi / scale
    while rate * dt > _JUMP_PROB_CAP:
        dt *= 0.5
    return dt


def step(psi, dt, channels, rng_draw, t=0.0):
    """One stochastic step; returns ``(psi_next, event_or_None)``.

    A single uniform draw decides both whether a jump fires and which channel
    it belongs to (intervals of width ``p_mu`` stacked in channel order).
    The jump replaces the no-jump flow for that step; an emitted event is
    stamped ``t + dt`` (registered at the end of the step).
    """
    psi = np.asarray(psi, dtype=complex)
    thresh = 0.0
    for ch in channels.channels:
        gpsi = ch.gamma_op @ psi
        p = float(np.real(np.vdot(gpsi, gpsi))) * dt
        if rng_draw < thresh + p:
            nrm = np.linalg.norm(gpsi)
            if nrm < 1e-14:
                raise RuntimeError(
                    f"norm collapse after jump of channel {ch.channel}: dark state"
                )
            return gpsi / nrm, JumpEvent(t + dt, ch.channel, ch.detector)
        thresh += p
    out = channels.propagator(dt) @ psi
    return out / np.linalg.norm(out), None


def _resolve_dt(cfg, channels, model):
    rate = channels.total_rate_bound
    if cfg.dt is None:
        return default_dt(model, channels)
    if rate * cfg.dt > _JUMP_PROB_CAP:
        raise ValueError(
            f"dt={cfg.dt} violates the per-step jump probability cap: "
            f"max rate {rate:.3g} * dt = {rate * cfg.dt:.3g} > {_JUMP_PROB_CAP}"
        )
    return float(cfg.dt)


@dataclass(frozen=True)
class TrajectoryRecord:
    index: int
    jump_events: tuple[JumpEvent, ...]
    sampled_states: np.ndarray  # (n_sample_times, dim)
    final_state: np.ndarray
    accepted: bool
    n_jumps_by_detector: dict[int, int]

    @property
    def n_jumps(self):
        return len(self.jump_events)


@dataclass(frozen=True)
class EnsembleStats:
    """Accepted-ensemble averages with standard errors of the mean."""

    times: np.ndarray
    means: dict[str, np.ndarray]
    sems: dict[str, np.ndarray]
    n_accepted: int
    n_total: int

    def to_rows(self):
        rows = []
        for name in self.means:
            for i, t in enumerate(self.times):
                rows.append(
                    {
                        "t": float(t),
                        "obs": name,
                        "mean": float(self.means[name][i]),
                        "sem": float(self.sems[name][i]),
                        "n_accepted": self.n_accepted,
                        "n_total": self.n_total,
                    }
                )
        return rows

    @classmethod
    def empty(cls, times, observables, n_total):
        nan = np.full(len(times), np.nan)
        return cls(
            times=np.asarray(times, dtype=float),
            means={name: nan.copy() for name in observables},
            sems={name: nan.copy() for name in observables},
            n_accepted=0,
            n_total=n_total,
        )


def _physics_rng(master_seed, index):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _detect_rng(master_seed, index):
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(index, _DETECT_STREAM_KEY))
    )


def run_ensemble(model, setup, cfg, psi0, observables=None):
    """Simulate ``cfg.n_traj`` independent trajectories and postselect.

    Returns ``(records, stats)`` where stats averages the accepted subset at
    the sample times (snapped to the step grid).  With zero accepted
    trajectories the stats object is empty (NaN means) rather than an error,
    so callers can report the rejection statistics.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    if observables is None:
        observables = _default_observables(model.dim)

    channels = build_effective_channels(model, setup)
    dt = _resolve_dt(cfg, channels, model)
    n_steps = int(round(cfg.t_max / dt))
    sample_idx = np.round(np.asarray(cfg.sample_times) / dt).astype(int)
    sample_idx = np.clip(sample_idx, 0, n_steps)
    snapped = sample_idx * dt

    u_nojump = channels.propagator(dt)
    gammas = np.array([c.gamma_op for c in channels.channels])  # (nc, d, d)
    n_ch = len(channels.channels)
    d = model.dim

    # slots[k] = positions in the sample axis that snap to step k
    slots: dict[int, list[int]] = {}
    for pos, k in enumerate(sample_idx):
        slots.setdefault(int(k), []).append(pos)

    records: list[TrajectoryRecord] = []
    for start in range(0, cfg.n_traj, _BATCH):
        n = min(_BATCH, cfg.n_traj - start)
        uniforms = np.empty((n, n_steps))
        for i in range(n):
            uniforms[i] = _physics_rng(cfg.master_seed, start + i).random(n_steps)

        psi = np.tile(psi0, (n, 1))
        sampled = np.empty((n, len(sample_idx), d), dtype=complex)
        events: list[list[JumpEvent]] = [[] for _ in range(n)]
        if 0 in slots:
            for pos in slots[0]:
                sampled[:, pos, :] = psi

        for k in range(n_steps):
            if n_ch:
                gpsi = np.einsum("cij,nj->cni", gammas, psi)
                probs = dt * np.einsum("cni,cni->cn", gpsi.conj(), gpsi).real
                cum = np.cumsum(probs, axis=0)  # (nc, n)
                u = uniforms[:, k]
                jumped = u < cum[-1]
            else:
                jumped = np.zeros(n, dtype=bool)

            nj = ~jumped
            psi[nj] = psi[nj] @ u_nojump.T
            psi[nj] /= np.linalg.norm(psi[nj], axis=1)[:, None]

            if jumped.any():
                t_event = (k + 1) * dt
                for i in np.flatnonzero(jumped):
                    c = int(np.searchsorted(cum[:, i], uniforms[i, k], side="right"))
                    new = gpsi[c, i]
                    nrm = np.linalg.norm(new)
                    if nrm < 1e-14:
                        raise RuntimeError(
                            f"norm collapse after jump of channel "
                            f"{channels.channels[c].channel}: dark state"
                        )
                    psi[i] = new / nrm
                    ch = channels.channels[c]
                    events[i].append(JumpEvent(t_event, ch.channel, ch.detector))

            if (k + 1) in slots:
                for pos in slots[k + 1]:
                    sampled[:, pos, :] = psi

        for i in range(n):
            counts: dict[int, int] = {}
            for ev in events[i]:
                counts[ev.detector] = counts.get(ev.detector, 0) + 1
            records.append(
                TrajectoryRecord(
                    index=start + i,
                    jump_events=tuple(events[i]),
                    sampled_states=sampled[i],
                    final_state=psi[i].copy(),
                    accepted=False,  # assigned below
                    n_jumps_by_detector=counts,
                )
            )

    if isinstance(setup, TwoDetector):
        accepted = postselect_two_detector(records)
    else:
        accepted = postselect_inefficient(records, setup.eta, cfg.master_seed)
    accepted_idx = {r.index for r in accepted}
    records = [
        TrajectoryRecord(
            index=r.index,
            jump_events=r.jump_events,
            sampled_states=r.sampled_states,
            final_state=r.final_state,
            accepted=r.index in accepted_idx,
            n_jumps_by_detector=r.n_jumps_by_detector,
        )
        for r in records
    ]
    kept = [r for r in records if r.accepted]
    if kept:
        stats = ensemble_average(kept, observables, snapped, n_total=len(records))
    else:
        stats = EnsembleStats.empty(snapped, observables, n_total=len(records))
    return records, stats


def _default_observables(dim):
    if dim == 2:
        from .lindblad import SIGMA_X, SIGMA_Y, SIGMA_Z

        return {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}
    return {"identity": np.eye(dim, dtype=complex)}


def postselect_two_detector(records):
    """Keep the trajectories with zero detector-2 clicks."""
    return [r for r in records if r.n_jumps_by_detector.get(2, 0) == 0]


def postselect_inefficient(records, eta, master_seed):
    """Thin perfect-counting records through a detector of efficiency eta.

    Each of the ``N_j`` jumps of a record draws one uniform from the record's
    detection stream; the trajectory is kept only if every draw exceeds eta
    (every jump went unnoticed).  Acceptance probability is ``(1-eta)**N_j``.
    """
    kept = []
    for r in records:
        nj = r.n_jumps
        if nj == 0:
            kept.append(r)
            continue
        draws = _detect_rng(master_seed, r.index).random(nj)
        if np.all(draws > eta):
            kept.append(r)
    return kept


def ensemble_average(records, observables, sample_times, n_total=None):
    """Mean and SEM of pure-state expectation values over the given records.

    SEM follows ``sqrt(<(x - <x>)^2>) / sqrt(N - 1)``; it is NaN for a single
    trajectory.
    """
    if not records:
        raise ValueError("ensemble_average requires at least one record")
    times = np.asarray(sample_times, dtype=float)
    states = np.stack([r.sampled_states for r in records])  # (N, n_t, d)
    if states.shape[1] != times.size:
        raise ValueError("records were sampled on a different time grid")
    n = len(records)
    means, sems = {}, {}
    for name, op in observables.items():
        vals = np.einsum("nti,ij,ntj->nt", states.conj(), op, states).real
        means[name] = vals.mean(axis=0)
        if n > 1:
            sems[name] = vals.std(axis=0) / np.sqrt(n - 1)
        else:
            sems[name] = np.full(times.size, np.nan)
    return EnsembleStats(
        times=times,
        means=means,
        sems=sems,
        n_accepted=n,
        n_total=n_total if n_total is not None else n,
    )
