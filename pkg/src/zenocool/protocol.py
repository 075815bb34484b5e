"""The Zeno cooling state machine.

One round = evolve for tau (unitary, or LME when a bath is attached), then
project the regulator onto the k lowest local-energy eigenstates and
post-select that outcome.  Only the post-selected branch is followed; the
conditional state is propagated deterministically and per-round conditional
probabilities are accumulated (with their logs, so long runs cannot
underflow).

When the embedded projector is a 0/1 diagonal (always the case for the Sz
eigenbasis used here), the post-measurement state lives on the projector
support, and the closed-system iteration is carried out on that subspace.
This is an exact algebraic restriction, not an approximation; the dense
path remains for general projectors and the open-system route.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .evolution import BathSpec, LindbladPropagator
from .hamiltonians import HamiltonianSpec, SystemLayout
from .qudit import (
    DensityMatrix,
    Projector,
    _partial_trace_array,
    _uhlmann_array,
    low_lying_mixture,
    projector,
    thermal_state,
)

EXTINCTION_THRESHOLD = 1e-14
DIAGONAL_PROJECTOR_TOL = 1e-13


class ExtinctionError(RuntimeError):
    """The post-selected branch died: a round's outcome probability fell below threshold."""

    def __init__(self, step: int, probability: float, partial: "TrajectoryRecord | None" = None):
        super().__init__(
            f"post-selected branch extinguished at step {step} (p = {probability:.3e})")
        self.step = step
        self.probability = probability
        self.partial = partial


@dataclass(frozen=True)
class ProtocolConfig:
    """Full specification of a cooling run.

    regulator_prep defaults to the projector rank; target_betas default to
    all-zero (infinite-temperature targets).  A bath switches the evolution
    between measurements from unitary to the local master equation.
    """

    layout: SystemLayout
    hamiltonian: HamiltonianSpec
    tau: float
    n_measurements: int
    rank: int
    regulator_prep: Optional[int] = None
    target_betas: Optional[tuple[float, ...]] = None
    bath: Optional[BathSpec] = None

    def __post_init__(self):
        d = self.layout.d
        if not 1 <= self.rank <= d:
            raise ValueError(f"projector rank {self.rank} out of range 1..{d}")
        if self.regulator_prep is not None and not 1 <= self.regulator_prep <= d:
            raise ValueError(f"regulator preparation rank {self.regulator_prep} out of range 1..{d}")
        if self.n_measurements < 0:
            raise ValueError("number of measurements must be >= 0")
        if self.target_betas is not None and len(self.target_betas) != self.layout.L:
            raise ValueError(
                f"target_betas has {len(self.target_betas)} entries for {self.layout.L} targets")
        if getattr(self.hamiltonian, "model", None) == "spin_star":
            if self.layout.topology != "star":
                raise ValueError("spin-star Hamiltonian requires the star layout")
        elif self.layout.topology != "chain":
            raise ValueError(f"{self.hamiltonian.model} Hamiltonian requires the chain layout")

    @property
    def prep_rank(self) -> int:
        return self.rank if self.regulator_prep is None else self.regulator_prep

    @property
    def betas(self) -> tuple[float, ...]:
        return (0.0,) * self.layout.L if self.target_betas is None else self.target_betas


@dataclass
class TrajectoryRecord:
    """Per-round fidelities and outcome probabilities of one post-selected run."""

    steps: np.ndarray                       # 1..N
    fidelities: np.ndarray                  # (N, L), target sites B_1..B_L
    step_probabilities: np.ndarray          # (N,) conditional per-round
    log_cumulative: np.ndarray              # (N,) sum of log step probabilities
    initial_fidelities: np.ndarray          # (L,)
    final_state: Optional[DensityMatrix] = None
    max_trace_drift: float = 0.0            # open-system runs only

    @property
    def cumulative_probabilities(self) -> np.ndarray:
        return np.multiply.accumulate(self.step_probabilities) if len(self.steps) \
            else np.array([])

    @property
    def cumulative_probability(self) -> float:
        return float(np.exp(self.log_cumulative[-1])) if len(self.steps) else 1.0


def initial_state(config: ProtocolConfig) -> DensityMatrix:
    """rho(0) = regulator low-lying mixture tensor thermal targets."""
    h = config.hamiltonian.h
    d = config.layout.d
    rho = low_lying_mixture(d, config.prep_rank, h).data
    for beta in config.betas:
        rho = np.kron(rho, thermal_state(d, h, beta).data)
    return DensityMatrix(rho, config.layout.dims)


def measurement_projector(config: ProtocolConfig) -> Projector:
    return projector(config.layout.d, config.rank, site=config.layout.regulator_site,
                     h=config.hamiltonian.h)


def target_state(config: ProtocolConfig) -> DensityMatrix:
    """The state each target is driven toward (the regulator preparation)."""
    return low_lying_mixture(config.layout.d, config.prep_rank, config.hamiltonian.h)


def apply_measurement(rho: DensityMatrix, proj: Projector,
                      threshold: float = EXTINCTION_THRESHOLD) -> tuple[DensityMatrix, float]:
    """Post-selected projective measurement: ((P x I) rho (P x I)/p, p)."""
    P = proj.embedded(rho.dims)
    out = P @ rho.data @ P
    p = float(np.trace(out).real)
    if p < threshold:
        raise ExtinctionError(step=1, probability=p)
    return DensityMatrix((out + out.conj().T) / (2 * p), rho.dims), p


@lru_cache(maxsize=8)
def _eigendecomposition(layout: SystemLayout, spec: HamiltonianSpec):
    H = spec.build(layout)
    lam, V = np.linalg.eigh(H)
    return lam, V


def _unitary(config: ProtocolConfig) -> np.ndarray:
    lam, V = _eigendecomposition(config.layout, config.hamiltonian)
    return (V * np.exp(-1j * lam * config.tau)) @ V.conj().T


def _diagonal_support(P: np.ndarray) -> Optional[np.ndarray]:
    """Indices of a 0/1 diagonal projector, or None if P is not of that form."""
    diag = np.diag(P)
    if np.max(np.abs(P - np.diag(diag))) > DIAGONAL_PROJECTOR_TOL:
        return None
    on = np.abs(diag - 1.0) < DIAGONAL_PROJECTOR_TOL
    off = np.abs(diag) < DIAGONAL_PROJECTOR_TOL
    if not np.all(on | off):
        return None
    return np.flatnonzero(on)


def zeno_run(config: ProtocolConfig, *, retain_state: bool = True,
             extinction_threshold: float = EXTINCTION_THRESHOLD) -> TrajectoryRecord:
    """Alternate evolution and post-selected rank-k measurement N times.

    Records per-round conditional probabilities, their running log-sum, and
    the Uhlmann fidelity of every target site against the regulator
    preparation.  Raises ExtinctionError (carrying the completed prefix) if
    a round's outcome probability drops below the threshold.
    """
    dims = config.layout.dims
    L = config.layout.L
    rho0 = initial_state(config)
    sigma = target_state(config).data
    P = measurement_projector(config).embedded(dims)

    def site_fidelities(rho_full: np.ndarray) -> np.ndarray:
        return np.array([
            _uhlmann_array(_partial_trace_array(rho_full, dims, [j]), sigma)
            for j in range(1, L + 1)])

    f0 = site_fidelities(rho0.data)
    N = config.n_measurements
    if N == 0:
        return TrajectoryRecord(
            steps=np.arange(0), fidelities=np.zeros((0, L)),
            step_probabilities=np.zeros(0), log_cumulative=np.zeros(0),
            initial_fidelities=f0, final_state=rho0 if retain_state else None)

    if config.bath is None:
        runner = _closed_rounds(config, rho0.data, P)
    else:
        runner = _open_rounds(config, rho0.data, P)

    fids = np.zeros((N, L))
    probs = np.zeros(N)
    logs = np.zeros(N)
    log_acc = 0.0
    drift = 0.0
    final = None
    for n, (rho_full, p, step_drift) in enumerate(runner, start=1):
        drift = max(drift, step_drift)
        if p < extinction_threshold:
            partial = TrajectoryRecord(
                steps=np.arange(1, n), fidelities=fids[: n - 1].copy(),
                step_probabilities=probs[: n - 1].copy(), log_cumulative=logs[: n - 1].copy(),
                initial_fidelities=f0, final_state=None, max_trace_drift=drift)
            raise ExtinctionError(step=n, probability=p, partial=partial)
        probs[n - 1] = p
        log_acc += np.log(p)
        logs[n - 1] = log_acc
        fids[n - 1] = site_fidelities(rho_full)
        if n == N:
            final = rho_full
    record = TrajectoryRecord(
        steps=np.arange(1, N + 1), fidelities=fids, step_probabilities=probs,
        log_cumulative=logs, initial_fidelities=f0,
        final_state=DensityMatrix((final + final.conj().T) / 2, dims) if retain_state else None,
        max_trace_drift=drift)
    return record


def _closed_rounds(config: ProtocolConfig, rho0: np.ndarray, P: np.ndarray):
    """Yield (normalized full-space rho, conditional p, 0.0) per round."""
    U = _unitary(config)
    D = U.shape[0]
    support = _diagonal_support(P)
    N = config.n_measurements
    if support is None:
        M = P @ U
        rho = rho0
        for _ in range(N):
            rho = M @ rho @ M.conj().T
            p = float(np.trace(rho).real)
            if p > 0:
                rho /= p
            yield rho, p, 0.0
        return
    # exact restriction to the projector support
    rows = U[support, :]
    rho_s = (rows @ rho0) @ rows.conj().T
    M = U[np.ix_(support, support)]
    full = np.zeros((D, D), dtype=complex)
    for n in range(N):
        if n > 0:
            rho_s = (M @ rho_s) @ M.conj().T
        p = float(np.trace(rho_s).real)
        if p > 0:
            rho_s /= p
        full[np.ix_(support, support)] = rho_s
        yield full, p, 0.0


def _open_rounds(config: ProtocolConfig, rho0: np.ndarray, P: np.ndarray):
    """LME evolution between measurements; yields trace drift per round."""
    bath = config.bath
    if bath.site is None:
        bath = BathSpec(temperature=bath.temperature, gamma=bath.gamma,
                        omega=bath.omega, site=config.layout.L)
    H = config.hamiltonian.build(config.layout)
    prop = LindbladPropagator(H, bath, config.layout.dims, config.tau)
    rho = rho0
    for _ in range(config.n_measurements):
        rho = prop.apply(rho)
        drift = abs(np.trace(rho).real - 1.0)
        rho = P @ rho @ P
        p = float(np.trace(rho).real)
        if p > 0:
            rho = (rho + rho.conj().T) / (2 * p)
        yield rho, p, drift


def direct_cumulative_probability(config: ProtocolConfig) -> float:
    """Tr[(P U)^N rho(0) (U^+ P)^N] evaluated literally (validation oracle)."""
    U = _unitary(config)
    P = measurement_projector(config).embedded(config.layout.dims)
    M = P @ U
    MN = np.linalg.matrix_power(M, config.n_measurements)
    return float(np.trace(MN @ initial_state(config).data @ MN.conj().T).real)


@dataclass
class ZenoSpectrum:
    """Spectral data of the nonunitary round map M = P U(tau)."""

    eigenvalues: np.ndarray          # sorted by descending modulus
    dominant_right: np.ndarray       # unit-norm right eigenvector of the top eigenvalue
    dominant_left: np.ndarray        # matching left eigenvector, <L|R> = 1
    dominant_is_simple: bool


def zeno_spectrum(config: ProtocolConfig) -> ZenoSpectrum:
    """General eigendecomposition of the round map (closed-system configs)."""
    if config.bath is not None:
        raise ValueError("the round-map spectrum is defined for closed-system configs")
    U = _unitary(config)
    P = measurement_projector(config).embedded(config.layout.dims)
    M = P @ U
    vals, R = np.linalg.eig(M)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    R = R[:, order]
    try:
        left_rows = np.linalg.inv(R)
    except np.linalg.LinAlgError:
        left_rows = np.linalg.pinv(R)
    simple = bool(len(vals) < 2 or abs(abs(vals[0]) - abs(vals[1])) > 1e-9)
    if not simple:
        warnings.warn("dominant eigenspace of the round map is not simple "
                      f"(|a0|={abs(vals[0]):.12f}, |a1|={abs(vals[1]):.12f})",
                      RuntimeWarning, stacklevel=2)
    r = R[:, 0]
    norm = np.linalg.norm(r)
    r = r / norm
    l = left_rows[0, :].conj() * norm
    return ZenoSpectrum(eigenvalues=vals, dominant_right=r, dominant_left=l,
                        dominant_is_simple=simple)


def delta_p(config: ProtocolConfig, k: int, *, matched_preparation: bool = True) -> float:
    """p_1^(k)(N) - p_1^(k-1)(N) from two full runs.

    With matched_preparation (default) each branch prepares the regulator as
    the mixture matching its own rank; otherwise both reuse config's
    preparation.
    """
    if k < 2:
        raise ValueError("rank difference needs k >= 2")
    if k > config.layout.d:
        raise ValueError(f"rank {k} exceeds local dimension {config.layout.d}")
    ps = []
    for rank in (k, k - 1):
        prep = None if matched_preparation else config.prep_rank
        variant = ProtocolConfig(
            layout=config.layout, hamiltonian=config.hamiltonian, tau=config.tau,
            n_measurements=config.n_measurements, rank=rank, regulator_prep=prep,
            target_betas=config.target_betas, bath=config.bath)
        ps.append(zeno_run(variant, retain_state=False).cumulative_probability)
    return ps[0] - ps[1]
