"""Tight-binding chain operators and their dense propagators.

Single-particle sector throughout: every operator is a dense L x L matrix
acting on site amplitudes.  The public interface labels sites 1..L; the
arrays underneath are 0-based.  The hopping amplitude is fixed at 1 and
hbar = 1, so energies are in hopping units and times in inverse hopping
units.

Three generators are provided:

* the Hermitian open-chain Hamiltonian ``H`` with bonds (j, j+1) for
  j = 1..L-1 and no wrap-around bond,
* a dissipative variant ("model 1") obtained by deleting the two bonds
  that touch the detector site ``s`` and coupling its neighbours through
  an anti-Hermitian bridge proportional to the measurement step ``tau``,
* a dissipative variant ("model 2") that keeps the full hopping and adds
  an imaginary on-site potential ``-2i/tau`` at ``s``.

Propagators ``e^{-iMt}`` use a spectral decomposition when the generator
is Hermitian and scaling-and-squaring with a degree-13 Pade approximant
otherwise; the dissipative generators are non-normal, so their eigenbasis
is not a safe route.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ExpmScalingError

__all__ = [
    "ModelKind",
    "LatticeSpec",
    "EvolutionOperator",
    "build_tb_hamiltonian",
    "build_model1_heff",
    "build_model2_heff",
    "build_hamiltonian",
    "propagator",
    "step_propagator",
    "initial_state",
]

#: Max-norm tolerance below which a matrix counts as Hermitian.
HERMITIAN_TOL = 1e-12

# Degree-13 Pade coefficients and the matching 1-norm threshold
# (Higham's scaling-and-squaring constants).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152
_MAX_SQUARINGS = 64


class ModelKind(enum.Enum):
    """Which generator drives a run: the Hermitian chain or a dissipative stand-in."""

    EXACT = "exact"
    MODEL1 = "model1"
    MODEL2 = "model2"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a run: chain length, detector site, and initial site.

    Site indices are 1-based.  ``L`` must be even, which keeps the middle
    site ``L/2`` well defined for the default initial condition.
    """

    L: int
    detector_index: int
    initial_index: int

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ValueError(f"chain length must be at least 2, got L={self.L}")
        if self.L % 2 != 0:
            raise ValueError(f"chain length must be even, got L={self.L}")
        if not 1 <= self.detector_index <= self.L:
            raise ValueError(
                f"detector_index {self.detector_index} outside 1..{self.L}"
            )
        if not 1 <= self.initial_index <= self.L:
            raise ValueError(
                f"initial_index {self.initial_index} outside 1..{self.L}"
            )


@dataclass(frozen=True)
class EvolutionOperator:
    """A dense propagator over one time interval, with its provenance.

    ``tau`` records the measurement step the generator was built with,
    which for the dissipative kinds also fixes their dissipation
    strength; for the Hermitian chain it is simply the step propagated.
    """

    matrix: np.ndarray
    dt: float
    kind: ModelKind
    is_unitary: bool
    tau: float | None = None


def initial_state(spec: LatticeSpec) -> np.ndarray:
    """Unit amplitude on the initial site, zero elsewhere."""
    psi = np.zeros(spec.L, dtype=np.complex128)
    psi[spec.initial_index - 1] = 1.0
    return psi


def build_tb_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Open-chain hopping Hamiltonian: ones on the first off-diagonals."""
    L = spec.L
    h = np.zeros((L, L), dtype=np.float64)
    idx = np.arange(L - 1)
    h[idx, idx + 1] = 1.0
    h[idx + 1, idx] = 1.0
    return h


def build_model1_heff(spec: LatticeSpec, tau: float) -> np.ndarray:
    """Dissipative generator with the detector site cut out of the chain.

    The two bonds (s-1, s) and (s, s+1) are removed from the hopping
    part, and the detector's neighbours acquire an anti-Hermitian block

        -(i tau / 2) (|s-1><s+1| + |s+1><s-1| + |s-1><s-1| + |s+1><s+1|),

    whose strength grows linearly with the measurement step.  Requires
    2 <= s <= L-1 so that both neighbours exist.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    s = spec.detector_index
    if not 2 <= s <= spec.L - 1:
        raise ValueError(
            f"detector_index {s} is at the chain edge; both neighbours are needed"
        )
    s0 = s - 1
    h = build_tb_hamiltonian(spec).astype(np.complex128)
    # cut the two bonds touching the detector site
    h[s0 - 1, s0] = h[s0, s0 - 1] = 0.0
    h[s0, s0 + 1] = h[s0 + 1, s0] = 0.0
    g = -0.5j * tau
    h[s0 - 1, s0 + 1] += g
    h[s0 + 1, s0 - 1] += g
    h[s0 - 1, s0 - 1] += g
    h[s0 + 1, s0 + 1] += g
    return h


def build_model2_heff(spec: LatticeSpec, tau: float) -> np.ndarray:
    """Full hopping plus the imaginary on-site potential -2i/tau at the detector.

    The potential strength is tied to the measurement step internally;
    callers never supply it separately.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    h = build_tb_hamiltonian(spec).astype(np.complex128)
    h[spec.detector_index - 1, spec.detector_index - 1] = -2.0j / tau
    return h


def build_hamiltonian(
    spec: LatticeSpec, kind: ModelKind, tau: float | None = None
) -> np.ndarray:
    """Dispatch to the generator for ``kind``; dissipative kinds need ``tau``."""
    if kind is ModelKind.EXACT:
        return build_tb_hamiltonian(spec)
    if tau is None:
        raise ValueError(f"{kind.value} requires the measurement step tau")
    if kind is ModelKind.MODEL1:
        return build_model1_heff(spec, tau)
    if kind is ModelKind.MODEL2:
        return build_model2_heff(spec, tau)
    raise ValueError(f"unknown model kind: {kind!r}")


def _expm(a: np.ndarray) -> np.ndarray:
    """exp(a) by scaling-and-squaring with the degree-13 Pade approximant."""
    norm1 = np.linalg.norm(a, 1)
    squarings = 0
    if norm1 > _THETA13:
        squarings = int(np.ceil(np.log2(norm1 / _THETA13)))
        if squarings > _MAX_SQUARINGS:
            raise ExpmScalingError(
                f"matrix 1-norm {norm1:.3e} needs {squarings} squarings "
                f"(cap {_MAX_SQUARINGS}); generator looks pathological"
            )
        a = a / (2.0**squarings)
    b = _PADE13
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * ident
    )
    f = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        f = f @ f
    return f


def propagator(
    matrix: np.ndarray,
    t: float,
    hermitian: bool,
    kind: ModelKind = ModelKind.EXACT,
    tau: float | None = None,
) -> EvolutionOperator:
    """Dense propagator ``e^{-i M t}`` for the generator ``matrix``.

    With ``hermitian=True`` the exponential goes through the spectral
    decomposition of ``M`` and the result is unitary; the input is
    checked and rejected if it is not Hermitian to within
    ``HERMITIAN_TOL``.  Otherwise the Pade route is used.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"generator must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("generator has non-finite entries")
    if t <= 0:
        raise ValueError(f"propagation time must be positive, got {t}")
    if hermitian:
        defect = np.max(np.abs(m - m.conj().T))
        if defect > HERMITIAN_TOL:
            raise ValueError(
                f"Hermitian path requested but max |M - M^dag| = {defect:.3e}"
            )
        w, q = np.linalg.eigh(m)
        u = (q * np.exp(-1j * w * t)) @ q.conj().T
    else:
        u = _expm(-1j * t * np.asarray(m, dtype=np.complex128))
    u.flags.writeable = False
    return EvolutionOperator(u, dt=t, kind=kind, is_unitary=hermitian, tau=tau)


@lru_cache(maxsize=None)
def step_propagator(spec: LatticeSpec, kind: ModelKind, tau: float) -> EvolutionOperator:
    """Single-measurement-step propagator, computed once per (spec, kind, tau).

    Stroboscopic engines advance states by repeated multiplication with
    this one matrix; powers are never re-exponentiated, which keeps the
    exact and dissipative runs numerically consistent with each other.
    """
    h = build_hamiltonian(spec, kind, tau)
    return propagator(h, tau, hermitian=(kind is ModelKind.EXACT), kind=kind, tau=tau)
