"""Stroboscopic evolution engines, without restart.

Three routes to the same bookkeeping:

* ``measured_evolution`` runs the projected dynamics: a unitary step of
  length ``tau`` followed by recording and zeroing the amplitude at the
  detector site.  The state stays unnormalized, so its squared norm is
  the survival probability.
* ``renewal_amplitudes`` computes first-detection amplitudes from the
  recursion that subtracts, from the free transition amplitude, every
  earlier first-arrival propagated back to the detector.  It is the
  independent cross-check for the projected route.
* ``nh_survival_series`` replaces projection by a dissipative generator
  and reads survival off the decaying norm.

All engines advance states by repeated application of one cached
single-step matrix (O(n_max L^2)); no matrix powers are stored.
Measurements happen at t = tau, 2 tau, ...; there is no measurement at
t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryContaminationError
from .lattice import LatticeSpec, ModelKind, initial_state, step_propagator

__all__ = [
    "DetectionSeries",
    "RenewalSeries",
    "measured_evolution",
    "renewal_amplitudes",
    "nh_survival_series",
]

#: Sites of slack between the ballistic front and the chain edge.
BULK_MARGIN = 5

#: Maximal group velocity of the cosine band, in sites per unit time.
FRONT_SPEED = 2.0


@dataclass
class DetectionSeries:
    """Per-measurement detection bookkeeping for one run.

    Index ``k`` of each array holds measurement ``n = k + 1``; the
    ``n = 0`` anchor ``P_0 = 1`` is implicit.  ``p`` is the probability
    of first detection at the n-th measurement, ``P`` the survival
    probability after it (``P_n = P_{n-1} - p_n``), and ``Pdet`` the
    integrated detection probability up to it.  ``Pdet`` accumulates
    ``p`` directly where the engine provides exact per-step masses, so
    a detection probability of 1e-20 stays representable instead of
    vanishing into ``1 - P``.
    """

    tau: float
    p: np.ndarray
    P: np.ndarray
    Pdet: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.p)

    @property
    def times(self) -> np.ndarray:
        """Measurement instants n * tau, n = 1..n_max."""
        return self.tau * np.arange(1, len(self.p) + 1)

    @classmethod
    def from_pmf(cls, tau: float, p: np.ndarray) -> "DetectionSeries":
        """Build a series from a bare first-detection PMF (mostly for tests)."""
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("p must be a non-empty 1-d array")
        if np.any(p < 0):
            raise ValueError("detection probabilities must be non-negative")
        pdet = np.cumsum(p)
        if pdet[-1] > 1 + 1e-10:
            raise ValueError(f"PMF sums to {pdet[-1]}, above 1")
        return cls(tau=tau, p=p, P=1.0 - pdet, Pdet=pdet)


@dataclass
class RenewalSeries:
    """First-detection amplitudes; |amplitudes[k]|^2 matches p_{k+1}."""

    tau: float
    amplitudes: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.amplitudes)


def _check_run_args(tau: float, n_max: int) -> None:
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")


def _check_bulk_window(spec: LatticeSpec, tau: float, n_max: int) -> None:
    # Front speed 2 from the middle; reflections off the edge contaminate
    # everything after that, so refuse horizons that reach it.
    horizon = FRONT_SPEED * n_max * tau
    limit = min(spec.initial_index, spec.L - spec.initial_index) - BULK_MARGIN
    if not horizon < limit:
        raise BoundaryContaminationError(
            f"horizon {n_max}*tau reaches the chain edge "
            f"(front travels {horizon:.1f} sites, room for {limit}); "
            f"shorten the run, enlarge L, or pass bulk_guard=False"
        )


def measured_evolution(
    spec: LatticeSpec, tau: float, n_max: int, bulk_guard: bool = True
) -> DetectionSeries:
    """Projected dynamics: unitary step, record detector amplitude, zero it.

    The detection probability of step ``n`` is read from the state just
    before the projection, then the survivor is carried forward
    unnormalized.  ``bulk_guard=False`` permits runs whose ballistic
    front reaches the boundary (small closed chains, reflection studies).
    """
    _check_run_args(tau, n_max)
    if bulk_guard:
        _check_bulk_window(spec, tau, n_max)
    u = step_propagator(spec, ModelKind.EXACT, tau).matrix
    s0 = spec.detector_index - 1
    phi = initial_state(spec)
    p = np.empty(n_max)
    surv = np.empty(n_max)
    remaining = 1.0
    for k in range(n_max):
        psi = u @ phi
        amp = psi[s0]
        pk = amp.real**2 + amp.imag**2
        psi[s0] = 0.0
        remaining -= pk
        p[k] = pk
        surv[k] = remaining
        phi = psi
    return DetectionSeries(tau=tau, p=p, P=surv, Pdet=np.cumsum(p))


def renewal_amplitudes(spec: LatticeSpec, tau: float, n_max: int) -> RenewalSeries:
    """First-detection amplitudes from the renewal recursion.

    psi_n = <s|U(n tau)|psi_0> - sum_{m<n} <s|U((n-m) tau)|s> psi_m,

    with U(k tau) applied as the k-th power of the cached step matrix.
    Only the two scalar sequences (transition and return amplitudes) are
    kept; no propagator powers are stored.
    """
    _check_run_args(tau, n_max)
    u = step_propagator(spec, ModelKind.EXACT, tau).matrix
    s0 = spec.detector_index - 1
    v = initial_state(spec)
    w = np.zeros(spec.L, dtype=np.complex128)
    w[s0] = 1.0
    transition = np.empty(n_max, dtype=np.complex128)
    ret = np.empty(n_max, dtype=np.complex128)
    for k in range(n_max):
        v = u @ v
        w = u @ w
        transition[k] = v[s0]
        ret[k] = w[s0]
    psi = np.empty(n_max, dtype=np.complex128)
    for n in range(1, n_max + 1):
        acc = transition[n - 1]
        if n > 1:
            # ret[n-m-1] pairs with psi[m-1] for m = 1..n-1
            acc -= np.dot(ret[: n - 1][::-1], psi[: n - 1])
        psi[n - 1] = acc
    return RenewalSeries(tau=tau, amplitudes=psi)


def nh_survival_series(
    spec: LatticeSpec,
    kind: ModelKind,
    tau: float,
    n_max: int,
    bulk_guard: bool = True,
) -> DetectionSeries:
    """Survival under a dissipative generator, read off the decaying norm.

    P_n is the squared norm after n applications of the single-step
    contraction; p_n and Pdet_n follow from the same bookkeeping as the
    projected engine.
    """
    if kind is ModelKind.EXACT:
        raise ValueError("kind must be one of the dissipative models")
    _check_run_args(tau, n_max)
    if bulk_guard:
        _check_bulk_window(spec, tau, n_max)
    a = step_propagator(spec, kind, tau).matrix
    phi = initial_state(spec)
    p = np.empty(n_max)
    surv = np.empty(n_max)
    prev = 1.0
    for k in range(n_max):
        phi = a @ phi
        pk = np.vdot(phi, phi).real
        surv[k] = pk
        p[k] = prev - pk
        prev = pk
    return DetectionSeries(tau=tau, p=p, P=surv, Pdet=1.0 - surv)
