"""Three-level Lambda system: master equation, steady state and CPT spectra.

Basis order is (|down>, |up>, |e>) where |e> is the D0X state reached from
|down> by the pump. All frequencies and rates share one unit (MHz); the
Hamiltonian is in the rotating frame of both lasers under the RWA::

    H = [[0,      0,       Op/2],
         [0,     -delta,   Os/2],
         [Op/2,   Os/2,   -Dp  ]]

with pump Rabi frequency Op, scan Rabi frequency Os, pump one-photon
detuning Dp and two-photon detuning delta.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .._validation import as_1d
from ..exceptions import InvalidParameterError, SingularGeneratorError
from ..levels import FieldConfig, two_photon_resonances
from ..species import DonorSpecies
from ..spectrum import Spectrum

DOWN, UP, EXC = 0, 1, 2
_I3 = np.eye(3, dtype=complex)


@dataclass(frozen=True)
class LambdaParams:
    rabi_pump: float
    rabi_scan: float
    gamma_rad: float
    delta_pump: float = 0.0
    delta_two_photon: float = 0.0
    gamma_spin_dephase: float = 0.0
    gamma_spin_flip: float = 0.0
    branching: float = 0.5

    def __post_init__(self):
        for name in ("rabi_pump", "rabi_scan", "gamma_spin_dephase",
                     "gamma_spin_flip"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if not self.gamma_rad > 0:
            raise InvalidParameterError("gamma_rad must be > 0")
        if not 0 <= self.branching <= 1:
            raise InvalidParameterError("branching must lie in [0, 1]")

    def with_(self, **changes) -> "LambdaParams":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class DensityMatrix3:
    rho: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def excited_population(self) -> float:
        return float(self.rho[EXC, EXC].real)

    def invariant_errors(self) -> dict:
        """Deviations from Hermiticity, unit trace and positivity."""
        herm = float(np.max(np.abs(self.rho - self.rho.conj().T)))
        trace = float(abs(np.trace(self.rho) - 1.0))
        eig_min = float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min())
        return {"hermiticity": herm, "trace": trace, "min_eigenvalue": eig_min}

    def check(self, tol=1e-10, eig_tol=1e-9) -> "DensityMatrix3":
        err = self.invariant_errors()
        if err["hermiticity"] > tol or err["trace"] > tol or err["min_eigenvalue"] < -eig_tol:
            raise ArithmeticError(f"density-matrix invariants violated: {err}")
        return self


def hamiltonian(p: LambdaParams) -> np.ndarray:
    H = np.zeros((3, 3), dtype=complex)
    H[UP, UP] = -p.delta_two_photon
    H[EXC, EXC] = -p.delta_pump
    H[DOWN, EXC] = H[EXC, DOWN] = 0.5 * p.rabi_pump
    H[UP, EXC] = H[EXC, UP] = 0.5 * p.rabi_scan
    return H


def _ket_bra(i, j):
    op = np.zeros((3, 3), dtype=complex)
    op[i, j] = 1.0
    return op


def collapse_operators(p: LambdaParams) -> list[np.ndarray]:
    ops = [
        np.sqrt(p.branching * p.gamma_rad) * _ket_bra(DOWN, EXC),
        np.sqrt((1.0 - p.branching) * p.gamma_rad) * _ket_bra(UP, EXC),
    ]
    if p.gamma_spin_dephase > 0:
        # sqrt(g/2) * (|d><d| - |u><u|) damps rho_du at rate g
        z = _ket_bra(DOWN, DOWN) - _ket_bra(UP, UP)
        ops.append(np.sqrt(0.5 * p.gamma_spin_dephase) * z)
    if p.gamma_spin_flip > 0:
        ops.append(np.sqrt(p.gamma_spin_flip) * _ket_bra(UP, DOWN))
        ops.append(np.sqrt(p.gamma_spin_flip) * _ket_bra(DOWN, UP))
    return ops


def liouvillian(p: LambdaParams) -> np.ndarray:
    """9x9 generator acting on row-major vec(rho)."""
    H = hamiltonian(p)
    L = -1j * (np.kron(H, _I3) - np.kron(_I3, H.T))
    for c in collapse_operators(p):
        cdc = c.conj().T @ c
        L += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, _I3) - 0.5 * np.kron(_I3, cdc.T)
    return L


def _steady_state_batch(p: LambdaParams, deltas, rtol=1e-11) -> np.ndarray:
    """Stationary states for many two-photon detunings, shape (n, 3, 3).

    The generator is affine in the two-photon detuning, so one base
    Liouvillian plus a detuning term is solved as a stacked linear system.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=np.float64))
    L0 = liouvillian(p.with_(delta_two_photon=0.0))
    dH = np.zeros((3, 3), dtype=complex)
    dH[UP, UP] = -1.0
    dL = -1j * (np.kron(dH, _I3) - np.kron(_I3, dH.T))
    Ls = L0[None, :, :] + deltas[:, None, None] * dL[None, :, :]
    sv = np.linalg.svd(Ls, compute_uv=False)
    if np.any(sv[:, -2] <= rtol * sv[:, 0]):
        raise SingularGeneratorError(
            "the Liouvillian has more than one stationary state; add spin "
            "flips or drive both ground states"
        )
    Ms = Ls.copy()
    Ms[:, 0, :] = _I3.reshape(-1)
    rhs = np.zeros((deltas.size, 9, 1), dtype=complex)
    rhs[:, 0, 0] = 1.0
    return np.linalg.solve(Ms, rhs).reshape(-1, 3, 3)


def steady_state_density(p: LambdaParams) -> DensityMatrix3:
    """Unique stationary state of the master equation.

    Solves L vec(rho) = 0 with the first row replaced by the trace
    constraint. A null space of dimension > 1 (detected from the singular
    values of L) raises :class:`SingularGeneratorError`.
    """
    return DensityMatrix3(_steady_state_batch(p, p.delta_two_photon)[0])


def cpt_steady_state(p: LambdaParams) -> tuple[float, float]:
    """(excited population, fluorescence rate gamma_rad * rho_ee)."""
    rho_ee = steady_state_density(p).excited_population
    return rho_ee, p.gamma_rad * rho_ee


def propagate(p: LambdaParams, t_eval, rho0=None, rtol=1e-10, atol=1e-13):
    """Integrate the master equation with an explicit adaptive Runge-Kutta
    (DOP853) scheme. Returns density matrices at ``t_eval``, shape (n, 3, 3).

    ``rho0`` defaults to the maximally mixed ground state.
    """
    if rho0 is None:
        rho0 = np.diag([0.5, 0.5, 0.0]).astype(complex)
    L = liouvillian(p)
    t_eval = as_1d(t_eval, "t_eval")
    sol = solve_ivp(
        lambda t, y: L @ y,
        (0.0, float(t_eval[-1])),
        np.asarray(rho0, dtype=complex).reshape(-1),
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise ArithmeticError(sol.message)
    return sol.y.T.reshape(-1, 3, 3)


def cpt_spectrum(species: DonorSpecies, field: FieldConfig, p: LambdaParams,
                 scan_detunings) -> Spectrum:
    """Fluorescence vs two-photon scan detuning, averaged over m_I.

    The scan axis (MHz) is measured from the center of the Raman comb,
    i.e. from g_e mu_B B / h. Every nuclear sublevel gets equal weight and
    sees the two-photon detuning shifted by its resonance offset; nuclear
    spin is conserved in the optical cycle. ``p.delta_two_photon`` is
    ignored.
    """
    res = two_photon_resonances(species, field)
    offsets = res - res.mean()
    scan = as_1d(scan_detunings, "scan_detunings")
    fluo = np.zeros_like(scan)
    # fixed summation order over sublevels keeps results order-independent
    for off in offsets:
        rho = _steady_state_batch(p, scan - off)
        fluo = fluo + p.gamma_rad * rho[:, EXC, EXC].real
    fluo /= offsets.size
    return Spectrum(scan, fluo, "MHz", {
        "kind": "cpt", "species": species.name, "B_T": repr(field.B),
    })
