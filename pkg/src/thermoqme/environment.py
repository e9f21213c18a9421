"""Classical environment models.

A heat bath characterized by its energy alone: either an infinite reservoir
at fixed temperature, or a finite bath with constant heat capacity whose
temperature follows its energy.  The bath's dissipative bracket yields the
friction and diffusion rates of every bath-coupled channel, and the energy
exchange with the quantum subsystem closes the coupled dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .operators import (
    NATURAL,
    PhysicalConstants,
    _modified_in_basis,
    _pairwise_log_mean,
)
from .master_equation import QuantumSystem, energy_expectation

__all__ = [
    "HeatBath",
    "InfiniteBathError",
    "EnvironmentObservableReport",
    "bind_bath_rates",
    "environment_rhs",
    "total_energy",
]


class InfiniteBathError(ValueError):
    """Raised when a quantity that needs a finite bath is requested of an
    infinite reservoir."""


@dataclass(frozen=True)
class HeatBath:
    """Classical heat bath with spontaneous-emission-style coupling.

    ``kind`` is "infinite" (fixed temperature ``T_e``) or "finite" (constant
    heat capacity ``C_e``, entropy C_e ln(H_e/H_ref), hence temperature
    H_e/C_e).  ``gamma0`` is the emission rate and ``omega_ref`` the angular
    frequency entering the bracket; together they set the channel rates.

    ``H_e`` is the bath energy.  For a finite bath it is the thermodynamic
    state variable and must stay positive; for an infinite bath it is a
    bookkeeping accumulator of the heat received (starting at 0 by default),
    which keeps total-energy and entropy monitors meaningful.

    Instances are immutable snapshots; evolution produces new ones via
    :meth:`with_energy`.
    """

    kind: str
    gamma0: float
    omega_ref: float
    T_e: float | None = None
    C_e: float | None = None
    H_ref: float | None = None
    H_e: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("infinite", "finite"):
            raise ValueError(f"bath kind must be 'infinite' or 'finite', got {self.kind!r}")
        if self.gamma0 < 0.0:
            raise ValueError("gamma0 must be nonnegative")
        if self.omega_ref <= 0.0:
            raise ValueError("omega_ref must be positive")
        if self.kind == "infinite":
            if self.T_e is None or self.T_e <= 0.0:
                raise ValueError("infinite bath requires a positive temperature T_e")
        else:
            if self.C_e is None or self.C_e <= 0.0:
                raise ValueError("finite bath requires a positive heat capacity C_e")
            if self.H_ref is None or self.H_ref <= 0.0:
                raise ValueError("finite bath requires a positive reference energy H_ref")
            if self.H_e <= 0.0:
                raise ValueError(f"finite bath energy must stay positive, got H_e={self.H_e}")

    @classmethod
    def infinite(cls, T_e: float, gamma0: float, omega_ref: float, H_e: float = 0.0) -> "HeatBath":
        return cls(kind="infinite", gamma0=gamma0, omega_ref=omega_ref, T_e=T_e, H_e=H_e)

    @classmethod
    def finite(
        cls,
        C_e: float,
        H_e: float,
        gamma0: float,
        omega_ref: float,
        H_ref: float | None = None,
    ) -> "HeatBath":
        # Default reference energy is the initial energy, so entropy starts at 0.
        return cls(
            kind="finite",
            gamma0=gamma0,
            omega_ref=omega_ref,
            C_e=C_e,
            H_ref=H_e if H_ref is None else H_ref,
            H_e=H_e,
        )

    def temperature(self) -> float:
        """Instantaneous bath temperature; H_e/C_e for the finite bath."""
        if self.kind == "infinite":
            return float(self.T_e)
        return self.H_e / self.C_e

    def entropy(self) -> float:
        """Bath entropy relative to its reference point.

        Finite bath: C_e ln(H_e/H_ref).  Infinite bath: H_e/T_e, the heat
        received divided by the fixed temperature.
        """
        if self.kind == "infinite":
            return self.H_e / self.T_e
        return self.C_e * math.log(self.H_e / self.H_ref)

    def with_energy(self, H_e: float) -> "HeatBath":
        """New snapshot with updated energy (validates positivity for finite baths)."""
        return replace(self, H_e=H_e)

    def channel_rates(self, constants: PhysicalConstants = NATURAL) -> tuple[float, float]:
        """(friction_rate, diffusion_rate) from the bath bracket at the current state.

        friction = gamma0 k_B / (hbar omega_ref),
        diffusion = gamma0 k_B T / (hbar omega_ref) = T * friction,
        so the bath-equilibrium condition holds identically at the bath's own
        temperature.  Both rates are nonnegative; for a finite bath they move
        with the temperature as energy is exchanged.
        """
        base = self.gamma0 * constants.kB / (constants.hbar * self.omega_ref)
        return base, base * self.temperature()


@dataclass(frozen=True)
class EnvironmentObservableReport:
    """Snapshot of the bath observables along a trajectory."""

    H_e: float
    T_e: float
    S_e: float
    energy_flux_to_quantum: float


def bind_bath_rates(system: QuantumSystem, bath: HeatBath) -> QuantumSystem:
    """Materialize the rates of every bath-coupled channel from the bath state.

    Channels with fixed rates are passed through unchanged.  Bath-coupled
    channels get weight * (friction, diffusion) evaluated at the bath's
    current temperature, which is what makes the master equation's
    coefficients time dependent when the bath is finite.
    """
    if not any(ch.bath_coupled for ch in system.channels):
        return system
    f, d = bath.channel_rates(system.constants)
    if all(
        ch.friction_rate == ch.weight * f and ch.diffusion_rate == ch.weight * d
        for ch in system.channels
        if ch.bath_coupled
    ):
        return system  # rates already current (always the case for infinite baths)
    channels = tuple(
        replace(ch, friction_rate=ch.weight * f, diffusion_rate=ch.weight * d)
        if ch.bath_coupled
        else ch
        for ch in system.channels
    )
    return replace(system, channels=channels)


def environment_rhs(bath: HeatBath, rho, system: QuantumSystem) -> float:
    """Rate of change of the bath energy, dH_e/dt.

    For a heat bath the reversible part and the purely classical dissipative
    part vanish by degeneracy, leaving only the exchange terms:

        - (1/k_B) sum_j friction_j * <<[H, Q_j]; [H, Q_j]>>
        +         sum_j diffusion_j * <[Q_j, [Q_j, H]]>

    evaluated with the canonical correlation and the plain average.  Summed
    with d<H>/dt from the master equation this is zero at every state: the
    two subsystems only exchange energy.
    """
    rated = bind_bath_rates(system, bath)
    return _exchange_flux(np.asarray(rho, dtype=complex), rated)


def _exchange_flux(rho: np.ndarray, rated: QuantumSystem) -> float:
    """environment_rhs after rate binding; shares one eigendecomposition of
    rho across the channel correlations."""
    H = rated.H
    kB = rated.constants.kB
    flux = 0.0
    basis = weights = None
    for ch in rated.channels:
        if ch.friction_rate == 0.0 and ch.diffusion_rate == 0.0:
            continue
        Q = ch.Q
        qh = Q @ H - H @ Q
        if ch.friction_rate != 0.0:
            # <<[H,Q];[H,Q]>> = <<[Q,H];[Q,H]>> since the correlation is quadratic.
            if basis is None:
                basis = np.linalg.eigh(rho)
                weights = _pairwise_log_mean(basis[0])
            modified = _modified_in_basis(basis[0], basis[1], qh, weights)
            flux -= (ch.friction_rate / kB) * float(np.real(np.trace(modified @ qh)))
        if ch.diffusion_rate != 0.0:
            double = Q @ qh - qh @ Q
            flux += ch.diffusion_rate * float(np.real(np.trace(rho @ double)))
    return flux


def total_energy(bath: HeatBath, rho, H) -> float:
    """tr(H rho) + H_e for a finite (closed-total) system.

    Raises :class:`InfiniteBathError` for an infinite reservoir, whose total
    energy is not a meaningful observable.
    """
    if bath.kind == "infinite":
        raise InfiniteBathError(
            "total energy is not defined for an infinite bath; "
            "use the trajectory's bookkeeping monitor instead"
        )
    return energy_expectation(rho, H) + bath.H_e
