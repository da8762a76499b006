"""The ideal teleportation protocol built on a full Bell-state measurement.

The three-photon layout follows the experiment: photon 1 carries the
input polarization, photons 2 and 3 form the shared antisymmetric pair.
A Bell-state measurement on photons (1, 2) collapses photon 3 onto the
input state up to one of four known single-photon unitaries.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DimensionMismatch
from .states import (
    PAULI_I,
    PAULI_X,
    PAULI_Z,
    BellOutcome,
    DensityOperator,
    Operator,
    PolarizationSpec,
    PureState,
    bell_projectors,
    bell_state,
    embed_operator,
    measure_projective,
    partial_trace,
    tensor,
)

_OUTCOMES = list(BellOutcome)

# Conditional photon-3 states for input chi are -chi, -Z chi, X chi, XZ chi
# (in BellOutcome order), so these inverses restore chi up to global phase.
_CORRECTIONS = {
    BellOutcome.PSI_MINUS: PAULI_I,
    BellOutcome.PSI_PLUS: PAULI_Z,
    BellOutcome.PHI_MINUS: PAULI_X,
    BellOutcome.PHI_PLUS: PAULI_X @ PAULI_Z,
}

# Outcome on the middle pair -> Bell state of the outer pair when both
# source pairs start antisymmetric. Derived once from the density-matrix
# computation (see tests); the labels map onto themselves.
SWAP_OUTCOME_MAP = {kind: kind for kind in BellOutcome}

_EMBEDDED_PROJECTORS: dict[tuple[int, tuple[int, ...]], list[Operator]] = {}


def _bell_projectors_on(num_photons: int, targets: tuple[int, ...]) -> list[Operator]:
    key = (num_photons, targets)
    if key not in _EMBEDDED_PROJECTORS:
        _EMBEDDED_PROJECTORS[key] = [
            Operator(embed_operator(p.matrix, num_photons, targets))
            for p in bell_projectors()
        ]
    return _EMBEDDED_PROJECTORS[key]


def correction_table() -> dict[BellOutcome, Operator]:
    """Single-photon unitaries that undo each Bell outcome."""
    return {kind: Operator(_CORRECTIONS[kind]) for kind in BellOutcome}


def bsm(
    state3: PureState, rng: np.random.Generator
) -> tuple[BellOutcome, DensityOperator, float]:
    """Bell-state measurement on photons (1, 2) of a three-photon state.

    Samples one of the four Bell projectors with Born probabilities and
    returns ``(outcome, conditional photon-3 state, probability)``.
    """
    if state3.num_photons != 3:
        raise DimensionMismatch(f"bsm expects 3 photons, got {state3.num_photons}")
    projs = _bell_projectors_on(3, (1, 2))
    idx, collapsed, prob = measure_projective(state3, projs, rng)
    # trace out photons (1, 2) of the collapsed pure state directly
    block = collapsed.amplitudes.reshape(4, 2)
    rho3 = DensityOperator(1, block.T @ block.conj())
    return _OUTCOMES[idx], rho3, prob


def teleport(
    input: PolarizationSpec, rng: np.random.Generator
) -> tuple[BellOutcome, DensityOperator]:
    """Run the full protocol: BSM, classical outcome, conditioned correction.

    The corrected photon-3 state has fidelity 1 to the input for every
    outcome.
    """
    chi = input.state()
    joint = tensor(chi, bell_state(BellOutcome.PSI_MINUS))
    outcome, rho3, _ = bsm(joint, rng)
    u = _CORRECTIONS[outcome]
    corrected = DensityOperator(1, u @ rho3.matrix @ u.conj().T)
    return outcome, corrected


def teleport_postselected(
    input: PolarizationSpec, rng: np.random.Generator
) -> Optional[DensityOperator]:
    """Single-outcome variant: keep only the antisymmetric result.

    Returns the (correction-free) photon-3 state when the measurement
    lands on the antisymmetric outcome, else ``None``; success rate is
    1/4 regardless of the input polarization.
    """
    chi = input.state()
    joint = tensor(chi, bell_state(BellOutcome.PSI_MINUS))
    outcome, rho3, _ = bsm(joint, rng)
    if outcome is not BellOutcome.PSI_MINUS:
        return None
    return rho3


def entanglement_swap(
    rng: np.random.Generator,
) -> tuple[BellOutcome, DensityOperator]:
    """Teleport one member of an entangled pair, entangling the outer photons.

    Starts from two antisymmetric pairs (a,b) and (c,d), measures (b,c)
    in the Bell basis and returns ``(outcome, state of (a,d))``. The
    outer pair lands exactly in the Bell state labelled by the outcome
    (mapping fixed by ``SWAP_OUTCOME_MAP``).
    """
    psi = bell_state(BellOutcome.PSI_MINUS)
    joint = tensor(psi, psi)  # photons a=1, b=2, c=3, d=4
    projs = _bell_projectors_on(4, (2, 3))
    idx, collapsed, _ = measure_projective(joint, projs, rng)
    rho_ad = partial_trace(collapsed.density(), keep={1, 4})
    return _OUTCOMES[idx], rho_ad
