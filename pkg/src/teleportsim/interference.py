"""Linear-optics Bell-state analyzer with partial temporal distinguishability.

Two photons meeting at the 50:50 beam splitter are described by a single
mode-overlap parameter ``v`` in [0, 1]: with weight ``v**2`` they
interfere fully, with weight ``1 - v**2`` they route classically. That
mixture yields the two-outcome POVM

    coincidence  = (1 - v^2)/2 * I + v^2 * |psi-><psi-|
    same side    = I - coincidence

so a simultaneous detection behind the splitter projects onto the
antisymmetric polarization state exactly at ``v = 1`` and carries no
polarization information at ``v = 0``. ``bs_oracle`` provides the
independent check: a brute-force expansion of the two-photon
beam-splitter amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, ZeroProbability
from .states import (
    SWAP_2,
    BellOutcome,
    DensityOperator,
    Operator,
    PolarizationSpec,
    PureState,
    bell_state,
    embed_operator,
    partial_trace_matrix,
    tensor,
)

_PI_ANTI = np.outer(
    bell_state(BellOutcome.PSI_MINUS).amplitudes,
    bell_state(BellOutcome.PSI_MINUS).amplitudes.conj(),
)

# Beam-splitter conventions: rows = input port, columns = output port.
# Coincidence statistics are convention independent (tested).
_BS_MATRICES = {
    "phase": np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2),
    "real": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
}


@dataclass(frozen=True)
class ModeOverlapModel:
    """Maps the path delay between the two analyzer inputs to an overlap v.

    The Gaussian width is derived from the filter coherence time so that
    the two-detector coincidence dip (proportional to ``v**2``) has a
    FWHM equal to ``coherence_time_fs``. The pump pulse duration is
    recorded for documentation only; the model assumes it is much
    shorter than the coherence time.
    """

    shape: str = "gaussian"
    coherence_time_fs: float = 520.0
    pump_pulse_duration_fs: float = 200.0

    def __post_init__(self) -> None:
        if self.shape != "gaussian":
            raise OutOfRange(f"unsupported overlap shape {self.shape!r}")
        if self.coherence_time_fs <= 0:
            raise OutOfRange("coherence time must be positive")

    @property
    def scale_fs(self) -> float:
        """Gaussian scale of v(delay); the 1/e half-width of ``v**2``."""
        return self.coherence_time_fs / (2.0 * math.sqrt(math.log(2.0)))

    def overlap(self, delay_fs: float) -> float:
        """Indistinguishability v at a given delay (1 at zero, ->0 far out)."""
        x = delay_fs / self.scale_fs
        return math.exp(-0.5 * x * x)


def overlap(model: ModeOverlapModel, delay_fs: float) -> float:
    """Functional alias for ``model.overlap(delay_fs)``."""
    return model.overlap(delay_fs)


def _check_v(v: float) -> float:
    if not 0.0 <= v <= 1.0:
        raise OutOfRange(f"overlap v must lie in [0, 1], got {v!r}")
    return float(v)


@dataclass(frozen=True)
class CoincidencePovm:
    """Two-outcome POVM of the beam-splitter analyzer at overlap ``v``."""

    v: float

    def __post_init__(self) -> None:
        _check_v(self.v)

    @property
    def element_coinc(self) -> Operator:
        v2 = self.v**2
        return Operator(0.5 * ((1.0 - v2) * np.eye(4) + 2.0 * v2 * _PI_ANTI))

    @property
    def element_same_side(self) -> Operator:
        return Operator(np.eye(4) - self.element_coinc.matrix)


def coincidence_probability(rho12: DensityOperator, v: float) -> float:
    """Probability of one photon in each output port for a two-photon input.

    Equals ``(1 - v^2 * Tr[rho SWAP]) / 2``: 1/2 for distinguishable
    photons, down to the antisymmetric projection at full overlap.
    """
    _check_v(v)
    if rho12.num_photons != 2:
        raise OutOfRange("coincidence_probability expects a two-photon state")
    swap_expect = float(np.trace(rho12.matrix @ SWAP_2).real)
    return 0.5 * (1.0 - v**2 * swap_expect)


def conditional_state(
    rho123: DensityOperator, v: float
) -> tuple[float, DensityOperator]:
    """Condition a three-photon state on a coincidence behind the splitter.

    Returns the coincidence probability and the renormalized photon-3
    state; photons 1 and 2 are the analyzer inputs.
    """
    _check_v(v)
    if rho123.num_photons != 3:
        raise OutOfRange("conditional_state expects a three-photon state")
    element = embed_operator(CoincidencePovm(v).element_coinc.matrix, 3, (1, 2))
    weighted = element @ rho123.matrix
    prob = float(np.trace(weighted).real)
    if prob < 1e-15:
        raise ZeroProbability("coincidence probability is numerically zero")
    reduced = partial_trace_matrix(weighted, 3, [2]) / prob
    # symmetrize away the tiny non-Hermitian residue of E.rho
    reduced = 0.5 * (reduced + reduced.conj().T)
    return prob, DensityOperator(1, reduced)


def threefold_rates(chi: PolarizationSpec, v: float) -> tuple[float, float]:
    """Ideal per-event rates of the two analyzed threefold channels.

    For an input ``chi`` entering with one half of an antisymmetric pair,
    returns ``(p_orth, p_par)``: the joint probability of a coincidence
    with the receiving photon exiting the orthogonal-analysis port
    ``(1 - v^2)/4`` and the parallel port ``1/4``.
    """
    _check_v(v)
    chi_state = chi.state()
    rho = tensor(chi_state, bell_state(BellOutcome.PSI_MINUS)).density()
    prob, rho3 = conditional_state(rho, v)
    par = chi_state.amplitudes
    orth = chi.orthogonal().state().amplitudes
    p_par = prob * float(np.vdot(par, rho3.matrix @ par).real)
    p_orth = prob * float(np.vdot(orth, rho3.matrix @ orth).real)
    return p_orth, p_par


@dataclass(frozen=True)
class BeamSplitterOutput:
    """Brute-force output distribution of the two-photon beam splitter.

    Keys are unordered pairs of output modes ``(port, polarization,
    time-bin)`` with ports ``"f1"``/``"f2"``; values are probabilities.
    """

    distribution: dict

    @property
    def coincidence_probability(self) -> float:
        return sum(
            p
            for modes, p in self.distribution.items()
            if modes[0][0] != modes[1][0]
        )


def bs_oracle(
    state12: PureState, indistinguishable: bool, convention: str = "phase"
) -> BeamSplitterOutput:
    """Expand the 50:50 beam-splitter action on a two-photon input exactly.

    Photon 1 enters port a, photon 2 enters port b; ``state12`` is their
    joint polarization state. ``indistinguishable`` selects whether the
    photons share a time bin (interference) or occupy orthogonal bins
    (classical routing). Used as the independent oracle for the
    coincidence POVM at ``v = 1`` and ``v = 0``.
    """
    if state12.num_photons != 2:
        raise OutOfRange("bs_oracle expects a two-photon state")
    if convention not in _BS_MATRICES:
        raise OutOfRange(f"unknown beam-splitter convention {convention!r}")
    bs = _BS_MATRICES[convention]
    ports = ("f1", "f2")
    pols = ("H", "V")
    t1, t2 = (0, 0) if indistinguishable else (0, 1)

    amplitudes: dict[tuple, complex] = {}
    coeffs = state12.amplitudes.reshape(2, 2)
    for p in (0, 1):
        for q in (0, 1):
            if coeffs[p, q] == 0:
                continue
            for out1 in (0, 1):
                for out2 in (0, 1):
                    amp = coeffs[p, q] * bs[0, out1] * bs[1, out2]
                    mode1 = (ports[out1], pols[p], t1)
                    mode2 = (ports[out2], pols[q], t2)
                    key = tuple(sorted((mode1, mode2)))
                    amplitudes[key] = amplitudes.get(key, 0.0) + amp

    distribution = {}
    for key, amp in amplitudes.items():
        prob = abs(amp) ** 2
        if key[0] == key[1]:
            prob *= 2.0  # bosonic double occupation of one mode
        if prob > 1e-30:
            distribution[key] = prob
    return BeamSplitterOutput(distribution)
