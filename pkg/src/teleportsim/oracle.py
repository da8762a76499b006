"""Exact rate enumeration and calibration solvers.

``analytic_rates`` walks every emission configuration (up to two pairs
per pass), preparation outcome and analyzer branch, computing outcome
probabilities by density-matrix algebra with the analyzer POVM. It
shares only the model definition with the Monte Carlo engine, not its
sampling shortcuts, and serves as the engine's statistical gate.
"""

from __future__ import annotations

import math
from dataclasses import replace
from itertools import product

import numpy as np

from .config import ExperimentConfig, PreparationConfig, SourceConfig
from .errors import NoSolution, TooManyPairs
from .experiment import CHANNELS
from .interference import CoincidencePovm
from .states import (
    BellOutcome,
    PolarizationSpec,
    bell_state,
    embed_operator,
    partial_trace_matrix,
)

_BISECT_STEPS = 100


def _click(count: int, eta: float) -> float:
    """Probability of at least one registration from ``count`` photons."""
    return 1.0 - (1.0 - eta) ** count


def analytic_rates(config: ExperimentConfig, delay_fs: float) -> dict[str, float]:
    """Exact per-pulse probabilities of every tallied channel at one delay."""
    return rates_at_overlap(config, config.effective_overlap(delay_fs))


def rates_at_overlap(config: ExperimentConfig, v: float) -> dict[str, float]:
    """Exact channel probabilities at a given overlap value."""
    if config.source.max_pairs_per_pass > 2:
        raise TooManyPairs(
            "exact enumeration supports at most two pairs per pass, got "
            f"{config.source.max_pairs_per_pass}"
        )
    pmf1 = config.source.pmf(1)
    pmf2 = config.source.pmf(2)
    det = config.detectors
    chi = config.prep.chi.state().amplitudes
    par = config.analysis_basis[0].state().amplitudes
    orth = config.analysis_basis[1].state().amplitudes

    # polarizer transmission for one member of an antisymmetric pair,
    # from the reduced state (= 1/2 for every chi)
    pair_rho = bell_state(BellOutcome.PSI_MINUS).density().matrix
    member = partial_trace_matrix(pair_rho, 2, [0])
    q_prep = float(np.vdot(chi, member @ chi).real)

    acc = {ch: 0.0 for ch in CHANNELS}
    cache: dict[tuple[int, int], dict[str, float]] = {}
    for m, pm in enumerate(pmf2):
        acc["p"] += pm * _click(m, det.p)
        p_trig = _click(m, det.p)
        for k, pk in enumerate(pmf1):
            if config.block_photon1_path:
                prep_weights = [(0, 1.0)]
            else:
                prep_weights = [
                    (n_a, math.comb(m, n_a) * q_prep**n_a * (1 - q_prep) ** (m - n_a))
                    for n_a in range(m + 1)
                ]
            for n_a, w_prep in prep_weights:
                weight = pm * pk * w_prep
                if weight == 0.0:
                    continue
                events = _analyzer_events(k, n_a, v, chi, par, orth, det, cache)
                acc["f1f2"] += weight * events["f1f2"]
                acc["d1f1f2"] += weight * events["d1f1f2"]
                acc["d2f1f2"] += weight * events["d2f1f2"]
                acc["pf1f2"] += weight * p_trig * events["f1f2"]
                acc["pd1f1f2"] += weight * p_trig * events["d1f1f2"]
                acc["pd2f1f2"] += weight * p_trig * events["d2f1f2"]
    return acc


def _analyzer_events(
    k: int,
    n_a: int,
    v: float,
    chi: np.ndarray,
    par: np.ndarray,
    orth: np.ndarray,
    det,
    cache: dict,
) -> dict[str, float]:
    """P(f1f2), P(d1 & f1f2), P(d2 & f1f2) given pair/preparation numbers.

    Photon layout: ``n_a`` prepared photons first, then (mode-2, mode-3)
    pairs. When both analyzer ports are occupied, the first prepared
    photon and the first mode-2 photon form the interfering pair; the
    antisymmetric projector splits it across the ports, the symmetric
    complement bunches it, and the classical branch routes uniformly.
    """
    key = (k, n_a)
    if key in cache:
        return cache[key]
    out = {"f1f2": 0.0, "d1f1f2": 0.0, "d2f1f2": 0.0}
    total = k + n_a
    if total < 2:
        cache[key] = out
        return out

    n_phot = n_a + 2 * k
    psi = np.ones(1, dtype=complex)
    for _ in range(n_a):
        psi = np.kron(psi, chi)
    pair_vec = bell_state(BellOutcome.PSI_MINUS).amplitudes
    for _ in range(k):
        psi = np.kron(psi, pair_vec)
    mode3_positions = [n_a + 2 * i + 2 for i in range(k)]

    # branches: (weight, conditional state, pair-photon routing law)
    # routing law maps "pair photons at f1" -> probability
    branches: list[tuple[float, np.ndarray, dict[int, float]]] = []
    if n_a >= 1 and k >= 1:
        anti_element = CoincidencePovm(1.0).element_coinc.matrix  # antisymmetric projector
        proj = embed_operator(anti_element, n_phot, (1, n_a + 1))
        psi_anti = proj @ psi
        p_anti = float(np.vdot(psi_anti, psi_anti).real)
        psi_sym = psi - psi_anti
        p_sym = float(np.vdot(psi_sym, psi_sym).real)
        v2 = v * v
        if v2 * p_anti > 0.0:
            branches.append((v2 * p_anti, psi_anti / math.sqrt(p_anti), {1: 1.0}))
        if v2 * p_sym > 0.0:
            branches.append((v2 * p_sym, psi_sym / math.sqrt(p_sym), {2: 0.5, 0: 0.5}))
        if 1.0 - v2 > 0.0:
            branches.append((1.0 - v2, psi, {0: 0.25, 1: 0.5, 2: 0.25}))
        n_extra = total - 2
    else:
        branches.append((1.0, psi, {0: 1.0}))
        n_extra = total

    par_proj = np.outer(par, par.conj())
    orth_proj = np.outer(orth, orth.conj())
    for weight_b, psi_c, routing in branches:
        # joint law of the receiving-side port counts
        bob: dict[int, float] = {}
        if k == 0:
            bob[0] = 1.0
        else:
            for pattern in product((0, 1), repeat=k):  # 1 = parallel port (d2)
                projected = psi_c
                for pos, bit in zip(mode3_positions, pattern):
                    mat = embed_operator(
                        par_proj if bit else orth_proj, n_phot, (pos,)
                    )
                    projected = mat @ projected
                prob = float(np.vdot(projected, projected).real)
                nd2 = sum(pattern)
                bob[nd2] = bob.get(nd2, 0.0) + prob
        for pair_f1, weight_r in routing.items():
            for e1 in range(n_extra + 1):
                weight_e = math.comb(n_extra, e1) * 0.5**n_extra
                c1 = pair_f1 + e1
                c2 = total - c1
                p_f1f2 = _click(c1, det.f1) * _click(c2, det.f2)
                if p_f1f2 == 0.0:
                    continue
                for nd2, weight_bob in bob.items():
                    w = weight_b * weight_r * weight_e * weight_bob * p_f1f2
                    out["f1f2"] += w
                    out["d1f1f2"] += w * _click(k - nd2, det.d1)
                    out["d2f1f2"] += w * _click(nd2, det.d2)
    cache[key] = out
    return out


def spurious_fraction(config: ExperimentConfig) -> float:
    """Fraction of analyzed threefolds caused by one-pass double pairs.

    Computed by blocked-path differencing on the exact rates, far outside
    the overlap region (v = 0), summed over both analysis channels.
    """
    if config.source.max_pairs_per_pass < 2:
        return 0.0
    raw = rates_at_overlap(replace(config, block_photon1_path=False), 0.0)
    blocked = rates_at_overlap(replace(config, block_photon1_path=True), 0.0)
    numerator = blocked["d1f1f2"] + blocked["d2f1f2"]
    denominator = raw["d1f1f2"] + raw["d2f1f2"]
    return numerator / denominator


def calibration_context(source: SourceConfig) -> ExperimentConfig:
    """Minimal scan context used by the calibration solvers."""
    chi = PolarizationSpec.from_label("+45")
    return ExperimentConfig(
        source=source,
        prep=PreparationConfig(chi),
        delays_fs=(0.0,),
        pulses_per_delay=1,
        analysis_basis=(chi, chi.orthogonal()),
    )


def calibrate_spurious(
    target_fraction: float,
    *,
    mean_pairs_pass2: float = 0.1,
    max_mean_pass1: float = 0.5,
) -> SourceConfig:
    """Solve for source means that reproduce a target spurious fraction.

    Keeps the pass-2 mean fixed and bisects the pass-1 mean (the fraction
    is monotone in it). Deterministic; raises NoSolution when the target
    is outside (0, 1) or unreachable below ``max_mean_pass1``.
    """
    if not 0.0 < target_fraction < 1.0:
        raise NoSolution(f"spurious-fraction target must lie in (0, 1), got {target_fraction!r}")

    def fraction(mean1: float) -> float:
        source = SourceConfig(mean1, mean_pairs_pass2, max_pairs_per_pass=2)
        return spurious_fraction(calibration_context(source))

    lo, hi = 1e-9, max_mean_pass1
    if fraction(hi) < target_fraction:
        raise NoSolution(
            f"spurious fraction {target_fraction} unreachable with pass-1 mean "
            f"<= {max_mean_pass1}"
        )
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if fraction(mid) < target_fraction:
            lo = mid
        else:
            hi = mid
    return SourceConfig(hi, mean_pairs_pass2, max_pairs_per_pass=2)


def fourfold_visibility_exact(config: ExperimentConfig, v_max: float) -> float:
    """Exact trigger-conditioned orthogonal-channel visibility at a ceiling."""
    dip = rates_at_overlap(config, v_max)["pd1f1f2"]
    plateau = rates_at_overlap(config, 0.0)["pd1f1f2"]
    return (plateau - dip) / (plateau + dip)


def calibrate_fourfold_overlap(
    target_visibility: float, config: ExperimentConfig
) -> float:
    """Solve for the overlap ceiling giving a target fourfold visibility.

    Bisection on the exact rates; raises NoSolution when the target is
    outside (0, 1) or above the visibility reachable at full overlap.
    """
    if not 0.0 < target_visibility < 1.0:
        raise NoSolution(
            f"visibility target must lie in (0, 1), got {target_visibility!r}"
        )
    if fourfold_visibility_exact(config, 1.0) < target_visibility:
        raise NoSolution(
            f"fourfold visibility {target_visibility} unreachable for this source"
        )
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if fourfold_visibility_exact(config, mid) < target_visibility:
            lo = mid
        else:
            hi = mid
    return hi
