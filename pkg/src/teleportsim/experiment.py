"""Monte Carlo engine for the pulsed teleportation setup.

Per pump pulse the model is:

1. Each pass emits a truncated-Poisson number of antisymmetric pairs;
   pass 1 feeds modes (2, 3), the retroreflected pass 2 feeds modes
   (1, 4).
2. Every mode-1 photon meets the preparation polarizer and survives with
   Born probability 1/2 (one member of an antisymmetric pair is
   maximally mixed), leaving in the prepared state. Mode-4 partners fly
   to the trigger detector p regardless.
3. Photons surviving to the analyzer occupy input ports a (prepared) and
   b (mode 2). When both ports are occupied, one cross-port pair
   undergoes the overlap mixture: with probability ``v**2`` it interferes
   (antisymmetric polarization component exits split, the symmetric
   component bunches), otherwise it routes classically. All remaining
   photons route classically; interference beyond one pair per pulse is
   not modeled.
4. Mode-3 photons meet the receiver's polarizing splitter (d2 transmits
   the parallel analysis state, d1 the orthogonal one). The photon paired
   with an interfering mode-2 photon carries the conditional state of
   that projection; all others are maximally mixed.
5. Every photon at a detector is registered independently with the
   detector's efficiency; a click is at least one registration.

Sampling probabilities are closed forms of the pair algebra; the exact
enumeration in ``oracle`` recomputes the same model by density-matrix
algebra and serves as its statistical gate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .config import ExperimentConfig
from .errors import GridMismatch, InsufficientScan, OutOfRange

# Born probability that the preparation polarizer transmits one member of
# an antisymmetric pair; independent of the prepared polarization.
PREP_SUCCESS = 0.5

CLICK_NAMES = ("f1", "f2", "d1", "d2", "p")
CHANNELS = ("f1f2", "d1f1f2", "d2f1f2", "p", "pf1f2", "pd1f1f2", "pd2f1f2")
CORR_CHANNELS = ("d1f1f2_corr", "d2f1f2_corr")

_CHUNK = 1 << 20

CSV_COLUMNS = (
    "delay_fs",
    "f1f2",
    "d1f1f2",
    "d2f1f2",
    "d1f1f2_corr",
    "d2f1f2_corr",
    "p_d1f1f2",
    "p_d2f1f2",
    "err_f1f2",
    "err_d1f1f2",
    "err_d2f1f2",
    "err_d1f1f2_corr",
    "err_d2f1f2_corr",
    "err_p_d1f1f2",
    "err_p_d2f1f2",
)

# CSV column name -> internal rate key
_CSV_KEYS = {
    "f1f2": "f1f2",
    "d1f1f2": "d1f1f2",
    "d2f1f2": "d2f1f2",
    "d1f1f2_corr": "d1f1f2_corr",
    "d2f1f2_corr": "d2f1f2_corr",
    "p_d1f1f2": "pd1f1f2",
    "p_d2f1f2": "pd2f1f2",
}

_VISIBILITY_ALIASES = {
    "fourfold-d1": "pd1f1f2",
    "fourfold-d2": "pd2f1f2",
}


@dataclass
class CoincidenceTally:
    """Per-delay click-coincidence counters."""

    pulses: int = 0
    n_f1f2: int = 0
    n_d1f1f2: int = 0
    n_d2f1f2: int = 0
    n_p: int = 0
    n_pf1f2: int = 0
    n_pd1f1f2: int = 0
    n_pd2f1f2: int = 0

    def __add__(self, other: "CoincidenceTally") -> "CoincidenceTally":
        return CoincidenceTally(
            pulses=self.pulses + other.pulses,
            n_f1f2=self.n_f1f2 + other.n_f1f2,
            n_d1f1f2=self.n_d1f1f2 + other.n_d1f1f2,
            n_d2f1f2=self.n_d2f1f2 + other.n_d2f1f2,
            n_p=self.n_p + other.n_p,
            n_pf1f2=self.n_pf1f2 + other.n_pf1f2,
            n_pd1f1f2=self.n_pd1f1f2 + other.n_pd1f1f2,
            n_pd2f1f2=self.n_pd2f1f2 + other.n_pd2f1f2,
        )

    def validate(self) -> None:
        """Assert the count hierarchy: every k-fold <= contained (k-1)-folds."""
        checks = [
            self.n_f1f2 <= self.pulses,
            self.n_p <= self.pulses,
            self.n_d1f1f2 <= self.n_f1f2,
            self.n_d2f1f2 <= self.n_f1f2,
            self.n_pf1f2 <= self.n_f1f2,
            self.n_pf1f2 <= self.n_p,
            self.n_pd1f1f2 <= self.n_pf1f2,
            self.n_pd1f1f2 <= self.n_d1f1f2,
            self.n_pd2f1f2 <= self.n_pf1f2,
            self.n_pd2f1f2 <= self.n_d2f1f2,
        ]
        if not all(checks):
            raise AssertionError(f"coincidence count hierarchy violated: {self}")

    def rates(self) -> dict[str, float]:
        counts = (
            self.n_f1f2,
            self.n_d1f1f2,
            self.n_d2f1f2,
            self.n_p,
            self.n_pf1f2,
            self.n_pd1f1f2,
            self.n_pd2f1f2,
        )
        return {ch: n / self.pulses for ch, n in zip(CHANNELS, counts)}

    def errors(self) -> dict[str, float]:
        counts = (
            self.n_f1f2,
            self.n_d1f1f2,
            self.n_d2f1f2,
            self.n_p,
            self.n_pf1f2,
            self.n_pd1f1f2,
            self.n_pd2f1f2,
        )
        return {ch: float(np.sqrt(n)) / self.pulses for ch, n in zip(CHANNELS, counts)}


@dataclass
class ScanResult:
    """Per-delay rates of a scan, with statistical errors ``sqrt(N)/pulses``.

    Corrected channels equal the raw ones until ``subtract_background``
    replaces them.
    """

    delays_fs: np.ndarray
    rates: dict[str, np.ndarray]
    errors: dict[str, np.ndarray]
    pulses_per_delay: int
    overlap_scale_fs: float
    background_subtracted: bool = False

    def to_csv(self, path_or_file) -> None:
        """Write the mandated CSV schema (header row, one row per delay)."""
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, delay in enumerate(self.delays_fs):
            row = [f"{delay:.12g}"]
            for col in CSV_COLUMNS[1:8]:
                row.append(f"{self.rates[_CSV_KEYS[col]][i]:.12g}")
            for col in CSV_COLUMNS[8:]:
                row.append(f"{self.errors[_CSV_KEYS[col[len('err_'):]]][i]:.12g}")
            writer.writerow(row)

    def csv_bytes(self) -> bytes:
        buf = io.StringIO()
        self._write_csv(buf)
        return buf.getvalue().encode()


def _click_from_counts(
    rng: np.random.Generator, counts: np.ndarray, eta: float
) -> np.ndarray:
    """Click indicator for detectors seeing ``counts`` photons at efficiency eta."""
    if eta >= 1.0:
        return counts > 0
    return rng.random(counts.shape[0]) < 1.0 - (1.0 - eta) ** counts


def _sample_click_arrays(
    config: ExperimentConfig,
    v: float,
    n: int,
    rng: np.random.Generator,
    coincidences_only: bool = False,
) -> dict[str, np.ndarray]:
    """Sample ``n`` pump pulses at overlap ``v``; per-pulse click booleans.

    ``coincidences_only`` skips pulses with fewer than two analyzer
    photons; those can never produce an f1f2 coincidence, so every
    tallied channel is unaffected (single clicks are not reported).
    """
    src = config.source
    det = config.detectors
    pmf1 = src.pmf(1)
    pmf2 = src.pmf(2)
    n_b = rng.choice(pmf1.size, size=n, p=pmf1)  # pairs into modes (2, 3)
    m = rng.choice(pmf2.size, size=n, p=pmf2)  # pairs into modes (1, 4)

    clicks = {name: np.zeros(n, dtype=bool) for name in CLICK_NAMES}
    clicks["p"] = _click_from_counts(rng, m, det.p)

    if config.block_photon1_path:
        n_a = np.zeros(n, dtype=np.int64)
    else:
        n_a = rng.binomial(m, PREP_SUCCESS)

    chi_vec = config.prep.chi.state().amplitudes
    par_vec = config.analysis_basis[0].state().amplitudes
    # receiving-port laws for the photon paired with the interfering one:
    # split outcome teleports chi, bunch leaves (2I - |chi><chi|)/3
    p_par_anti = float(abs(np.vdot(par_vec, chi_vec)) ** 2)
    p_par_sym = (2.0 - p_par_anti) / 3.0
    v2 = v * v

    min_photons = 2 if coincidences_only else 1
    for na in range(pmf2.size):
        for nb in range(pmf1.size):
            if na + nb < min_photons:
                continue
            idx = np.flatnonzero((n_a == na) & (n_b == nb))
            if idx.size == 0:
                continue
            g = idx.size
            total = na + nb
            if na >= 1 and nb >= 1:
                interfere = rng.random(g) < v2
                anti = interfere & (rng.random(g) < 0.25)
                sym = interfere & ~anti
                pair_f1 = rng.binomial(2, 0.5, size=g)
                bunch_to_f1 = rng.random(g) < 0.5
                pair_f1 = np.where(
                    anti, 1, np.where(sym, np.where(bunch_to_f1, 2, 0), pair_f1)
                )
                extras = total - 2
                e1 = (
                    rng.binomial(extras, 0.5, size=g)
                    if extras
                    else np.zeros(g, dtype=np.int64)
                )
                c1 = pair_f1 + e1
                p_par = np.where(anti, p_par_anti, np.where(sym, p_par_sym, 0.5))
                partner_par = (rng.random(g) < p_par).astype(np.int64)
                rest_par = (
                    rng.binomial(nb - 1, 0.5, size=g)
                    if nb > 1
                    else np.zeros(g, dtype=np.int64)
                )
                nd2 = partner_par + rest_par
            else:
                c1 = rng.binomial(total, 0.5, size=g)
                nd2 = (
                    rng.binomial(nb, 0.5, size=g)
                    if nb
                    else np.zeros(g, dtype=np.int64)
                )
            c2 = total - c1
            nd1 = nb - nd2
            clicks["f1"][idx] = _click_from_counts(rng, c1, det.f1)
            clicks["f2"][idx] = _click_from_counts(rng, c2, det.f2)
            if nb:
                clicks["d1"][idx] = _click_from_counts(rng, nd1, det.d1)
                clicks["d2"][idx] = _click_from_counts(rng, nd2, det.d2)
    return clicks


def _tally_clicks(clicks: dict[str, np.ndarray]) -> CoincidenceTally:
    f12 = clicks["f1"] & clicks["f2"]
    p = clicks["p"]
    return CoincidenceTally(
        pulses=int(clicks["f1"].shape[0]),
        n_f1f2=int(f12.sum()),
        n_d1f1f2=int((clicks["d1"] & f12).sum()),
        n_d2f1f2=int((clicks["d2"] & f12).sum()),
        n_p=int(p.sum()),
        n_pf1f2=int((p & f12).sum()),
        n_pd1f1f2=int((p & clicks["d1"] & f12).sum()),
        n_pd2f1f2=int((p & clicks["d2"] & f12).sum()),
    )


def simulate_pulse(
    config: ExperimentConfig, delay_fs: float, rng: np.random.Generator
) -> frozenset[str]:
    """Simulate one pump pulse; returns the set of detectors that clicked."""
    clicks = _sample_click_arrays(config, config.effective_overlap(delay_fs), 1, rng)
    return frozenset(name for name in CLICK_NAMES if clicks[name][0])


def _delay_rng(seed: int, delay_index: int) -> np.random.Generator:
    # independent per-delay streams: scans may run delays in any order
    return np.random.default_rng(np.random.SeedSequence([seed, delay_index]))


def run_scan(config: ExperimentConfig) -> ScanResult:
    """Monte Carlo delay scan: ``pulses_per_delay`` pulses at every delay.

    Deterministic for a fixed config: each delay uses an RNG stream
    derived from ``(seed, delay index)``, so results are independent of
    execution order and reproducible bit for bit.
    """
    tallies = []
    for i, delay in enumerate(config.delays_fs):
        rng = _delay_rng(config.seed, i)
        v = config.effective_overlap(delay)
        tally = CoincidenceTally()
        remaining = config.pulses_per_delay
        while remaining:
            chunk = min(remaining, _CHUNK)
            tally = tally + _tally_clicks(
                _sample_click_arrays(config, v, chunk, rng, coincidences_only=True)
            )
            remaining -= chunk
        tally.validate()
        tallies.append(tally)

    rates = {ch: np.array([t.rates()[ch] for t in tallies]) for ch in CHANNELS}
    errors = {ch: np.array([t.errors()[ch] for t in tallies]) for ch in CHANNELS}
    for corr, raw in zip(CORR_CHANNELS, ("d1f1f2", "d2f1f2")):
        rates[corr] = rates[raw].copy()
        errors[corr] = errors[raw].copy()
    return ScanResult(
        delays_fs=np.array(config.delays_fs),
        rates=rates,
        errors=errors,
        pulses_per_delay=config.pulses_per_delay,
        overlap_scale_fs=config.overlap_model.scale_fs,
    )


def fourfold_scan(config: ExperimentConfig) -> ScanResult:
    """Delay scan evaluated for the trigger-conditioned channels.

    Conditioning the analyzed threefolds on a trigger click (channels
    ``pd1f1f2``/``pd2f1f2``) suppresses the one-pass double-pair
    background without any subtraction, since those events lack a mode-4
    photon.
    """
    return run_scan(config)


def run_corrected_scan(
    config: ExperimentConfig,
) -> tuple[ScanResult, ScanResult | None]:
    """Scan plus background subtraction from a blocked-path twin run.

    The twin uses seed + 1 so the two runs are statistically
    independent. Sources that cannot emit double pairs have no spurious
    channel, so no twin run is needed. Returns ``(corrected scan,
    blocked scan or None)``.
    """
    raw = run_scan(config)
    if config.source.max_pairs_per_pass < 2 or config.block_photon1_path:
        return raw, None
    blocked_config = replace(
        config, block_photon1_path=True, seed=(config.seed + 1) % 2**64
    )
    blocked = run_scan(blocked_config)
    return subtract_background(raw, blocked), blocked


def subtract_background(raw: ScanResult, blocked: ScanResult) -> ScanResult:
    """Remove the blocked-path threefold rates from a raw scan.

    Errors combine in quadrature; corrected rates may come out slightly
    negative within errors and are not clamped.
    """
    if raw.delays_fs.shape != blocked.delays_fs.shape or not np.array_equal(
        raw.delays_fs, blocked.delays_fs
    ):
        raise GridMismatch("raw and blocked scans cover different delay grids")
    rates = {ch: arr.copy() for ch, arr in raw.rates.items()}
    errors = {ch: arr.copy() for ch, arr in raw.errors.items()}
    for corr, ch in zip(CORR_CHANNELS, ("d1f1f2", "d2f1f2")):
        rates[corr] = raw.rates[ch] - blocked.rates[ch]
        errors[corr] = np.sqrt(raw.errors[ch] ** 2 + blocked.errors[ch] ** 2)
    return ScanResult(
        delays_fs=raw.delays_fs.copy(),
        rates=rates,
        errors=errors,
        pulses_per_delay=raw.pulses_per_delay,
        overlap_scale_fs=raw.overlap_scale_fs,
        background_subtracted=True,
    )


def visibility(
    scan: ScanResult, channel: str, formula: str = "plateau_dip"
) -> tuple[float, float]:
    """Dip contrast ``V = (plateau - dip) / (plateau + dip)`` of one channel.

    The dip is the zero-delay rate, the plateau the mean rate at delays
    beyond three overlap scales; the error follows from propagating the
    per-point statistical errors. ``formula="max_min"`` uses the extreme
    rates instead.
    """
    key = _VISIBILITY_ALIASES.get(channel, channel)
    if key not in scan.rates:
        raise OutOfRange(f"unknown visibility channel {channel!r}")
    rate = scan.rates[key]
    err = scan.errors[key]
    delays = scan.delays_fs
    if delays.size < 3:
        raise InsufficientScan("visibility needs at least three delay points")

    if formula == "plateau_dip":
        zero = np.flatnonzero(np.abs(delays) < 1e-9)
        plateau_idx = np.flatnonzero(
            np.abs(delays) >= 3.0 * scan.overlap_scale_fs * (1 - 1e-12)
        )
        if zero.size != 1 or plateau_idx.size == 0:
            raise InsufficientScan(
                "scan must contain a zero-delay point and plateau points "
                "beyond three overlap scales"
            )
        dip, sigma_dip = float(rate[zero[0]]), float(err[zero[0]])
        plateau = float(rate[plateau_idx].mean())
        sigma_plateau = float(np.sqrt((err[plateau_idx] ** 2).sum()) / plateau_idx.size)
    elif formula == "max_min":
        i_max, i_min = int(np.argmax(rate)), int(np.argmin(rate))
        plateau, sigma_plateau = float(rate[i_max]), float(err[i_max])
        dip, sigma_dip = float(rate[i_min]), float(err[i_min])
    else:
        raise OutOfRange(f"unknown visibility formula {formula!r}")

    total = plateau + dip
    if total <= 0:
        raise InsufficientScan("channel has no counts; visibility undefined")
    v = (plateau - dip) / total
    sigma = 2.0 * np.sqrt(dip**2 * sigma_plateau**2 + plateau**2 * sigma_dip**2) / total**2
    return v, float(sigma)
