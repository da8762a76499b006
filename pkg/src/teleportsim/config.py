"""Experiment configuration: source statistics, preparation, detectors, scan grid.

Configs serialize to plain JSON-compatible dicts (``to_dict`` /
``from_dict``) so a run manifest can reproduce a scan exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, OutOfRange
from .interference import ModeOverlapModel
from .states import PolarizationSpec

SCHEMA_VERSION = 1

DETECTOR_NAMES = ("f1", "f2", "d1", "d2", "p")


@dataclass(frozen=True)
class SourceConfig:
    """Pulsed two-pass pair source.

    Pass 1 emits pairs into modes (2, 3); the retroreflected pass 2 emits
    pairs into modes (1, 4). Pair numbers per pulse follow a Poisson law
    truncated at ``max_pairs_per_pass``.
    """

    mean_pairs_pass1: float
    mean_pairs_pass2: float
    max_pairs_per_pass: int = 2
    emission_statistics: str = "poisson_truncated"

    def __post_init__(self) -> None:
        for name, mean in (
            ("mean_pairs_pass1", self.mean_pairs_pass1),
            ("mean_pairs_pass2", self.mean_pairs_pass2),
        ):
            if not 0.0 < mean <= 0.5:
                raise OutOfRange(f"{name} must lie in (0, 0.5], got {mean!r}")
        if self.max_pairs_per_pass < 1:
            raise OutOfRange("max_pairs_per_pass must be >= 1")
        if self.emission_statistics != "poisson_truncated":
            raise OutOfRange(
                f"unsupported emission statistics {self.emission_statistics!r}"
            )

    def pmf(self, pump_pass: int) -> np.ndarray:
        """Truncated-Poisson pair-number distribution for pass 1 or 2."""
        mean = {1: self.mean_pairs_pass1, 2: self.mean_pairs_pass2}[pump_pass]
        n = np.arange(self.max_pairs_per_pass + 1)
        weights = mean**n / np.array([math.factorial(int(i)) for i in n])
        return weights / weights.sum()


@dataclass(frozen=True)
class PreparationConfig:
    """Polarizer writing the input state onto the mode-1 photon."""

    chi: PolarizationSpec


@dataclass(frozen=True)
class DetectorConfig:
    """Per-detector quantum efficiencies; dark counts are disabled by design."""

    f1: float = 1.0
    f2: float = 1.0
    d1: float = 1.0
    d2: float = 1.0
    p: float = 1.0

    def __post_init__(self) -> None:
        for name in DETECTOR_NAMES:
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise OutOfRange(f"efficiency {name} must lie in (0, 1], got {eta!r}")

    @classmethod
    def uniform(cls, eta: float) -> "DetectorConfig":
        return cls(eta, eta, eta, eta, eta)


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one delay scan."""

    source: SourceConfig
    prep: PreparationConfig
    detectors: DetectorConfig = field(default_factory=DetectorConfig)
    overlap_model: ModeOverlapModel = field(default_factory=ModeOverlapModel)
    delays_fs: tuple[float, ...] = ()
    pulses_per_delay: int = 100_000
    seed: int = 0
    block_photon1_path: bool = False
    # (d2-transmitted state, d1-reflected orthogonal state)
    analysis_basis: tuple[PolarizationSpec, PolarizationSpec] = (
        PolarizationSpec.from_label("+45"),
        PolarizationSpec.from_label("-45"),
    )
    # Ceiling of the overlap reachable at zero delay; models residual
    # distinguishability of the real analyzer.
    max_overlap: float = 1.0
    visibility_formula: str = "plateau_dip"

    def __post_init__(self) -> None:
        if not self.delays_fs:
            raise ConfigError("delays_fs must not be empty")
        object.__setattr__(self, "delays_fs", tuple(float(d) for d in self.delays_fs))
        if self.pulses_per_delay < 1:
            raise ConfigError("pulses_per_delay must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.max_overlap <= 1.0:
            raise ConfigError("max_overlap must lie in [0, 1]")
        if self.visibility_formula not in ("plateau_dip", "max_min"):
            raise ConfigError(
                f"unknown visibility formula {self.visibility_formula!r}"
            )
        par, orth = self.analysis_basis
        cross = np.vdot(orth.state().amplitudes, par.state().amplitudes)
        if abs(cross) > 1e-9:
            raise ConfigError("analysis_basis states must be orthogonal")

    def effective_overlap(self, delay_fs: float) -> float:
        """Overlap v at a delay, capped by the analyzer ceiling."""
        return self.max_overlap * self.overlap_model.overlap(delay_fs)

    def with_chi(self, chi: PolarizationSpec) -> "ExperimentConfig":
        """Same scan with a new input polarization and matched analysis basis."""
        return replace(
            self,
            prep=PreparationConfig(chi),
            analysis_basis=(chi, chi.orthogonal()),
        )

    def blocked(self) -> "ExperimentConfig":
        """Twin configuration with the mode-1 path blocked."""
        return replace(self, block_photon1_path=True)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "source": {
                "mean_pairs_pass1": self.source.mean_pairs_pass1,
                "mean_pairs_pass2": self.source.mean_pairs_pass2,
                "max_pairs_per_pass": self.source.max_pairs_per_pass,
                "emission_statistics": self.source.emission_statistics,
            },
            "prep": {"chi": spec_to_json(self.prep.chi)},
            "detectors": {
                name: getattr(self.detectors, name) for name in DETECTOR_NAMES
            },
            "overlap": {
                "shape": self.overlap_model.shape,
                "coherence_time_fs": self.overlap_model.coherence_time_fs,
                "pump_pulse_duration_fs": self.overlap_model.pump_pulse_duration_fs,
            },
            "delays_fs": list(self.delays_fs),
            "pulses_per_delay": self.pulses_per_delay,
            "seed": self.seed,
            "block_photon1_path": self.block_photon1_path,
            "analysis_basis": [spec_to_json(s) for s in self.analysis_basis],
            "max_overlap": self.max_overlap,
            "visibility_formula": self.visibility_formula,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            version = data.get("schema_version", SCHEMA_VERSION)
            if version != SCHEMA_VERSION:
                raise ConfigError(f"unsupported schema_version {version!r}")
            source = SourceConfig(
                mean_pairs_pass1=float(data["source"]["mean_pairs_pass1"]),
                mean_pairs_pass2=float(data["source"]["mean_pairs_pass2"]),
                max_pairs_per_pass=int(data["source"].get("max_pairs_per_pass", 2)),
                emission_statistics=data["source"].get(
                    "emission_statistics", "poisson_truncated"
                ),
            )
            prep = PreparationConfig(spec_from_json(data["prep"]["chi"]))
            det_data = data.get("detectors", {})
            detectors = DetectorConfig(
                **{name: float(det_data.get(name, 1.0)) for name in DETECTOR_NAMES}
            )
            overlap_data = data.get("overlap", {})
            overlap_model = ModeOverlapModel(
                shape=overlap_data.get("shape", "gaussian"),
                coherence_time_fs=float(overlap_data.get("coherence_time_fs", 520.0)),
                pump_pulse_duration_fs=float(
                    overlap_data.get("pump_pulse_duration_fs", 200.0)
                ),
            )
            basis_data = data.get("analysis_basis")
            if basis_data is None:
                chi = prep.chi
                basis = (chi, chi.orthogonal())
            else:
                basis = tuple(spec_from_json(s) for s in basis_data)
            return cls(
                source=source,
                prep=prep,
                detectors=detectors,
                overlap_model=overlap_model,
                delays_fs=tuple(float(d) for d in data["delays_fs"]),
                pulses_per_delay=int(data["pulses_per_delay"]),
                seed=int(data["seed"]),
                block_photon1_path=bool(data.get("block_photon1_path", False)),
                analysis_basis=basis,
                max_overlap=float(data.get("max_overlap", 1.0)),
                visibility_formula=data.get("visibility_formula", "plateau_dip"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid experiment config: {exc}") from exc


def spec_to_json(spec: PolarizationSpec):
    if spec.label != "custom":
        return spec.label
    return {
        "alpha": [float(spec.alpha.real), float(spec.alpha.imag)],
        "beta": [float(spec.beta.real), float(spec.beta.imag)],
    }


def spec_from_json(data) -> PolarizationSpec:
    if isinstance(data, str):
        return PolarizationSpec.from_label(data)
    alpha = complex(data["alpha"][0], data["alpha"][1])
    beta = complex(data["beta"][0], data["beta"][1])
    # already-normalized amplitudes are kept bit for bit so that a config
    # round-trips exactly; anything else goes through normalization
    norm_sq = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm_sq - 1.0) <= 1e-12:
        return PolarizationSpec("custom", alpha, beta)
    return PolarizationSpec.custom(alpha, beta)


def symmetric_delay_grid(
    overlap_model: ModeOverlapModel | None = None,
    n_points: int = 11,
    half_width_scales: float = 4.0,
) -> tuple[float, ...]:
    """Delay grid centered on zero, spanning ``+-half_width_scales`` overlap scales.

    Odd ``n_points`` guarantees an exact zero-delay point; the default
    width leaves the outer points deep in the plateau (v < 1e-3).
    """
    model = overlap_model or ModeOverlapModel()
    if n_points < 3 or n_points % 2 == 0:
        raise ConfigError("n_points must be an odd integer >= 3")
    half = half_width_scales * model.scale_fs
    step = half / (n_points // 2)
    # build from integer multiples so the center point is exactly zero
    return tuple(step * (i - n_points // 2) for i in range(n_points))
