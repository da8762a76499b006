"""Scenario presets: one per headline measurement of the experiment."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import (
    ExperimentConfig,
    PreparationConfig,
    SourceConfig,
    symmetric_delay_grid,
)
from .errors import ConfigError
from .experiment import (
    ScanResult,
    run_corrected_scan,
    run_scan,
    visibility,
)
from .oracle import calibrate_fourfold_overlap, calibrate_spurious
from .states import PolarizationSpec

PRESET_NAMES = ("fig3-ideal", "fig4-spurious", "fig5-fourfold", "table1")

DEFAULT_SEED = 20250810
DEFAULT_PULSES = 1_000_000

SPURIOUS_TARGET = 0.68
FOURFOLD_VISIBILITY_TARGET = 0.70


@dataclass(frozen=True)
class Scenario:
    """A resolved scan campaign: one base config swept over input polarizations."""

    name: str
    base_config: ExperimentConfig
    chis: tuple[PolarizationSpec, ...]
    subtract_background: bool
    visibility_channel: str

    def chi_config(self, index: int) -> ExperimentConfig:
        """Per-polarization config: matched analysis basis, decorrelated seed."""
        chi = self.chis[index]
        seed = (self.base_config.seed + 1000 * index) % 2**64
        return replace(self.base_config, seed=seed).with_chi(chi)


@dataclass
class ChiResult:
    chi: PolarizationSpec
    scan: ScanResult
    blocked: ScanResult | None
    visibility: float
    sigma_visibility: float


def ideal_source() -> SourceConfig:
    """Single-pair source: at most one pair per pass."""
    return SourceConfig(0.5, 0.5, max_pairs_per_pass=1)


def double_pair_source() -> SourceConfig:
    """Moderate-rate source with double-pair emission enabled."""
    return SourceConfig(0.1, 0.1, max_pairs_per_pass=2)


def _base(source: SourceConfig, seed: int, pulses: int, max_overlap: float = 1.0) -> ExperimentConfig:
    chi = PolarizationSpec.from_label("+45")
    return ExperimentConfig(
        source=source,
        prep=PreparationConfig(chi),
        delays_fs=symmetric_delay_grid(),
        pulses_per_delay=pulses,
        seed=seed,
        analysis_basis=(chi, chi.orthogonal()),
        max_overlap=max_overlap,
    )


def build_preset(
    name: str,
    seed: int = DEFAULT_SEED,
    pulses_per_delay: int = DEFAULT_PULSES,
) -> Scenario:
    """Resolve a named preset into a fully calibrated scenario."""
    labels: tuple[str, ...]
    if name == "fig3-ideal":
        config = _base(ideal_source(), seed, pulses_per_delay)
        labels = ("+45",)
        subtract = False
        channel = "d1f1f2"
    elif name == "fig4-spurious":
        config = _base(calibrate_spurious(SPURIOUS_TARGET), seed, pulses_per_delay)
        labels = ("+45", "-45")
        subtract = True
        channel = "d1f1f2_corr"
    elif name == "fig5-fourfold":
        config = _base(double_pair_source(), seed, pulses_per_delay)
        v_max = calibrate_fourfold_overlap(FOURFOLD_VISIBILITY_TARGET, config)
        config = replace(config, max_overlap=v_max)
        labels = ("+45", "90")
        subtract = False
        channel = "fourfold-d1"
    elif name == "table1":
        config = _base(calibrate_spurious(SPURIOUS_TARGET), seed, pulses_per_delay)
        v_max = calibrate_fourfold_overlap(
            FOURFOLD_VISIBILITY_TARGET, _base(double_pair_source(), seed, pulses_per_delay)
        )
        config = replace(config, max_overlap=v_max)
        labels = ("+45", "-45", "0", "90", "circular")
        subtract = True
        channel = "d1f1f2_corr"
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    chis = tuple(PolarizationSpec.from_label(label) for label in labels)
    return Scenario(name, config, chis, subtract, channel)


def run_scenario(scenario: Scenario) -> list[ChiResult]:
    """Execute every per-polarization scan of a scenario."""
    results = []
    for i, chi in enumerate(scenario.chis):
        config = scenario.chi_config(i)
        if scenario.subtract_background:
            scan, blocked = run_corrected_scan(config)
        else:
            scan, blocked = run_scan(config), None
        v, sigma = visibility(
            scan, scenario.visibility_channel, config.visibility_formula
        )
        results.append(ChiResult(chi, scan, blocked, v, sigma))
    return results
