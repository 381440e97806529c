"""Scenario presets: which hypothesis shape, parity and scalar sampling each statement uses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple


@dataclass(frozen=True)
class Preset:
    name: str
    shape: str
    parity: str
    scalar_mode: str
    idempotent: bool = False
    # extra real factors t for homogeneity checks at t * a
    scale_factors: Tuple[float, ...] = ()
    force_field: Optional[str] = None
    force_algebra: Optional[str] = None
    requires_alpha: bool = False
    # section overrides applied on top of the base defaults
    defaults: Dict[str, dict] = field(default_factory=dict)


PRESETS: Dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("lemma1", "eq1", "even", "a_only"),
        Preset("lemma2", "eq12", "odd", "a_only"),
        Preset("corollary1", "eq1", "even", "unit"),
        Preset("corollary2", "eq12", "odd", "unit"),
        Preset("theorem1", "eq22", "general", "independent"),
        Preset(
            "theorem2",
            "eq22",
            "general",
            "independent",
            scale_factors=(0.5, 3.0, 2.0**0.5),
            defaults={"algebra": "diagonal_real"},
        ),
        Preset(
            "corollary3",
            "eq22",
            "general",
            "independent",
            scale_factors=(0.5, 3.0),
            force_field="complex",
            force_algebra="complex_circle",
            defaults={"space": {"field": "complex", "dim": 3}, "algebra": "complex_circle"},
        ),
        Preset("theorem3", "eq29", "general", "unit", defaults={"ground": {"offsets": "consistent"}}),
        Preset(
            "remark3",
            "eq22",
            "general",
            "equal",
            idempotent=True,
            defaults={"algebra": "diagonal_real", "ground": {"offsets": "consistent"}},
        ),
        Preset(
            "remark4",
            "eq22",
            "general",
            "independent",
            requires_alpha=True,
            defaults={"ground": {"alpha": 2.0, "linear": "zero", "quad_coeff": 0.0}},
        ),
    )
}

PRESET_NAMES = tuple(PRESETS)


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
