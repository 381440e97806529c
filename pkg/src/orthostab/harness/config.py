"""Scenario configuration: JSON ingestion, preset constraints and object construction."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from typing import Optional, Tuple, Union

import jsonschema
import numpy as np

from ..algebra import ScalarAlgebra
from ..hyers import ApproximantConfig
from ..orthogonality import OrthogonalityRelation
from ..pexider import GroundTruth, PexiderInstance, quadratic_kernel
from ..spaces import NormedSpace
from .presets import Preset, get_preset

SEED_ENV = "ORTHOSTAB_SEED"
DEFAULT_SEED = 0
MATRIX_KEYWORDS = ("random", "zero", "identity", "consistent")

MatrixSpec = Union[str, Tuple[tuple, ...]]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceConfig:
    field: str = "real"
    dim: int = 4
    norm: str = "euclidean"
    p: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class RelationConfig:
    kind: str = "inner_product"
    tol: float = 1e-9


@dataclass(frozen=True)
class GroundConfig:
    # None means "preset default": c_Q = 1 whenever the setting admits it
    quad_coeff: Optional[float] = None
    linear: Optional[MatrixSpec] = None
    offsets: Optional[MatrixSpec] = None
    noise_amp: float = 0.01
    alpha: Optional[float] = None


@dataclass(frozen=True)
class SamplingConfig:
    n_pairs: int = 500
    n_scalars: int = 20
    n_validation: int = 200
    n_axiom: int = 200
    n_orbit: int = 100
    orbit_steps: int = 30
    n_homogeneity_scalars: int = 100
    n_homogeneity_points: int = 100


@dataclass(frozen=True)
class ApproxConfig:
    n_max: int = 48
    stop_tol: float = 1e-10


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str
    seed: Optional[int] = None
    space: SpaceConfig = field(default_factory=SpaceConfig)
    relation: RelationConfig = field(default_factory=RelationConfig)
    algebra: str = "real_signs"
    ground: GroundConfig = field(default_factory=GroundConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    approximant: ApproxConfig = field(default_factory=ApproxConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("linear", "offsets"):
            v = d["ground"][key]
            if isinstance(v, tuple):
                d["ground"][key] = [list(row) for row in v]
        if d["space"]["weights"] is not None:
            d["space"]["weights"] = list(d["space"]["weights"])
        return d

    def with_seed(self, seed: Optional[int]) -> "ScenarioConfig":
        return replace(self, seed=seed)


def schema() -> dict:
    text = resources.files("orthostab.schemas").joinpath("config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _freeze_matrix(v):
    if v is None or isinstance(v, str):
        return v
    return tuple(tuple(tuple(e) if isinstance(e, list) else e for e in row) for row in v)


def from_dict(data: dict) -> ScenarioConfig:
    """Validate ``data`` against the schema and apply preset defaults.

    Preset defaults fill only keys the caller left out; violated preset
    constraints raise ``ConfigError``.
    """
    try:
        jsonschema.validate(data, schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from None
    preset = get_preset(data["preset"])
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in preset.defaults.items()}
    for key, value in data.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    space = dict(merged.get("space", {}))
    if space.get("weights") is not None:
        space["weights"] = tuple(space["weights"])
    ground = dict(merged.get("ground", {}))
    for key in ("linear", "offsets"):
        if key in ground:
            ground[key] = _freeze_matrix(ground[key])
    cfg = ScenarioConfig(
        preset=merged["preset"],
        seed=merged.get("seed"),
        space=SpaceConfig(**space),
        relation=RelationConfig(**merged.get("relation", {})),
        algebra=merged.get("algebra", "real_signs"),
        ground=GroundConfig(**ground),
        sampling=SamplingConfig(**merged.get("sampling", {})),
        approximant=ApproxConfig(**merged.get("approximant", {})),
    )
    check_constraints(cfg)
    return cfg


def load(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(data)


def default_config(preset: str, seed: Optional[int] = None) -> ScenarioConfig:
    return from_dict({"preset": preset, "seed": seed})


def resolve_seed(cli_seed: Optional[int], cfg: ScenarioConfig, env=None) -> int:
    """``--seed`` beats the config, which beats ``ORTHOSTAB_SEED``."""
    if cli_seed is not None:
        return int(cli_seed)
    if cfg.seed is not None:
        return int(cfg.seed)
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV)
    if raw not in (None, ""):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    return DEFAULT_SEED


# -- construction ---------------------------------------------------------------


def build_space(cfg: ScenarioConfig) -> NormedSpace:
    s = cfg.space
    try:
        return NormedSpace(s.dim, field=s.field, norm_kind=s.norm, p=s.p, weights=s.weights)
    except ValueError as exc:
        raise ConfigError(f"space: {exc}") from None


def build_relation(cfg: ScenarioConfig, space: NormedSpace) -> OrthogonalityRelation:
    try:
        return OrthogonalityRelation(cfg.relation.kind, space, cfg.relation.tol)
    except ValueError as exc:
        raise ConfigError(f"relation: {exc}") from None


def build_algebra(cfg: ScenarioConfig, space: NormedSpace) -> ScalarAlgebra:
    try:
        return ScalarAlgebra(cfg.algebra, space)
    except ValueError as exc:
        raise ConfigError(f"algebra: {exc}") from None


def _default_quad(cfg: ScenarioConfig, preset: Preset, relation) -> float:
    if preset.parity == "odd" or cfg.algebra != "real_signs" or quadratic_kernel(relation) is None:
        return 0.0
    return 1.0


def _matrix(spec, shape, space: NormedSpace, rng, what: str, diagonal=False) -> np.ndarray:
    complex_ = space.field == "complex"
    if spec == "zero":
        return np.zeros(shape, dtype=space.dtype)
    if spec == "identity":
        if shape[0] != shape[1]:
            raise ConfigError(f"{what}: 'identity' needs a square shape")
        return np.eye(shape[0], dtype=space.dtype)
    if spec == "random":
        M = rng.standard_normal(shape)
        if complex_:
            M = (M + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        return np.diag(np.diag(M)) if diagonal else M
    if isinstance(spec, str):
        raise ConfigError(f"{what}: keyword {spec!r} not allowed here")
    rows = []
    for row in spec:
        rows.append([complex(*e) if isinstance(e, tuple) else e for e in row])
    M = np.array(rows)
    if M.shape != shape:
        raise ConfigError(f"{what}: expected shape {shape}, got {M.shape}")
    if np.iscomplexobj(M) and not complex_:
        raise ConfigError(f"{what}: complex entries need a complex space")
    return M.astype(space.dtype)


def _offsets(spec, space: NormedSpace, rng) -> np.ndarray:
    if spec == "consistent":
        c = _matrix("random", (2, space.dim), space, rng, "offsets")
        return np.concatenate([c.sum(axis=0, keepdims=True), c])
    return _matrix(spec, (3, space.dim), space, rng, "offsets")


def resolved_ground(cfg: ScenarioConfig, preset: Preset, relation) -> GroundConfig:
    """Fill preset defaults left as ``None``."""
    g = cfg.ground
    quad = g.quad_coeff if g.quad_coeff is not None else _default_quad(cfg, preset, relation)
    linear = g.linear if g.linear is not None else ("zero" if preset.parity == "even" else "random")
    offsets = g.offsets if g.offsets is not None else ("zero" if preset.parity == "odd" else "random")
    return replace(g, quad_coeff=float(quad), linear=linear, offsets=offsets)


def check_constraints(cfg: ScenarioConfig) -> None:
    preset = get_preset(cfg.preset)
    if preset.force_field and cfg.space.field != preset.force_field:
        raise ConfigError(f"{preset.name} requires a {preset.force_field} space")
    if preset.force_algebra and cfg.algebra != preset.force_algebra:
        raise ConfigError(f"{preset.name} requires the {preset.force_algebra} algebra")
    g = cfg.ground
    if preset.requires_alpha:
        if g.alpha is None or g.alpha == 1.0:
            raise ConfigError(f"{preset.name} needs alpha != 1")
    elif g.alpha is not None:
        raise ConfigError(f"alpha is only meaningful for remark4, not {preset.name}")
    if preset.parity == "even" and g.linear not in (None, "zero"):
        raise ConfigError("even presets need a zero linear part")
    if preset.parity == "odd":
        if g.quad_coeff not in (None, 0.0):
            raise ConfigError("odd presets need quad_coeff = 0")
        if g.offsets not in (None, "zero"):
            raise ConfigError("odd presets need zero offsets")
    if g.quad_coeff not in (None, 0.0) and cfg.algebra != "real_signs":
        raise ConfigError(f"quad_coeff must be 0 with {cfg.algebra}: the quadratic kernel is not homogeneous under it")
    if g.linear == "consistent":
        raise ConfigError("'consistent' applies to offsets only")
    if g.offsets == "identity":
        raise ConfigError("'identity' applies to the linear part only")


def build_instance(cfg: ScenarioConfig, seed: int):
    """``(instance, relation, algebra, ground_config)`` for a resolved seed."""
    preset = get_preset(cfg.preset)
    space = build_space(cfg)
    relation = build_relation(cfg, space)
    algebra = build_algebra(cfg, space)
    g = resolved_ground(cfg, preset, relation)
    rng = np.random.default_rng([seed, 11])
    diagonal = cfg.algebra == "diagonal_real"
    L = _matrix(g.linear, (space.dim, space.dim), space, rng, "linear", diagonal=diagonal)
    if diagonal and np.any(L != np.diag(np.diag(L))):
        raise ConfigError("diagonal_real needs a diagonal linear part")
    C = _offsets(g.offsets, space, rng)
    try:
        truth = GroundTruth(g.quad_coeff, L, C, g.noise_amp, seed, g.alpha)
        inst = PexiderInstance(truth, space, space, relation, preset.parity)
    except ValueError as exc:
        raise ConfigError(f"ground truth: {exc}") from None
    return inst, relation, algebra, g


def approximant_config(cfg: ScenarioConfig) -> ApproximantConfig:
    try:
        return ApproximantConfig(cfg.approximant.n_max, cfg.approximant.stop_tol)
    except ValueError as exc:
        raise ConfigError(f"approximant: {exc}") from None
