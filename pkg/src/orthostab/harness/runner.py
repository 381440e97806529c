"""End-to-end scenario runs: axioms, epsilon, canonical matrices, certificate."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .. import __version__
from ..hyers import BoundRecord, canonicalize, certify
from ..orthogonality import MAG_RANGE, check_axioms, log_uniform
from ..pexider import estimate_epsilon
from .config import (
    ScenarioConfig,
    approximant_config,
    build_instance,
    build_relation,
    build_space,
    resolve_seed,
    resolved_ground,
)
from .presets import get_preset

N_CANONICAL_VALIDATION = 50

# stream ids under the resolved seed
_AXIOMS, _EPS, _VALIDATION, _CANON, _HOMOG = 21, 31, 41, 42, 51


@dataclass
class RunReport:
    config: dict
    preset: dict
    axioms: dict
    epsilon: dict
    decomposition: dict
    certificate: dict
    timing: dict
    version: str = __version__

    @property
    def passed(self) -> bool:
        return bool(self.certificate["all_pass"])

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "artifact_version": self.version,
            "config": self.config,
            "preset": self.preset,
            "axioms": self.axioms,
            "epsilon": self.epsilon,
            "decomposition": self.decomposition,
            "certificate": self.certificate,
        }
        if timing:
            d["timing"] = self.timing
        return d

    def index_rows(self):
        """Rows for the suite index: one per bound."""
        eps = self.certificate["eps_hat"]
        for b in self.certificate["bounds"]:
            yield [self.config["preset"], eps, b["name"], b["constant"], b["attained_sup"], b["ratio"], b["pass"]]


def sample_points(space, rng, n) -> np.ndarray:
    """Random directions with log-uniform norms over the sampler's magnitude range."""
    X = space.random(rng, n)
    return X * (log_uniform(rng, n, *MAG_RANGE) / space.norm(X))[:, None]


def homogeneity_scalars(algebra, n, seed, idempotent) -> np.ndarray:
    rng = np.random.default_rng([seed, _HOMOG])
    draw = algebra.sample_idempotent_unit if idempotent else algebra.sample_unit
    if n == 1:
        return algebra.unit()[None, :]
    return np.concatenate([algebra.unit()[None, :], draw(rng, n - 1)])


def run_axioms(cfg: ScenarioConfig, seed: Optional[int] = None):
    seed = resolve_seed(seed, cfg)
    rel = build_relation(cfg, build_space(cfg))
    return check_axioms(rel, [seed, _AXIOMS], cfg.sampling.n_axiom)


def run_scenario(cfg: ScenarioConfig, seed: Optional[int] = None, with_axioms: bool = True) -> RunReport:
    """Run one preset scenario.

    Sampler and solver failures propagate; a canonicalization mismatch is
    recorded as a failing ``canonical_form`` bound instead.
    """
    t0 = time.perf_counter()
    seed = resolve_seed(seed, cfg)
    preset = get_preset(cfg.preset)
    inst, rel, algebra, ground = build_instance(cfg, seed)
    echo = replace(cfg, seed=seed, ground=resolved_ground(cfg, preset, rel))
    acfg = approximant_config(cfg)
    s = cfg.sampling
    timing = {}

    t = time.perf_counter()
    axioms = check_axioms(rel, [seed, _AXIOMS], s.n_axiom).to_dict() if with_axioms else None
    timing["axioms_s"] = time.perf_counter() - t

    t = time.perf_counter()
    est = estimate_epsilon(
        inst,
        preset.shape,
        algebra,
        s.n_pairs,
        s.n_scalars,
        seed=[seed, _EPS],
        scalar_mode=preset.scalar_mode,
        idempotent=preset.idempotent,
    )
    timing["epsilon_s"] = time.perf_counter() - t

    t = time.perf_counter()
    canon_pts = sample_points(inst.X, np.random.default_rng([seed, _CANON]), N_CANONICAL_VALIDATION)
    dec = canonicalize(inst, acfg, canon_pts, raise_on_mismatch=False)
    timing["canonicalize_s"] = time.perf_counter() - t

    t = time.perf_counter()
    X = sample_points(inst.X, np.random.default_rng([seed, _VALIDATION]), s.n_validation)
    scalars = homogeneity_scalars(algebra, s.n_homogeneity_scalars, seed, preset.idempotent)
    cert = certify(
        inst,
        preset.shape,
        est,
        dec,
        X,
        scalars,
        acfg,
        n_orbit=s.n_orbit,
        orbit_steps=s.orbit_steps,
        n_homogeneity=s.n_homogeneity_points,
        scale_factors=preset.scale_factors,
    )
    cert.bounds.append(
        BoundRecord(
            "canonical_form", 0.0, dec.q_residual + dec.t_residual, None, dec.q_allowed + dec.t_allowed, dec.consistent
        )
    )
    timing["certify_s"] = time.perf_counter() - t
    timing["total_s"] = time.perf_counter() - t0

    return RunReport(
        config=echo.to_dict(),
        preset={
            "shape": preset.shape,
            "parity": preset.parity,
            "scalar_mode": "unit" if preset.shape == "eq29" else preset.scalar_mode,
            "idempotent": preset.idempotent,
            "scale_factors": list(preset.scale_factors),
        },
        axioms=axioms,
        epsilon=est.to_dict(),
        decomposition=dec.to_dict(),
        certificate=cert.to_dict(),
        timing=timing,
    )
