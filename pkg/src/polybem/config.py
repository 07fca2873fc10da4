"""Solver configuration with key=value file overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

WORKERS_ENV = "POLYBEM_NUM_WORKERS"


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters shared across the solver pipeline.

    Quadrature orders are expressed relative to the approximation order k:
    the boundary-element outer rule uses ``k + bem_outer_extra`` Gauss points,
    volume rules are exact for polynomials of degree ``2k + volume_quad_extra``.
    """

    bem_outer_extra: int = 8
    graded_levels: int = 30
    near_pair_factor: float = 1.0
    volume_quad_extra: int = 2
    edge_quad_extra: int = 2
    neumann_quad_extra: int = 4
    cg_tol: float = 1e-10
    cg_max_iter_factor: int = 10
    dense_fallback_n: int = 2000
    m_ref: int = 4
    near_band: float = 1e-3
    singular_subdiv_levels: int = 2
    workers: int = 1

    def bem_outer_points(self, k: int) -> int:
        return k + self.bem_outer_extra

    def volume_quad_degree(self, k: int) -> int:
        return 2 * k + self.volume_quad_extra

    def edge_quad_degree(self, k: int) -> int:
        return 2 * k + self.edge_quad_extra

    def neumann_quad_degree(self, k: int) -> int:
        return 2 * k + self.neumann_quad_extra

    def cache_key(self) -> tuple:
        # Fields that change boundary-element operators; used by the operator cache.
        return (self.bem_outer_extra, self.graded_levels, self.near_pair_factor)


def default_config() -> SolverConfig:
    cfg = SolverConfig()
    workers = os.environ.get(WORKERS_ENV)
    if workers:
        cfg = replace(cfg, workers=max(1, int(workers)))
    return cfg


def load_config(path: str, base: SolverConfig | None = None) -> SolverConfig:
    """Read ``key = value`` lines (``#`` comments allowed) over the defaults."""
    cfg = base if base is not None else default_config()
    known = {f.name: f.type for f in fields(SolverConfig)}
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            current = getattr(cfg, key)
            overrides[key] = type(current)(float(value)) if isinstance(current, (int, float)) else value
    return replace(cfg, **overrides)
