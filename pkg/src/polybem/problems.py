"""Problem definitions: diffusion data, boundary data, exact solutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import UnknownProblem


@dataclass
class ProblemSpec:
    """Mixed Dirichlet-Neumann diffusion problem with piecewise-constant a.

    ``region_of`` assigns a region index to a point; ``a_values[region]`` is
    the diffusion coefficient there.  Interfaces between regions must be
    aligned with mesh edges (assembly verifies that no element straddles).
    """

    name: str
    a_values: tuple[float, ...] = (1.0,)
    region_of: Callable = None
    f: Callable = None
    g_D: Callable = None
    g_N: Callable = None
    exact_u: Callable = None
    exact_grad: Callable = None
    exact_h1_seminorm: float | None = None
    singular_points: tuple = ()
    domain: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)

    def __post_init__(self):
        if self.region_of is None:
            self.region_of = lambda x, y: np.zeros_like(np.asarray(x), dtype=int)
        if self.f is None:
            self.f = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))

    def diffusion(self, region: int) -> float:
        return self.a_values[region]

    def element_region(self, points: np.ndarray, probes: np.ndarray) -> int:
        """Region of an element; raises if quadrature probes disagree."""
        regions = np.asarray(self.region_of(probes[:, 0], probes[:, 1]))
        first = int(regions.flat[0])
        if np.any(regions != first):
            raise ValueError(
                "element straddles a diffusion region; align the mesh with interfaces")
        return first

    def scaled(self, factor: float) -> "ProblemSpec":
        """Problem on the domain scaled by ``factor`` (x_hat = factor * x)."""
        inv = 1.0 / factor

        def wrap(fn, power):
            if fn is None:
                return None
            return lambda x, y, fn=fn, power=power: fn(x * inv, y * inv) * factor ** power

        x0, y0, x1, y1 = self.domain
        return ProblemSpec(
            name=self.name + f"@x{factor:g}",
            a_values=self.a_values,
            region_of=lambda x, y: self.region_of(x * inv, y * inv),
            f=wrap(self.f, -2),
            g_D=wrap(self.g_D, 0),
            g_N=wrap(self.g_N, -1),
            exact_u=wrap(self.exact_u, 0),
            exact_grad=wrap(self.exact_grad, -1),
            exact_h1_seminorm=self.exact_h1_seminorm,
            singular_points=tuple((sx * factor, sy * factor) for sx, sy in self.singular_points),
            domain=(x0 * factor, y0 * factor, x1 * factor, y1 * factor))


def _sinsin() -> ProblemSpec:
    pi = math.pi

    def u(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def f(x, y):
        return 2.0 * pi ** 2 * np.sin(pi * x) * np.sin(pi * y)

    def grad(x, y):
        return (pi * np.cos(pi * x) * np.sin(pi * y),
                pi * np.sin(pi * x) * np.cos(pi * y))

    return ProblemSpec(
        name="sinsin",
        a_values=(1.0,),
        f=f,
        g_D=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        exact_u=u,
        exact_grad=grad,
        exact_h1_seminorm=pi / math.sqrt(2.0),
        domain=(0.0, 0.0, 1.0, 1.0))


def jump_singular_parameters() -> tuple[float, float]:
    """Interface-problem exponent and amplitude, evaluated in high precision."""
    import mpmath as mp

    with mp.workdps(50):
        lam = 4 / mp.pi * mp.atan(mp.sqrt(mp.mpf(103) / 301))
        beta = -100 * mp.sin(lam * mp.pi / 4) / mp.sin(3 * lam * mp.pi / 4)
        return float(lam), float(beta)


def _jump_singular() -> ProblemSpec:
    lam, beta = jump_singular_parameters()
    quarter_pi = math.pi / 4.0

    def split(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        first = (x >= 0.0) & (y >= 0.0)
        return r, phi, first

    def u(x, y):
        r, phi, first = split(x, y)
        mu1 = np.cos(lam * (phi - quarter_pi))
        mu2 = beta * np.cos(lam * (math.pi - np.abs(phi - quarter_pi)))
        val = np.where(first, mu1, mu2) * np.power(r, lam, where=r > 0,
                                                   out=np.zeros_like(r))
        return np.where(r > 0, val, 0.0)

    def grad(x, y):
        r, phi, first = split(x, y)
        mu1 = np.cos(lam * (phi - quarter_pi))
        dmu1 = -lam * np.sin(lam * (phi - quarter_pi))
        arg = math.pi - np.abs(phi - quarter_pi)
        mu2 = beta * np.cos(lam * arg)
        dmu2 = beta * lam * np.sign(phi - quarter_pi) * np.sin(lam * arg)
        mu = np.where(first, mu1, mu2)
        dmu = np.where(first, dmu1, dmu2)
        with np.errstate(divide="ignore", invalid="ignore"):
            rl1 = np.power(r, lam - 1.0, where=r > 0, out=np.zeros_like(r))
        ux = rl1 * (lam * mu * np.cos(phi) - dmu * np.sin(phi))
        uy = rl1 * (lam * mu * np.sin(phi) + dmu * np.cos(phi))
        return np.where(r > 0, ux, 0.0), np.where(r > 0, uy, 0.0)

    def region(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return ((x > 0.0) & (y > 0.0)).astype(int)

    return ProblemSpec(
        name="jump_singular",
        a_values=(1.0, 100.0),
        region_of=region,
        f=None,
        g_D=u,
        exact_u=u,
        exact_grad=grad,
        singular_points=((0.0, 0.0),),
        domain=(-1.0, -1.0, 1.0, 1.0))


_BUILTINS = {"sinsin": _sinsin, "jump_singular": _jump_singular}


def builtin_problem(name: str) -> ProblemSpec:
    """Construct a named built-in problem."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownProblem(
            f"unknown problem {name!r}; known: {sorted(_BUILTINS)}") from None
    return factory()
