"""Scenario parameterization: infection kernels, diffusion specs, validation.

A scenario bundles everything one experiment needs: dimension, cloud
intensity, infectivity (finite or infinite), removal rate, the spatial
infection kernel, the per-particle motion law, box truncation and numerics.
Everything here is immutable after validation and safe to share across
parallel replicates.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

INFINITE = math.inf

_GAUSSIAN_SUPPORT_EPS = 1e-12  # mu below eps*mu_max treated as out of reach


# --------------------------------------------------------------------------
# infection kernels


@dataclass(frozen=True)
class KernelSpec:
    """Spatial infection weight mu(x), radially symmetric.

    variant: "unit_ball" | "ball" | "gaussian" | "radial_table".
    Indicators are closed balls: membership at the exact radius counts as
    inside.  A finite mu_max is always available (thinning needs it); for
    radial tables the caller must supply it.
    """

    variant: str
    radius: float = 1.0
    scale: float = 1.0
    radii: Optional[tuple] = None
    values: Optional[tuple] = None
    mu_max: Optional[float] = None
    radially_decreasing: bool = False

    @staticmethod
    def unit_ball() -> "KernelSpec":
        return KernelSpec(variant="unit_ball", radius=1.0)

    @staticmethod
    def ball(radius: float) -> "KernelSpec":
        return KernelSpec(variant="ball", radius=float(radius))

    @staticmethod
    def gaussian(scale: float) -> "KernelSpec":
        return KernelSpec(variant="gaussian", scale=float(scale))

    @staticmethod
    def radial_table(radii: Sequence[float], values: Sequence[float],
                     mu_max: float, radially_decreasing: bool = False) -> "KernelSpec":
        return KernelSpec(
            variant="radial_table",
            radii=tuple(float(r) for r in radii),
            values=tuple(float(v) for v in values),
            mu_max=float(mu_max),
            radially_decreasing=radially_decreasing,
        )

    @property
    def is_ball_indicator(self) -> bool:
        return self.variant in ("unit_ball", "ball")

    def max_value(self) -> float:
        if self.is_ball_indicator or self.variant == "gaussian":
            return 1.0
        if self.mu_max is None:
            raise ValueError("radial_table kernel requires an explicit mu_max")
        return self.mu_max

    def support_radius(self) -> float:
        """Radius beyond which mu is treated as zero (exact for indicators)."""
        if self.is_ball_indicator:
            return self.radius if self.variant == "ball" else 1.0
        if self.variant == "gaussian":
            return self.scale * math.sqrt(-2.0 * math.log(_GAUSSIAN_SUPPORT_EPS))
        return self.radii[-1]


def ball_volume(d: int, r: float) -> float:
    """Lebesgue volume of the closed r-ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r ** d


def kernel_mass(k: KernelSpec, d: int) -> float:
    """Volume integral of the kernel over R^d.

    Exact for indicators and Gaussians; radial quadrature for tables.
    """
    if k.variant == "unit_ball":
        return ball_volume(d, 1.0)
    if k.variant == "ball":
        return ball_volume(d, k.radius)
    if k.variant == "gaussian":
        return (k.scale * math.sqrt(2.0 * math.pi)) ** d
    # radial table: integrate mu(r) * surface_area(d, r) dr on a dense grid
    from scipy.integrate import trapezoid

    r_hi = k.radii[-1]
    grid = np.linspace(0.0, r_hi, 4001)
    mu = np.interp(grid, k.radii, k.values, right=0.0)
    surface = d * ball_volume(d, 1.0) * grid ** (d - 1)
    return float(trapezoid(mu * surface, grid))


def kernel_eval(k: KernelSpec, x) -> float:
    """mu(x) for a single point."""
    return float(kernel_eval_radial(k, np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2))))


def kernel_eval_radial(k: KernelSpec, dist):
    """mu as a function of distance; accepts scalars or arrays."""
    dist = np.asarray(dist, dtype=float)
    if k.variant == "unit_ball":
        return (dist <= 1.0).astype(float)
    if k.variant == "ball":
        return (dist <= k.radius).astype(float)
    if k.variant == "gaussian":
        return np.exp(-(dist ** 2) / (2.0 * k.scale ** 2))
    return np.interp(dist, k.radii, k.values, right=0.0)


# --------------------------------------------------------------------------
# diffusion specifications


@dataclass(frozen=True)
class DiffusionSpec:
    """Motion law followed by a particle once it moves (started at 0).

    variant: "brownian" | "brownian_drift" | "ou" | "general" | "static".
    "general" carries drift/dispersion callables and is Euler-Maruyama only;
    it cannot round-trip through scenario files.
    """

    variant: str
    drift: Optional[tuple] = None            # brownian_drift
    matrix: Optional[tuple] = None           # ou: rows of A
    drift_fn: Optional[Callable] = field(default=None, compare=False)
    dispersion_fn: Optional[Callable] = field(default=None, compare=False)

    @staticmethod
    def brownian() -> "DiffusionSpec":
        return DiffusionSpec(variant="brownian")

    @staticmethod
    def brownian_with_drift(drift: Sequence[float]) -> "DiffusionSpec":
        return DiffusionSpec(variant="brownian_drift", drift=tuple(float(v) for v in drift))

    @staticmethod
    def ornstein_uhlenbeck(matrix) -> "DiffusionSpec":
        rows = tuple(tuple(float(v) for v in row) for row in matrix)
        return DiffusionSpec(variant="ou", matrix=rows)

    @staticmethod
    def general(drift_fn: Callable, dispersion_fn: Callable) -> "DiffusionSpec":
        return DiffusionSpec(variant="general", drift_fn=drift_fn, dispersion_fn=dispersion_fn)

    @staticmethod
    def static() -> "DiffusionSpec":
        return DiffusionSpec(variant="static")

    @property
    def exact_gaussian(self) -> bool:
        """True when increments can be drawn exactly (no Euler-Maruyama bias)."""
        return self.variant in ("brownian", "brownian_drift", "static")


# --------------------------------------------------------------------------
# numerics and the scenario


@dataclass(frozen=True)
class NumericsConfig:
    dt: float = 1e-3
    path_chunk: int = 4096
    bridge_correction: bool = False
    max_path_steps: int = 5_000_000


@dataclass(frozen=True)
class ScenarioConfig:
    dimension: int
    lam: float
    rho: float                       # in (0, inf]; INFINITE for the instant-contact regime
    alpha: float
    kernel: KernelSpec
    diffusion: DiffusionSpec
    box_half_width: float
    numerics: NumericsConfig = NumericsConfig()
    seed: int = 0
    model: str = "delayed"           # "delayed" | "diffusion"

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def validate_config(cfg: ScenarioConfig) -> list:
    """Collect invariant violations; an empty list means the config is valid."""
    errors = []
    if not (isinstance(cfg.dimension, int) and cfg.dimension >= 1):
        errors.append("dimension: must be an integer >= 1")
    if not cfg.lam > 0:
        errors.append("lambda: intensity must be positive")
    if not cfg.alpha >= 0:
        errors.append("alpha: removal rate must be >= 0")
    if not (cfg.rho > 0):
        errors.append("rho: infectivity must be positive (or infinite)")
    if not cfg.box_half_width > 0:
        errors.append("box_half_width: must be positive")
    if not cfg.numerics.dt > 0:
        errors.append("numerics.dt: time step must be positive")
    if cfg.model not in ("delayed", "diffusion"):
        errors.append("model: must be 'delayed' or 'diffusion'")

    k = cfg.kernel
    if k.variant not in ("unit_ball", "ball", "gaussian", "radial_table"):
        errors.append(f"kernel.variant: unknown variant {k.variant!r}")
    else:
        if k.variant == "ball" and not k.radius > 0:
            errors.append("kernel.radius: must be positive")
        if k.variant == "gaussian" and not k.scale > 0:
            errors.append("kernel.scale: must be positive")
        if k.variant == "radial_table":
            if not k.radii or not k.values or len(k.radii) != len(k.values):
                errors.append("kernel.radii/values: need matching nonempty tables")
            else:
                vals = np.asarray(k.values)
                if (vals < 0).any():
                    errors.append("kernel.values: kernel values must be >= 0")
                if k.mu_max is None:
                    errors.append("kernel.mu_max: radial_table requires an explicit bound")
                elif (vals > k.mu_max + 1e-12).any():
                    errors.append("kernel.mu_max: smaller than a table value")
                if k.radially_decreasing and (np.diff(vals) > 1e-12).any():
                    errors.append("kernel.values: flagged radially-decreasing but increasing in radius")
                if list(k.radii) != sorted(k.radii):
                    errors.append("kernel.radii: must be sorted increasing")
        try:
            mass = kernel_mass(k, max(cfg.dimension, 1))
            if not (0 < mass < math.inf):
                errors.append("kernel: volume integral must lie in (0, inf)")
        except (ValueError, TypeError):
            errors.append("kernel: volume integral not computable")

    if math.isinf(cfg.rho) and not k.is_ball_indicator:
        errors.append("rho: infinite-rho requires compact indicator kernel")

    if cfg.diffusion.variant not in ("brownian", "brownian_drift", "ou", "general", "static"):
        errors.append(f"diffusion.variant: unknown variant {cfg.diffusion.variant!r}")
    if cfg.diffusion.variant == "general" and (
        cfg.diffusion.drift_fn is None or cfg.diffusion.dispersion_fn is None
    ):
        errors.append("diffusion: general variant needs drift_fn and dispersion_fn")

    return errors


def validated(cfg: ScenarioConfig) -> ScenarioConfig:
    errors = validate_config(cfg)
    if errors:
        raise ValueError("invalid scenario: " + "; ".join(errors))
    return cfg


# --------------------------------------------------------------------------
# particle records


class Status(enum.Enum):
    SUSCEPTIBLE = "S"
    INFECTED = "I"
    REMOVED = "R"


_LEGAL_TRANSITIONS = {
    (Status.SUSCEPTIBLE, Status.INFECTED),
    (Status.INFECTED, Status.REMOVED),
}


@dataclass
class ParticleRecord:
    """One particle's point, epidemic status and (post-infection) trajectory."""

    index: int
    origin: np.ndarray
    status: Status = Status.SUSCEPTIBLE
    infection_time: Optional[float] = None
    lifetime: Optional[float] = None
    path: object = None
    parent: Optional[int] = None
    generation: Optional[int] = None

    def transition(self, new_status: Status) -> None:
        if (self.status, new_status) not in _LEGAL_TRANSITIONS:
            raise ValueError(f"illegal transition {self.status} -> {new_status}")
        self.status = new_status


# --------------------------------------------------------------------------
# scenario files (TOML or JSON); field names follow the documented symbol
# table: lambda, rho ("inf" allowed), alpha.


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    k = cfg.kernel
    kernel: dict = {"variant": k.variant}
    if k.variant == "ball":
        kernel["radius"] = k.radius
    if k.variant == "gaussian":
        kernel["scale"] = k.scale
    if k.variant == "radial_table":
        kernel.update(radii=list(k.radii), values=list(k.values),
                      mu_max=k.mu_max, radially_decreasing=k.radially_decreasing)
    diff: dict = {"variant": cfg.diffusion.variant}
    if cfg.diffusion.variant == "brownian_drift":
        diff["drift"] = list(cfg.diffusion.drift)
    if cfg.diffusion.variant == "ou":
        diff["matrix"] = [list(row) for row in cfg.diffusion.matrix]
    if cfg.diffusion.variant == "general":
        raise ValueError("general diffusions cannot be serialized to scenario files")
    return {
        "dimension": cfg.dimension,
        "lambda": cfg.lam,
        "rho": "inf" if math.isinf(cfg.rho) else cfg.rho,
        "alpha": cfg.alpha,
        "kernel": kernel,
        "diffusion": diff,
        "box_half_width": cfg.box_half_width,
        "numerics": {
            "dt": cfg.numerics.dt,
            "path_chunk": cfg.numerics.path_chunk,
            "bridge_correction": cfg.numerics.bridge_correction,
            "max_path_steps": cfg.numerics.max_path_steps,
        },
        "seed": cfg.seed,
        "model": cfg.model,
    }


def scenario_from_dict(data: dict) -> ScenarioConfig:
    kd = data.get("kernel", {"variant": "unit_ball"})
    variant = kd.get("variant", "unit_ball")
    if variant == "unit_ball":
        kernel = KernelSpec.unit_ball()
    elif variant == "ball":
        kernel = KernelSpec.ball(kd["radius"])
    elif variant == "gaussian":
        kernel = KernelSpec.gaussian(kd["scale"])
    elif variant == "radial_table":
        kernel = KernelSpec.radial_table(
            kd["radii"], kd["values"], kd["mu_max"],
            kd.get("radially_decreasing", False))
    else:
        kernel = KernelSpec(variant=variant)

    dd = data.get("diffusion", {"variant": "brownian"})
    dvar = dd.get("variant", "brownian")
    if dvar == "brownian":
        diffusion = DiffusionSpec.brownian()
    elif dvar == "brownian_drift":
        diffusion = DiffusionSpec.brownian_with_drift(dd["drift"])
    elif dvar == "ou":
        diffusion = DiffusionSpec.ornstein_uhlenbeck(dd["matrix"])
    elif dvar == "static":
        diffusion = DiffusionSpec.static()
    else:
        diffusion = DiffusionSpec(variant=dvar)

    nd = data.get("numerics", {})
    numerics = NumericsConfig(
        dt=nd.get("dt", 1e-3),
        path_chunk=nd.get("path_chunk", 4096),
        bridge_correction=nd.get("bridge_correction", False),
        max_path_steps=nd.get("max_path_steps", 5_000_000),
    )
    rho = data.get("rho", 1.0)
    if isinstance(rho, str):
        if rho.lower() not in ("inf", "infinite", "infinity"):
            raise ValueError(f"unrecognized rho value {rho!r}")
        rho = INFINITE
    return ScenarioConfig(
        dimension=int(data["dimension"]),
        lam=float(data["lambda"]),
        rho=float(rho),
        alpha=float(data["alpha"]),
        kernel=kernel,
        diffusion=diffusion,
        box_half_width=float(data["box_half_width"]),
        numerics=numerics,
        seed=int(data.get("seed", 0)),
        model=data.get("model", "delayed"),
    )


def load_scenario(path: str) -> ScenarioConfig:
    if str(path).endswith(".toml"):
        try:
            import tomllib  # type: ignore[import-not-found]
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        with open(path) as fh:
            data = json.load(fh)
    return scenario_from_dict(data)


def save_scenario(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(cfg), fh, indent=2)
