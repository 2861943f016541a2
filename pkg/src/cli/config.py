"""Run configuration assembled from settings.default.json, a user override and CLI flags."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from src.core.kernels import ProblemParams
from src.core.settings import as_bool, load_settings, section, worker_count
from src.core.solver import make_grid
from src.core.spectral import SpectralDensity, lambda_grid


FORMATS = ("csv", "json")


@dataclass(frozen=True)
class CheckTolerances:
    slope_tol: float = 0.05
    tail_tol: float = 0.02
    inversion_tol: float = 1e-3
    transform_tol: float = 1e-4


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    n: int = 3
    s: float = 0.5
    p: float = 1.5
    rho_min: float = 0.01
    rho_max: float = 15.0
    nodes: int = 200
    spacing: str = "mixed"
    lambda_max: float = 12.0
    lambda_panels: int = 24
    tol: float = 1e-6
    max_iter: int = 500
    damping: float = 0.5
    fmt: str = "csv"
    out: Optional[Path] = None
    allow_critical: bool = False
    debug: bool = False
    threads: int = 0
    checks: CheckTolerances = field(default_factory=CheckTolerances)

    def __post_init__(self) -> None:
        if self.fmt not in FORMATS:
            raise ValueError(f"Output format must be one of {FORMATS}, got {self.fmt!r}")
        ProblemParams(self.n, self.s, self.p)

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.n, self.s, self.p)

    def grid(self, rho_max: Optional[float] = None):
        return make_grid(self.rho_min, rho_max or self.rho_max, self.nodes, self.spacing)

    def lambdas(self) -> SpectralDensity:
        return lambda_grid(self.lambda_max, self.lambda_panels)

    @property
    def workers(self) -> int:
        return worker_count({"general": {"threads": self.threads}})

    def as_dict(self) -> dict:
        data = asdict(self)
        data["out"] = str(self.out) if self.out is not None else None
        return data


def _pick(options: Mapping[str, Any], name: str, fallback):
    value = options.get(name)
    return fallback if value is None else value


def build_config(
    subcommand: str,
    options: Mapping[str, Any],
    settings_path: Optional[Path] = None,
) -> RunConfig:
    """Defaults < settings JSON < explicit CLI options (None means "not given")."""

    settings = load_settings(settings_path)
    general = section(settings, "general")
    grid = section(settings, "grid")
    spectral = section(settings, "spectral")
    solver = section(settings, "solver")
    checks = section(settings, "checks")
    base = RunConfig(subcommand)
    tolerances = CheckTolerances(
        slope_tol=float(checks.get("slope_tol", base.checks.slope_tol)),
        tail_tol=float(checks.get("tail_tol", base.checks.tail_tol)),
        inversion_tol=float(checks.get("inversion_tol", base.checks.inversion_tol)),
        transform_tol=float(checks.get("transform_tol", base.checks.transform_tol)),
    )
    out = options.get("out")
    return RunConfig(
        subcommand=subcommand,
        n=int(_pick(options, "n", base.n)),
        s=float(_pick(options, "s", base.s)),
        p=float(_pick(options, "p", base.p)),
        rho_min=float(_pick(options, "rho_min", grid.get("rho_min", base.rho_min))),
        rho_max=float(_pick(options, "rho_max", grid.get("rho_max", base.rho_max))),
        nodes=int(_pick(options, "nodes", grid.get("nodes", base.nodes))),
        spacing=str(_pick(options, "spacing", grid.get("spacing", base.spacing))),
        lambda_max=float(_pick(options, "lambda_max", spectral.get("lambda_max", base.lambda_max))),
        lambda_panels=int(
            _pick(options, "lambda_panels", spectral.get("lambda_panels", base.lambda_panels))
        ),
        tol=float(_pick(options, "tol", solver.get("tol", base.tol))),
        max_iter=int(_pick(options, "max_iter", solver.get("max_iter", base.max_iter))),
        damping=float(_pick(options, "damping", solver.get("damping", base.damping))),
        fmt=str(_pick(options, "fmt", base.fmt)),
        out=Path(out) if out else None,
        allow_critical=bool(options.get("allow_critical", False)),
        debug=bool(options.get("debug")) or as_bool(general.get("debug_log"), False),
        threads=int(general.get("threads", 0) or 0),
        checks=tolerances,
    )
