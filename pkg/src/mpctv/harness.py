"""Iteration-count sweeps over (method, noise variance, power m) combinations.

One sweep runs the solver once up to the largest requested iteration count and
records metrics after every step; the iterate after ``N`` steps does not depend
on the total run length, so this is equivalent to separate runs per ``N``.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .image_core import as_image
from .io import read_image, write_csv
from .metrics import DEFAULT_PROFILE
from .noise import NoiseSpec, add_noise
from .solver import Method, SolverConfig, denoise

log = logging.getLogger(__name__)

SWEEP_HEADER = ("iteration", "snr_db", "mssim", "energy")
SUMMARY_HEADER = ("method", "noise", "variance", "power_m", "best_iteration", "highest_snr", "best_mssim_iteration", "highest_mssim")


@dataclass
class SweepResult:
    method: Method
    noise: NoiseSpec
    power_m: int | None
    rows: list[tuple[int, float, float, float]]

    @property
    def label(self) -> str:
        var = self.noise.variance if self.noise.variance is not None else self.noise.density
        m = f"_m{self.power_m}" if self.power_m is not None else ""
        return f"{self.method.value}_{self.noise.kind}{var:g}{m}"

    def _col(self, k):
        return np.array([r[k] for r in self.rows])

    @property
    def iterations(self):
        return self._col(0).astype(int)

    @property
    def snr(self):
        return self._col(1)

    @property
    def mssim(self):
        return self._col(2)

    def best(self) -> tuple[int, float]:
        """(best iteration, highest SNR); earliest iteration wins ties."""
        k = int(np.argmax(self.snr))
        return int(self.rows[k][0]), float(self.rows[k][1])

    def best_mssim(self) -> tuple[int, float]:
        k = int(np.argmax(self.mssim))
        return int(self.rows[k][0]), float(self.rows[k][2])

    def snr_at(self, n: int) -> float:
        return float(self.snr[list(self.iterations).index(n)])

    def mssim_at(self, n: int) -> float:
        return float(self.mssim[list(self.iterations).index(n)])

    def restrict(self, iterations) -> "SweepResult":
        keep = set(iterations)
        return replace(self, rows=[r for r in self.rows if r[0] in keep])


def parse_range(text: str) -> range:
    """``"1-35"`` -> ``range(1, 36)``; a single number means ``1..n``."""
    text = str(text).strip()
    try:
        if "-" in text:
            a, b = (int(x) for x in text.split("-", 1))
        else:
            a, b = 1, int(text)
    except ValueError:
        raise ConfigError(f"iteration range: cannot parse {text!r}") from None
    if a < 1:
        raise ConfigError("iteration range must start at >= 1")
    r = range(a, b + 1)
    if len(r) == 0:
        raise ConfigError(f"iteration range {text!r} is empty")
    return r


def iteration_sweep(
    noisy,
    clean,
    cfg: SolverConfig,
    iterations: range = range(1, 36),
    *,
    noise: NoiseSpec | None = None,
    profile: str = DEFAULT_PROFILE,
) -> SweepResult:
    """Run once to ``max(iterations)`` and keep the rows inside ``iterations``."""
    if len(iterations) == 0:
        raise ConfigError("iteration range is empty")
    run = replace(cfg, iterations=max(iterations), trace=True)
    _, trace = denoise(noisy, run, clean=clean, profile=profile)
    keep = set(iterations)
    rows = [(r.iteration, r.snr_db, r.mssim, r.energy) for r in trace.rows if r.iteration in keep]
    m = cfg.power_m if cfg.method is Method.MPC_TV else None
    return SweepResult(cfg.method, noise or NoiseSpec("gaussian", variance=0.0), m, rows)


@dataclass
class ExperimentPlan:
    clean_path: Path
    noises: list[NoiseSpec]
    configs: list[SolverConfig]
    iterations: range = range(1, 36)
    out_dir: Path = Path("sweep-out")
    profile: str = DEFAULT_PROFILE
    workers: int = 1
    plot: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentPlan":
        if len(self.iterations) == 0:
            raise ConfigError("iteration range is empty")
        if not Path(self.clean_path).is_file():
            raise ConfigError(f"clean image not found: {self.clean_path}")
        if not self.noises:
            raise ConfigError("plan has no noise specs")
        if not self.configs:
            raise ConfigError("plan has no solver configs")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def combinations(self):
        for spec in self.noises:
            for cfg in self.configs:
                yield spec, cfg


def _run_one(args):
    clean, spec, cfg, iterations, profile = args
    noisy = add_noise(clean, spec)
    return iteration_sweep(noisy, clean, cfg, iterations, noise=spec, profile=profile)


def _plot(result: SweepResult, path: Path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:  # plots are optional
        log.warning("matplotlib not available; skipping %s", path.name)
        return
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(result.iterations, result.snr, marker=".")
    ax.set_xlabel("iteration")
    ax.set_ylabel("SNR (dB)")
    ax.set_title(result.label)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def summary_rows(results):
    for res in results:
        n, s = res.best()
        nm, sm = res.best_mssim()
        var = res.noise.variance if res.noise.variance is not None else res.noise.density
        yield (
            res.method.value,
            res.noise.kind,
            f"{var:g}",
            "" if res.power_m is None else res.power_m,
            n,
            repr(s),
            nm,
            repr(sm),
        )


def run_plan(plan: ExperimentPlan) -> list[SweepResult]:
    """Execute every combination and write per-combination and summary CSVs."""
    plan.validate()
    clean = as_image(read_image(plan.clean_path))
    jobs = [(clean, spec, cfg, plan.iterations, plan.profile) for spec, cfg in plan.combinations()]
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    out = Path(plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for res in results:
        write_csv(out / f"{res.label}.csv", SWEEP_HEADER, ([n, repr(s), repr(m), repr(e)] for n, s, m, e in res.rows))
        if plan.plot:
            _plot(res, out / f"{res.label}.png")
        log.info("%s: best iteration %d, SNR %.4f dB", res.label, *res.best())
    write_csv(out / "summary.csv", SUMMARY_HEADER, summary_rows(results))
    return results
