"""``mpctv`` command-line entry point.

Exit status: 0 on success, 1 for usage or configuration errors, 2 for runtime
failures (unreadable files, calibration errors, ...).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, MPCTVError
from .harness import ExperimentPlan, parse_range, run_plan
from .io import ImageFormatError, atomic_write_text, read_image, write_csv, write_image
from .metrics import PROFILES, evaluate
from .noise import CONVENTIONS, KINDS, NoiseSpec, add_noise
from .phase_congruency import PCParams, adjust_factor, phase_congruency
from .solver import Method, SolverConfig, denoise

log = logging.getLogger("mpctv")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

# config-file key -> (attribute, parser)
SOLVER_KEYS = {
    "dt": ("dt", float),
    "lambda": ("lam", float),
    "eps0": ("eps0", float),
    "iterations": ("iterations", int),
    "power_m": ("power_m", int),
    "method": ("method", str),
}
PC_KEYS = {
    "orientation_count": int,
    "scale_count": int,
    "min_wavelength": float,
    "scale_multiplier": float,
    "sigma_on_f": float,
    "noise_threshold_k": float,
    "boundary": str,
}
CONFIG_KEYS = set(SOLVER_KEYS) | set(PC_KEYS) | {"seed"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _merged(args) -> dict[str, str]:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v)
    return values


def _convert(values: dict, key: str, typ):
    try:
        return typ(values[key])
    except ValueError:
        raise ConfigError(f"{key}: invalid value {values[key]!r}") from None


def build_configs(values: dict) -> tuple[SolverConfig, PCParams]:
    pc_kw = {k: _convert(values, k, t) for k, t in PC_KEYS.items() if k in values}
    pc = PCParams(**pc_kw)
    kw = {attr: _convert(values, key, t) for key, (attr, t) in SOLVER_KEYS.items() if key in values}
    return SolverConfig(pc=pc, **kw), pc


def _add_config_args(p, *, solver=True, pc=True):
    p.add_argument("--config", type=Path, help="key=value configuration file")
    if solver:
        p.add_argument("--dt", type=float)
        p.add_argument("--lambda", dest="lambda", type=float)
        p.add_argument("--eps0", type=float)
        p.add_argument("-n", "--iterations", type=int)
        p.add_argument("--power-m", dest="power_m", type=int)
        p.add_argument("--method", choices=[m.value for m in Method])
    if pc:
        for key, typ in PC_KEYS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ)


def _seed(values, default=0) -> int:
    return _convert(values, "seed", int) if "seed" in values else default


def cmd_add_noise(args) -> int:
    values = _merged(args)
    spec = NoiseSpec(
        kind=args.kind,
        variance=args.variance,
        density=args.density,
        seed=_seed(values),
        convention=args.convention,
    )
    clean = read_image(args.input)
    noisy = add_noise(clean, spec)
    write_image(args.output, noisy)
    sidecar = {"input": str(args.input), "noise": json.loads(spec.to_json())}
    atomic_write_text(str(args.output) + ".json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_denoise(args) -> int:
    cfg, _ = build_configs(_merged(args))
    u0 = read_image(args.input)
    clean = read_image(args.clean) if args.clean else None
    u, trace = denoise(u0, cfg)
    write_image(args.output, u)
    log.info("%s, %d iterations in %.2f s", cfg.method.value, cfg.iterations, trace.elapsed)
    if clean is not None:
        rep = evaluate(u, clean, args.profile)
        print(f"snr_db={rep.snr_db:.4f} mssim={rep.mssim:.4f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    u = read_image(args.input)
    clean = read_image(args.clean)
    rep = evaluate(u, clean, args.profile)
    image_id = args.image_id or Path(args.input).stem
    if args.header:
        print("image_id,method,iterations,snr_db,mssim")
    print(f"{image_id},{args.method},{'' if args.iterations is None else args.iterations},{rep.snr_db:.6f},{rep.mssim:.6f}")
    return EXIT_OK


def _csv_list(text, typ):
    try:
        return [typ(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def cmd_sweep(args) -> int:
    values = _merged(args)
    iterations = parse_range(args.range)
    base, _ = build_configs(values)
    seed = _seed(values)
    methods = [Method.parse(m) for m in _csv_list(args.methods, str)]
    powers = _csv_list(args.powers, int)
    variances = _csv_list(args.variances, float)
    if not methods or not powers or not variances:
        raise ConfigError("methods, powers and variances must be non-empty")
    noises = [NoiseSpec(args.kind, variance=v, seed=seed, convention=args.convention) for v in variances]
    configs = []
    for m in methods:
        if m is Method.TV:
            configs.append(base.with_(method=m))
        else:
            configs.extend(base.with_(method=m, power_m=p).validate() for p in powers)
    plan = ExperimentPlan(
        clean_path=args.clean,
        noises=noises,
        configs=configs,
        iterations=iterations,
        out_dir=args.out_dir,
        profile=args.profile,
        workers=args.workers,
        plot=args.plot,
    )
    results = run_plan(plan)
    for res in results:
        n, s = res.best()
        print(f"{res.label}: best_iteration={n} highest_snr={s:.4f}")
    return EXIT_OK


def _to_byte_range(x, lo=None, hi=None):
    lo = float(np.min(x)) if lo is None else lo
    hi = float(np.max(x)) if hi is None else hi
    if hi <= lo:
        return np.zeros_like(x)
    return (np.asarray(x) - lo) / (hi - lo) * 255.0


def cmd_pc_map(args) -> int:
    values = _merged(args)
    _, pc_params = build_configs({k: v for k, v in values.items() if k in PC_KEYS})
    m = args.power_m
    if not 1 <= m <= 5:
        raise ConfigError(f"power_m must be in 1..5 (got {m})")
    u = read_image(args.input)
    res = phase_congruency(u / 255.0, pc_params)
    g = adjust_factor(res.M_norm, m)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_image(out / "M.pgm", _to_byte_range(res.M))
    write_image(out / "M_norm.pgm", res.M_norm * 255.0)
    write_image(out / "g.pgm", g * 255.0)
    rows, cols = np.indices(u.shape)
    write_csv(
        out / "pc_values.csv",
        ("row", "col", "M", "M_norm", "g"),
        zip(rows.ravel(), cols.ravel(), map(repr, res.M.ravel()), map(repr, res.M_norm.ravel()), map(repr, g.ravel())),
    )
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mpctv", description="TV and MPC-TV image denoising toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("add-noise", help="add synthetic noise to an image")
    s.add_argument("input", type=Path)
    s.add_argument("output", type=Path)
    s.add_argument("--kind", choices=KINDS, default="gaussian")
    s.add_argument("--variance", type=float)
    s.add_argument("--density", type=float)
    s.add_argument("--convention", choices=CONVENTIONS, default="unit")
    s.add_argument("--seed", type=int)
    s.add_argument("--config", type=Path)
    s.set_defaults(func=cmd_add_noise)

    s = sub.add_parser("denoise", help="run TV or MPC-TV on an image")
    s.add_argument("input", type=Path)
    s.add_argument("output", type=Path)
    s.add_argument("--clean", type=Path, help="reference image; prints SNR and MSSIM")
    s.add_argument("--profile", choices=sorted(PROFILES), default="reported")
    _add_config_args(s)
    s.set_defaults(func=cmd_denoise)

    s = sub.add_parser("sweep", help="SNR/MSSIM versus iteration count")
    s.add_argument("--clean", type=Path, required=True)
    s.add_argument("--out-dir", type=Path, required=True)
    s.add_argument("--kind", choices=KINDS, default="gaussian")
    s.add_argument("--variances", default="300")
    s.add_argument("--convention", choices=CONVENTIONS, default="unit")
    s.add_argument("--methods", default="tv,mpc-tv")
    s.add_argument("--powers", default="2")
    s.add_argument("--range", default="1-35", help="iteration range, e.g. 1-35")
    s.add_argument("--profile", choices=sorted(PROFILES), default="reported")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--plot", action="store_true", help="also render PNG line plots")
    s.add_argument("--seed", type=int)
    _add_config_args(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("evaluate", help="one CSV record: image_id,method,iterations,snr_db,mssim")
    s.add_argument("input", type=Path)
    s.add_argument("--clean", type=Path, required=True)
    s.add_argument("--image-id")
    s.add_argument("--method", default="")
    s.add_argument("--iterations", type=int)
    s.add_argument("--profile", choices=sorted(PROFILES), default="reported")
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("pc-map", help="write M, M_norm and g images for inspection")
    s.add_argument("input", type=Path)
    s.add_argument("out_dir", type=Path)
    s.add_argument("--power-m", dest="power_m", type=int, default=2)
    _add_config_args(s, solver=False)
    s.set_defaults(func=cmd_pc_map)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mpctv: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MPCTVError, ImageFormatError, OSError, ValueError) as exc:
        print(f"mpctv: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
