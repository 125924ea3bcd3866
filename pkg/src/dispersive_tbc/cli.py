"""Command-line entry point: ``run``, ``converge-space``, ``converge-time``, ``kernels-dump``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .config import EXPERIMENTS, ConfigError, RunConfig, build_config, convert, manifest_dict, read_config_file

log = logging.getLogger("dispersive_tbc")

COMMAND_EXPERIMENT = {
    "run": None,
    "converge-space": "converge_space",
    "converge-time": "converge_time",
    "kernels-dump": "kernels_dump",
}

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path: Path, data) -> None:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(type(o))

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:.6f}.csv"


def cmd_run(cfg: RunConfig, out: Path) -> str:
    res = experiments.run_experiment(cfg)
    files = []
    for s in res.snapshots:
        name = snapshot_name(s.t)
        exact = s.exact if s.exact is not None else [None] * len(s.x)
        err = s.abs_error if s.exact is not None else [None] * len(s.x)
        write_csv(out / name, ["x", "u_numeric", "u_exact", "abs_error"], zip(s.x, s.u, exact, err))
        files.append(name)
    write_json(out / "manifest.json", {"config": manifest_dict(cfg), "files": files, "results": res.info})
    errs = [e for e in res.info["snapshot_max_abs_error"] if e is not None]
    worst = f"{max(errs):.3e}" if errs else "n/a"
    return (
        f"run {cfg.experiment}: g={cfg.g_kind} N={cfg.n_modes} m={cfg.n_steps} T={cfg.t_final} "
        f"snapshots={len(files)} max|err|={worst} bc_residual={res.info['max_bc_residual']:.2e}"
    )


def cmd_converge_space(cfg: RunConfig, out: Path) -> str:
    res = experiments.converge_space(cfg)
    write_csv(
        out / "converge_space.csv",
        ["g", "N", "rel_l2", "pointwise_l2", "final_rel"],
        ([r["g"], r["N"], r["rel_l2"], r["pointwise_l2"], r["final_rel"]] for r in res["rows"]),
    )
    write_json(out / "manifest.json", {"config": manifest_dict(cfg), "files": ["converge_space.csv"], "fits": res["fits"]})
    parts = [f"g={g}: slope(log err vs N^2)={f['slope_vs_n2']:.3e}" for g, f in res["fits"].items()]
    return "converge-space " + "; ".join(parts)


def cmd_converge_time(cfg: RunConfig, out: Path) -> str:
    res = experiments.converge_time(cfg)
    write_csv(
        out / "converge_time.csv",
        ["g", "m", "tau", "rel_error"],
        ([r["g"], r["m"], r["tau"], r["rel_error"]] for r in res["rows"]),
    )
    write_json(out / "manifest.json", {"config": manifest_dict(cfg), "files": ["converge_time.csv"], "slopes": res["slopes"]})
    return "converge-time " + "; ".join(f"g={g}: slope={s:.3f}" for g, s in res["slopes"].items())


def cmd_kernels_dump(cfg: RunConfig, out: Path) -> str:
    rep = experiments.kernel_report(cfg)
    rep["kernels"].to_csv(out / "kernels.csv")
    info = {k: v for k, v in rep.items() if k != "kernels"}
    info["y0"] = list(rep["kernels"].y0)
    write_json(out / "manifest.json", {"config": manifest_dict(cfg), "files": ["kernels.csv"], "kernels": info})
    return (
        f"kernels-dump: taps={rep['kernels'].m_max + 1} radius={rep['radius']:.6f} "
        f"N_z={rep['n_samples']} doubling_delta={rep['doubling_delta']:.2e} max_imag={rep['max_imag']:.2e}"
    )


COMMANDS = {
    "run": cmd_run,
    "converge-space": cmd_converge_space,
    "converge-time": cmd_converge_time,
    "kernels-dump": cmd_kernels_dump,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dispersive-tbc", description="Transparent-boundary spectral solver for u_t + g u_x + u_xxx = 0")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--config", help="flat key = value file")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("-v", "--verbose", action="store_true")
    for f in dataclasses.fields(RunConfig):
        if f.name in ("experiment", "output_dir"):
            continue
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, metavar="VALUE")
    return p


def parse(argv) -> tuple[str, RunConfig, bool]:
    args = make_parser().parse_args(argv)
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {}
    for f in dataclasses.fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is None or f.name == "experiment":
            continue
        overrides[f.name] = convert(f.name, raw) if f.name != "output_dir" else raw
    experiment = args.experiment or file_values.get("experiment") or COMMAND_EXPERIMENT[args.command]
    return args.command, build_config(experiment, file_values, overrides), args.verbose


def main(argv=None) -> int:
    try:
        command, cfg, verbose = parse(sys.argv[1:] if argv is None else argv)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = COMMANDS[command](cfg, out)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
