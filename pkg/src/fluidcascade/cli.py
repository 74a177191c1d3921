"""Command line runner: construct, analyze, evolve, report.

Exit codes: 0 success, 2 invalid configuration, 3 numerical or feasibility failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys


from . import __version__
from . import cascade, config, constructions, evolution
from .errors import ConfigError, InfeasibleError, NumericalError
from .littlewood_paley import BesovParams, ResolutionPolicy, besov_profile, write_besov_csv
from .spectral import SparseSpectralField

log = logging.getLogger("fluidcascade")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
# construct writes field.json only below this many lattice points unless max_points says otherwise
FIELD_WRITE_BUDGET = 200_000


# ---------------------------------------------------------------------------
# helpers


def _euler_params(cfg):
    s, Q = config.require(cfg, "s", "Q")
    return constructions.EulerInitParams(s, Q)


def _nse_params(cfg):
    shells = config.require(cfg, "shells")[0]
    return constructions.NseInitParams(c=cfg.get("c", 0.2), epsilon=cfg.get("epsilon", 0.5),
                                       shells=tuple(shells),
                                       unit_lower_block=cfg.get("unit_lower_block", False))


def _kind(cfg):
    kind = cfg.get("kind") or {"euler": "euler", "nse": "nse"}.get(cfg.get("model", ""), None)
    if kind not in ("euler", "nse"):
        raise ConfigError("key 'kind' must be euler or nse")
    return kind


def _field(cfg) -> SparseSpectralField:
    """Field from ``field = path`` or built from the construction parameters."""
    if "field" in cfg:
        try:
            return SparseSpectralField.load(cfg["field"])
        except OSError as exc:
            raise ConfigError(f"cannot read field {cfg['field']}: {exc}") from None
    if _kind(cfg) == "euler":
        return constructions.euler_u0(_euler_params(cfg))
    datum = constructions.build_nse_datum(_nse_params(cfg))
    return datum.field(max_points=cfg.get("max_points", constructions.MATERIALIZE_BUDGET))


def _sha(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_manifest(out, command, cfg, outputs):
    manifest = {
        "command": command,
        "version": __version__,
        "config": config.dump(cfg),
        "outputs": {name: _sha(os.path.join(out, name)) for name in sorted(outputs)},
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _shell_range(cfg, lo, hi):
    if "q" in cfg:
        return [int(q) for q in cfg["q"]]
    return list(range(cfg.get("q_min", lo), cfg.get("q_max", hi) + 1))


# ---------------------------------------------------------------------------
# commands


def cmd_construct(cfg, out):
    kind = _kind(cfg)
    outputs = []
    if kind == "euler":
        p = _euler_params(cfg)
        if "r" in cfg:
            p.check_range(cfg["r"])
        u = constructions.euler_u0(p)
        u.save(os.path.join(out, "field.json"))
        outputs.append("field.json")
        report = {"kind": "euler", "s": p.s, "Q": p.Q, "stored_modes": len(u)}
    else:
        p = _nse_params(cfg)
        datum = constructions.build_nse_datum(p)
        with open(os.path.join(out, "blocks.csv"), "w") as fh:
            fh.write("j,q,block,lo,hi,count,min_norm,max_norm\n")
            for bs in datum.blocksets:
                names = ("A", "B", "C", "A*", "B*", "C*")
                for name, blk in zip(names, bs.as_tuple()):
                    fh.write(f"{bs.j},{bs.q},{name},\"{list(blk.lo)}\",\"{list(blk.hi)}\",{blk.count},"
                             f"{blk.min_norm()!r},{blk.max_norm()!r}\n")
        with open(os.path.join(out, "gaps.csv"), "w") as fh:
            fh.write("q_i,q_next,ratio,pass\n")
            for a, b, r, ok in constructions.validate_gaps(p).pairs:
                fh.write(f"{a},{b},{r!r},{ok}\n")
        outputs += ["blocks.csv", "gaps.csv"]
        report = {"kind": "nse", "c": p.c, "epsilon": p.epsilon, "shells": list(p.shells),
                  "stored_modes": datum.count("all")}
        budget = cfg.get("max_points", FIELD_WRITE_BUDGET)
        if datum.count("all") <= budget:
            datum.field(max_points=budget).save(os.path.join(out, "field.json"))
            outputs.append("field.json")
            report["field_written"] = True
        else:
            report["field_written"] = False
            report["reason"] = f"{datum.count('all')} lattice points exceed max_points={budget}"
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append("report.json")
    return outputs


def cmd_transfer(cfg, out):
    p = _euler_params(cfg)
    u0 = constructions.euler_u0(p)
    rows = [cascade.transfer_coefficient(u0, q, p.s, p.Q) for q in _shell_range(cfg, 1, p.Q - 1)]
    cascade.write_transfer_csv(rows, os.path.join(out, "transfer.csv"))
    return ["transfer.csv"]


def cmd_triads(cfg, out):
    datum = constructions.build_nse_datum(_nse_params(cfg))
    js = cfg.get("j", list(range(1, datum.J + 1)))
    kw = {"max_points": cfg["max_points"]} if "max_points" in cfg else {}
    rows = [cascade.triad_energy_terms(datum, int(j), **kw) for j in js]
    cascade.write_triads_csv(rows, datum, os.path.join(out, "triads.csv"))
    return ["triads.csv"]


def cmd_besov(cfg, out):
    u = _field(cfg)
    params = BesovParams(config.require(cfg, "s")[0], cfg.get("r", 2.0), cfg.get("l", math.inf))
    policy = ResolutionPolicy(max_points=cfg.get("grid_budget", ResolutionPolicy().max_points))
    rows = besov_profile(u, params, policy)
    write_besov_csv(rows, os.path.join(out, "besov.csv"))
    return ["besov.csv"]


def cmd_bony(cfg, out):
    u = _field(cfg)
    qs = config.require(cfg, "q")[0]
    splits = [cascade.bony_split(u, u, int(q)) for q in qs]
    cascade.write_bony_csv(splits, os.path.join(out, "bony.csv"))
    return ["bony.csv"]


def solver_config(cfg) -> evolution.SolverConfig:
    model = cfg.get("model") or _kind(cfg)
    probes = [tuple(p) for p in cfg.get("probes", [])]
    probes += [tuple(cascade.probe_wavevector(int(q))) for q in cfg.get("probe_shells", [])]
    return evolution.SolverConfig(
        model=model, nu=cfg.get("nu", 0.0), N=cfg.get("N", 64), dt=cfg.get("dt", 1e-4), T=cfg.get("T", 1e-3),
        dealias=cfg.get("dealias", 2.0 / 3.0), probes=tuple(probes), shell_probes=tuple(cfg.get("shell_probes", [])),
        record_every=cfg.get("record_every", 1), besov=tuple(tuple(b) for b in cfg.get("besov", [])))


def cmd_evolve(cfg, out):
    scfg = solver_config(cfg)
    if "field" in cfg:
        u = _field(cfg)
    elif scfg.model == "euler":
        u = constructions.euler_u0(_euler_params(cfg))
    else:
        datum = constructions.build_nse_datum(_nse_params(cfg))
        # only the blocks that fit the dealiased band are evolved
        pieces = [j for j in range(1, datum.J + 1)
                  if all(max(abs(c) for c in b.lo + b.hi) <= scfg.kmax for b in datum.blocksets[j - 1].as_tuple())]
        if not pieces:
            raise ConfigError(f"no lattice block fits the dealiased band |k_i| <= {scfg.kmax}")
        u = sum((datum.field("window", j) for j in pieces[1:]), datum.field("window", pieces[0]))
    series = evolution.run(u, scfg)
    evolution.write_diagnostics_csv(series, os.path.join(out, "diagnostics.csv"))
    return ["diagnostics.csv"]


def cmd_report(dirs, out):
    lines = []
    for d in dirs:
        for name in sorted(os.listdir(d)):
            if not name.endswith(".csv"):
                continue
            path = os.path.join(d, name)
            lines.append(f"# source: {path}\n# sha256: {_sha(path)}\n")
            with open(path) as fh:
                lines.append(fh.read())
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write("".join(lines))
    return ["report.txt"]


ANALYSES = {"transfer": cmd_transfer, "triads": cmd_triads, "besov": cmd_besov, "bony": cmd_bony}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fluidcascade", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", required=True, help="output directory")

    common(sub.add_parser("construct", help="build an initial datum"))
    an = sub.add_parser("analyze", help="transfer / triads / besov / bony reports")
    an.add_argument("analysis", choices=sorted(ANALYSES))
    common(an)
    common(sub.add_parser("evolve", help="pseudo-spectral time integration"))
    rp = sub.add_parser("report", help="concatenate CSV outputs with provenance headers")
    rp.add_argument("dirs", nargs="+")
    rp.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        os.makedirs(args.out, exist_ok=True)
        if args.command == "report":
            cmd_report(args.dirs, args.out)
            return EXIT_OK
        cfg = config.load_config(args.config, args.set)
        if args.command == "construct":
            outputs = cmd_construct(cfg, args.out)
            name = "construct"
        elif args.command == "analyze":
            outputs = ANALYSES[args.analysis](cfg, args.out)
            name = f"analyze {args.analysis}"
        else:
            outputs = cmd_evolve(cfg, args.out)
            name = "evolve"
        _write_manifest(args.out, name, cfg, outputs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, InfeasibleError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
