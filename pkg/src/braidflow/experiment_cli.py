"""Batch front-end: declarative configs, subcommand dispatch, artifact emission.

Subcommands: group-metric, braid-eval, trace, gg-estimate, scaling-check,
sequence-experiment, qi-diagnostic.  Parameters come from a key=value config
file (strict schema; unknown keys rejected) with command-line flags taking
precedence.  Every artifact embeds the hash of the resolved configuration and
is written atomically; reruns with the same configuration produce
byte-identical numeric payloads.

Exit codes: 0 pass, 1 computation error, 2 usage error, 3 statistical
acceptance failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import permgroups
from .braids import parse_word
from .diskmaps import (
    MapFormatError,
    RadialTwist,
    TwistComposition,
    moving_bump_flow,
    twist_flow,
)
from .ggestimate import (
    gamma_estimate,
    iter_traced_samples,
    scaling_check,
    sequence_experiment,
)
from .permgroups import NotGeneratedError, cycle_notation
from .quasimorphisms import PHI_B3, WRITHE_QM, QmSpec
from .reporting import atomic_write_text, canonical_json, config_hash
from .trajectories import CollisionError, UnresolvedCrossingError

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_USAGE = 2
EXIT_STATISTICAL = 3

CONFIG_SCHEMA_VERSION = "1"

_KNOWN_KEYS = {
    "schema_version", "subcommand", "degree", "base_class", "out", "word",
    "qm", "map", "f", "g", "power", "samples", "seed", "r", "nmax", "mmax",
    "defect_assumed", "out_dir",
}


class UsageError(ValueError):
    pass


def load_map_file(path: Path | str):
    """Parse a map description file.

    Lines (comments start with '#'):
      twist cx cy R amplitude exponent
      plateau cx cy R R0 amplitude exponent
      rigid cx cy R amplitude
      hamiltonian twist_bump cx cy R amplitude exponent
      hamiltonian moving_bump x0 y0 x1 y1 R amplitude exponent
    Multiple twist-family lines compose in file order; a hamiltonian line
    must be the only entry.
    """
    path = Path(path)
    entries = []
    flows = []
    for ln, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "twist" and len(tok) == 6:
                cx, cy, rad, amp = map(float, tok[1:5])
                entries.append(RadialTwist(center=complex(cx, cy), radius=rad,
                                           amplitude=amp, exponent=int(tok[5])))
            elif tok[0] == "plateau" and len(tok) == 7:
                cx, cy, rad, r0, amp = map(float, tok[1:6])
                entries.append(RadialTwist(center=complex(cx, cy), radius=rad,
                                           amplitude=amp, exponent=int(tok[6]),
                                           profile="plateau", plateau_radius=r0))
            elif tok[0] == "rigid" and len(tok) == 5:
                cx, cy, rad, amp = map(float, tok[1:5])
                entries.append(RadialTwist(center=complex(cx, cy), radius=rad,
                                           amplitude=amp, profile="rigid"))
            elif tok[0] == "hamiltonian" and tok[1] == "twist_bump" and len(tok) == 7:
                cx, cy, rad, amp = map(float, tok[2:6])
                flows.append(twist_flow(RadialTwist(
                    center=complex(cx, cy), radius=rad, amplitude=amp,
                    exponent=int(tok[6]))))
            elif tok[0] == "hamiltonian" and tok[1] == "moving_bump" and len(tok) == 9:
                x0, y0, x1, y1, rad, amp = map(float, tok[2:8])
                flows.append(moving_bump_flow(complex(x0, y0), complex(x1, y1),
                                              rad, amp, exponent=int(tok[8])))
            else:
                raise MapFormatError(f"unrecognized entry {tok[0]!r}")
        except (ValueError, IndexError) as e:
            raise MapFormatError(f"{path}:{ln}: {e}") from e
    if flows and entries:
        raise MapFormatError(f"{path}: cannot mix twist and hamiltonian entries")
    if len(flows) > 1:
        raise MapFormatError(f"{path}: at most one hamiltonian entry")
    if flows:
        return flows[0]
    return TwistComposition(entries)


def load_config(path: Path | str) -> dict:
    """key=value config with strict schema and line diagnostics."""
    cfg: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise UsageError(f"{path}:{ln}: unknown key {key!r}")
        if key in cfg:
            raise UsageError(f"{path}:{ln}: duplicate key {key!r}")
        cfg[key] = val
    ver = cfg.pop("schema_version", CONFIG_SCHEMA_VERSION)
    if ver != CONFIG_SCHEMA_VERSION:
        raise UsageError(f"unsupported config schema version {ver!r}")
    return cfg


def _qm_by_name(name: str) -> QmSpec:
    if name == "rademacher-minus-writhe":
        return PHI_B3
    if name == "writhe":
        return WRITHE_QM
    raise UsageError(f"unknown quasi-morphism {name!r}")


def _resolved(args, keys) -> dict:
    cfg = dict(load_config(args.config)) if getattr(args, "config", None) else {}
    out = {"schema_version": CONFIG_SCHEMA_VERSION, "subcommand": args.cmd}
    for key in keys:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = cfg[key]
    return out


def _hash_config(cfg: dict, **extra) -> str:
    payload = {k: v for k, v in cfg.items() if k not in ("out", "out_dir")}
    payload.update(extra)
    return config_hash(payload)


def _write_report(out_path, payload: dict) -> None:
    text = canonical_json(payload)
    if out_path:
        atomic_write_text(out_path, text + "\n")
    else:
        print(text)


def cmd_group_metric(args) -> int:
    cfg = _resolved(args, ["degree", "base_class", "out"])
    degree = int(cfg["degree"])
    digest = _hash_config(cfg)
    G = permgroups.build_group(degree, alternating=True)
    M = permgroups.tsuboi_metric(G)
    lines = [f"# config_hash={digest}",
             "class_repr,class_repr,q_fg,q_gf,d"]
    for i, si in enumerate(M.classes):
        for j, sj in enumerate(M.classes):
            lines.append(
                f"{cycle_notation(G.perm(si.rep))},{cycle_notation(G.perm(sj.rep))},"
                f"{int(M.q_pairs[i, j])},{int(M.q_pairs[j, i])},{float(M.d[i, j])!r}"
            )
    out = cfg.get("out", f"metric_a{degree}.csv")
    atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out} ({len(M.classes)} classes)")
    return EXIT_OK


def cmd_qi_diagnostic(args) -> int:
    cfg = _resolved(args, ["degree", "base_class", "out"])
    degree = int(cfg["degree"])
    G = permgroups.build_group(degree, alternating=True)
    M = permgroups.tsuboi_metric(G)
    base = 0
    if cfg.get("base_class"):
        wanted = cfg["base_class"]
        labels = [s.label(G) for s in M.classes]
        matches = [i for i, lab in enumerate(labels) if lab == wanted]
        if not matches:
            raise UsageError(f"no class with representative {wanted!r}; "
                             f"choices: {labels}")
        base = matches[0]
    rep = permgroups.qi_diagnostic(M, base)
    payload = {
        "config_hash": _hash_config(cfg),
        "degree": degree,
        "note": "finite-scale distortion proxy for the basepoint-distance "
                "embedding; not a quasi-isometry claim",
        "basepoint": M.classes[base].label(G),
        "values": rep.values.tolist(),
        "lambda": float(rep.lam),
        "C": float(rep.C),
        "coverage_radius": float(rep.coverage_radius),
        "diameter": M.diameter(),
    }
    _write_report(cfg.get("out"), payload)
    return EXIT_OK


def cmd_braid_eval(args) -> int:
    cfg = _resolved(args, ["word", "qm"])
    qm = _qm_by_name(cfg.get("qm", "rademacher-minus-writhe"))
    try:
        w = parse_word(cfg["word"])
    except ValueError as e:
        raise UsageError(f"bad word: {e}") from e
    val = Fraction(qm(w))
    print(f"{val.numerator}/{val.denominator}" if val.denominator != 1
          else str(val.numerator))
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _resolved(args, ["map", "power", "samples", "seed", "qm", "out"])
    f = load_map_file(cfg["map"])
    qm = _qm_by_name(cfg.get("qm", "rademacher-minus-writhe"))
    p, n, seed = int(cfg["power"]), int(cfg["samples"]), int(cfg.get("seed", 0))
    digest = _hash_config(cfg, map_id=f.describe())
    lines = [canonical_json({"config_hash": digest, **rec})
             for rec in iter_traced_samples(f, qm, p, n, seed)]
    out = cfg.get("out", "braids.jsonl")
    atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out} ({n} samples)")
    return EXIT_OK


def cmd_gg_estimate(args) -> int:
    cfg = _resolved(args, ["map", "power", "samples", "seed", "qm", "out"])
    f = load_map_file(cfg["map"])
    qm = _qm_by_name(cfg.get("qm", "rademacher-minus-writhe"))
    est = gamma_estimate(f, qm, int(cfg["power"]), int(cfg["samples"]),
                         int(cfg.get("seed", 0)))
    payload = {"config_hash": _hash_config(cfg, map_id=f.describe()),
               **est.to_dict()}
    _write_report(cfg.get("out"), payload)
    return EXIT_OK


def cmd_scaling_check(args) -> int:
    cfg = _resolved(args, ["map", "r", "power", "samples", "seed", "qm", "out"])
    f = load_map_file(cfg["map"])
    qm = _qm_by_name(cfg.get("qm", "rademacher-minus-writhe"))
    rep = scaling_check(f, qm, float(cfg["r"]), int(cfg["power"]),
                        int(cfg["samples"]), int(cfg.get("seed", 0)))
    payload = {"config_hash": _hash_config(cfg, map_id=f.describe()),
               **rep.to_dict()}
    _write_report(cfg.get("out"), payload)
    if rep.status == "fail":
        return EXIT_STATISTICAL
    return EXIT_OK


def _sequence_csv_tables(rep, digest: str, out: Path) -> None:
    """Plot-ready CSV companions to the sequence JSON report."""
    stem = out.with_suffix("")
    head = f"# config_hash={digest}"
    rows = [head, "m,n,area_lower_bound"]
    for m, row in enumerate(rep.area_bounds):
        for n, v in enumerate(row):
            rows.append(f"{m},{n},{v!r}")
    atomic_write_text(stem.parent / (stem.name + "_area.csv"),
                      "\n".join(rows) + "\n")
    rows = [head, "n,abs_mean,stderr,predicted_abs,consistent_3sigma"]
    for n, (est, pred, ok) in enumerate(zip(rep.estimates, rep.predicted_abs,
                                            rep.consistent_3sigma)):
        rows.append(f"{n},{abs(est.mean)!r},{est.stderr!r},{pred!r},{int(ok)}")
    atomic_write_text(stem.parent / (stem.name + "_levels.csv"),
                      "\n".join(rows) + "\n")
    rows = [head, "m,bound,phi_value,defect,c_k,validity"]
    for cert in rep.certificates:
        rows.append(f"{cert.power},{cert.bound!r},{cert.phi_value!r},"
                    f"{cert.defect!r},{cert.c_k!r},{cert.validity}")
    atomic_write_text(stem.parent / (stem.name + "_certs.csv"),
                      "\n".join(rows) + "\n")


def cmd_sequence_experiment(args) -> int:
    cfg = _resolved(args, ["f", "g", "r", "nmax", "mmax", "power", "samples",
                           "seed", "defect_assumed", "qm", "out", "out_dir"])
    fmap = load_map_file(cfg["f"])
    gmap = load_map_file(cfg["g"]) if cfg.get("g") else fmap
    qm = _qm_by_name(cfg.get("qm", "rademacher-minus-writhe"))
    rep = sequence_experiment(
        fmap, gmap, float(cfg["r"]), int(cfg["nmax"]), int(cfg["mmax"]),
        int(cfg["power"]), int(cfg["samples"]), int(cfg.get("seed", 0)),
        float(cfg["defect_assumed"]), qm=qm,
        out_dir=cfg.get("out_dir"),
    )
    digest = _hash_config(cfg, map_id=fmap.describe())
    payload = {"config_hash": digest, "seed": int(cfg.get("seed", 0)),
               **rep.to_dict()}
    _write_report(cfg.get("out"), payload)
    if cfg.get("out"):
        _sequence_csv_tables(rep, digest, Path(cfg["out"]))
    if not all(rep.consistent_3sigma):
        return EXIT_STATISTICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="braidflow",
                                  description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="cmd")

    def add(name, func, flags):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        for flag, typ in flags:
            p.add_argument(f"--{flag}", type=typ, default=None)
        p.set_defaults(func=func)
        return p

    add("group-metric", cmd_group_metric,
        [("degree", int), ("base-class", str), ("out", str)])
    add("qi-diagnostic", cmd_qi_diagnostic,
        [("degree", int), ("base-class", str), ("out", str)])
    add("braid-eval", cmd_braid_eval, [("word", str), ("qm", str)])
    add("trace", cmd_trace,
        [("map", str), ("power", int), ("samples", int), ("seed", int),
         ("qm", str), ("out", str)])
    add("gg-estimate", cmd_gg_estimate,
        [("map", str), ("power", int), ("samples", int), ("seed", int),
         ("qm", str), ("out", str)])
    add("scaling-check", cmd_scaling_check,
        [("map", str), ("r", float), ("power", int), ("samples", int),
         ("seed", int), ("qm", str), ("out", str)])
    add("sequence-experiment", cmd_sequence_experiment,
        [("f", str), ("g", str), ("r", float), ("nmax", int), ("mmax", int),
         ("power", int), ("samples", int), ("seed", int),
         ("defect-assumed", float), ("qm", str), ("out", str),
         ("out_dir", str)])
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "cmd", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, MapFormatError, KeyError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NotGeneratedError, CollisionError, UnresolvedCrossingError,
            ArithmeticError, RuntimeError, ValueError) as e:
        print(f"computation error: {e}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
