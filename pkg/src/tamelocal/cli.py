"""Command-line front end.

    tamelocal tower describe  --p 3 --e 2 --f 1
    tamelocal chars list      --p 3 --e 2 --f 1 --r 4
    tamelocal factors adjoint --p 3 --e 2 --f 1 --theta-index 0
    tamelocal verify formal-degree | root-number | decomposition  [instance flags]
    tamelocal sweep [--q 3 5] [--n 1 2]

Exit status: 0 when every verdict matches expectation, 1 on a mismatch,
2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .galoisgrp import InvalidParams, involutions, subfield_lattice
from .tamefield import PrecisionTooSmall, TowerParams, Unrealizable
from .verifier import (
    Instance,
    TowerCache,
    VerdictReport,
    grid,
    run_instance,
    verify_decomposition,
    verify_formal_degree,
    verify_root_number,
)

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2

CONFIG_KEYS = {
    "p": int,
    "f0": int,
    "e": int,
    "f": int,
    "m": int,
    "r": int,
    "tau": str,
    "theta_index": str,
    "max_thetas": int,
    "cocycle": str,
    "seed": int,
    "format": str,
    "cache_dir": str,
    "jobs": int,
}


class ConfigError(ValueError):
    """Bad flags or configuration file."""


# ---------------------------------------------------------------------------
# configuration


def read_config(path: str) -> dict:
    """key=value lines; blank lines and lines starting with # are ignored."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} does not exist")
    out = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


@dataclass
class Config:
    p: int | None
    f0: int
    e: int | None
    f: int | None
    m: int
    r: int
    tau: str | None
    theta_index: str
    max_thetas: int
    cocycle: str
    seed: int
    format: str
    cache_dir: Path | None
    jobs: int

    def params(self) -> TowerParams:
        missing = [k for k in ("p", "e", "f") if getattr(self, k) is None]
        if missing:
            raise ConfigError("missing " + ", ".join("--" + k for k in missing))
        prm = TowerParams(self.p, self.f0, self.e, self.f, self.m, self.r, self.tau)
        prm.validate()
        return prm


def merge_config(args: argparse.Namespace) -> Config:
    """Flags override the configuration file; paths are validated here."""
    base = read_config(args.config) if getattr(args, "config", None) else {}
    merged = {}
    defaults = {
        "p": None, "f0": 1, "e": None, "f": None, "m": 0, "r": 4, "tau": None,
        "theta_index": "all", "max_thetas": 24, "cocycle": "trivial", "seed": 0,
        "format": "pretty", "cache_dir": None, "jobs": 1,
    }  # fmt: skip
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        merged[key] = flag if flag is not None else base.get(key, default)
    if merged["format"] not in ("json", "csv", "pretty"):
        raise ConfigError(f"unknown format {merged['format']!r}")
    if merged["cocycle"] not in ("trivial", "cyclic", "random"):
        raise ConfigError(f"unknown cocycle provider {merged['cocycle']!r}")
    if merged["tau"] not in (None, "ramified", "unramified"):
        raise ConfigError(f"unknown tau kind {merged['tau']!r}")
    if merged["jobs"] < 1:
        raise ConfigError("--jobs must be positive")
    ti = str(merged["theta_index"])
    if ti != "all" and not ti.isdigit():
        raise ConfigError("--theta-index must be a non-negative integer or 'all'")
    merged["theta_index"] = ti
    if merged["cache_dir"] is not None:
        cd = Path(merged["cache_dir"])
        if cd.exists() and not cd.is_dir():
            raise ConfigError(f"cache dir {cd} is not a directory")
        try:
            cd.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create cache dir {cd}: {exc}") from None
        merged["cache_dir"] = cd
    return Config(**merged)


# ---------------------------------------------------------------------------
# parser


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=int, help="residue characteristic (F = unramified of degree f0 over Q_p)")
    p.add_argument("--f0", type=int)
    p.add_argument("--e", type=int, help="ramification index of K/F")
    p.add_argument("--f", type=int, help="residue degree of K/F")
    p.add_argument("--m", type=int, help="rho^f = delta^m")
    p.add_argument("--r", type=int, help="depth parameter")
    p.add_argument("--tau", choices=["ramified", "unramified"], help="kind of K/K_+ (default from f)")
    p.add_argument("--theta-index", dest="theta_index", help="index of theta in canonical order, or 'all'")
    p.add_argument("--max-thetas", dest="max_thetas", type=int, help="cap on thetas when running 'all'")
    p.add_argument("--cocycle", choices=["trivial", "cyclic", "random"])
    p.add_argument("--seed", type=int)
    _common_flags(p)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["json", "csv", "pretty"])
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="key=value configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tamelocal", description="Exact local factors for tame parameters of Sp(2n).")
    parser.add_argument("--version", action="version", version=f"tamelocal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    tower = sub.add_parser("tower", help="tame towers").add_subparsers(dest="action", required=True)
    _instance_flags(tower.add_parser("describe", help="Galois group, involutions and subfields"))

    chars = sub.add_parser("chars", help="admissible characters").add_subparsers(dest="action", required=True)
    cl = chars.add_parser("list", help="list admissible theta")
    _instance_flags(cl)
    cl.add_argument("--limit", type=int, default=20)

    factors = sub.add_parser("factors", help="local factors").add_subparsers(dest="action", required=True)
    _instance_flags(factors.add_parser("adjoint", help="a, eps, w, L and gamma of Ad o phi"))

    verify = sub.add_parser("verify", help="identity checks").add_subparsers(dest="action", required=True)
    for name in ("formal-degree", "root-number", "decomposition", "all"):
        _instance_flags(verify.add_parser(name))

    sw = sub.add_parser("sweep", help="run every check over a grid of towers")
    sw.add_argument("--q", type=int, nargs="*", default=[3, 5], help="primes q (f0 = 1)")
    sw.add_argument("--n", type=int, nargs="*", default=[1, 2])
    sw.add_argument("--r", type=int, default=4)
    sw.add_argument("--theta-index", dest="theta_index", default="0")
    sw.add_argument("--cocycle", choices=["trivial", "cyclic", "random"])
    sw.add_argument("--seed", type=int)
    _common_flags(sw)
    return parser


# ---------------------------------------------------------------------------
# output


def _emit(payload, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif fmt == "csv":
        out.write(_to_csv(payload))
    else:
        out.write(_pretty(payload))


def _reports_of(payload) -> list[dict]:
    if isinstance(payload, dict) and "instances" in payload:
        return payload["instances"]
    if isinstance(payload, dict) and "reports" in payload:
        return payload["reports"]
    return []


def _to_csv(payload) -> str:
    buf = io.StringIO()
    reports = _reports_of(payload)
    if reports:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "f0", "e", "f", "m", "r", "theta_index", "check", "route", "lhs", "rhs", "equal", "expected", "status"])
        for rep in reports:
            ins = rep["instance"]
            base = [ins[k] for k in ("p", "f0", "e", "f", "m", "r", "theta_index")]
            for c in rep["checks"]:
                w.writerow(base + [c["name"], c["route"], c["lhs"], c["rhs"], c["equal"], c["expected"], rep["status"]])
            if not rep["checks"]:
                w.writerow(base + ["", "", "", "", "", "", rep["status"]])
    else:
        w = csv.writer(buf, lineterminator="\n")
        for k, v in _flatten(payload):
            w.writerow([k, v])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def _pretty(payload) -> str:
    lines = []
    reports = _reports_of(payload)
    if reports:
        for rep in reports:
            ins = rep["instance"]
            head = ", ".join(f"{k}={ins[k]}" for k in ("p", "f0", "e", "f", "m", "r", "theta_index"))
            lines.append(f"[{rep['status']}] {head}")
            if rep.get("error"):
                lines.append(f"  error: {rep['error']}")
            for c in rep["checks"]:
                rel = "=" if c["equal"] else "!="
                mark = "ok" if c["equal"] == c["expected"] else "UNEXPECTED"
                body = f"{c['lhs']} {rel} {c['rhs']}" if (c["lhs"] or c["rhs"]) else ("holds" if c["equal"] else "fails")
                lines.append(f"  {c['name']} [{c['route']}]: {body}  ({mark})")
            for note in rep.get("notes", []):
                lines.append(f"  note: {note}")
        lines.append(f"status: {payload.get('status')}")
    else:
        for k, v in _flatten(payload):
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _theta_indices(cfg: Config, count: int) -> tuple[list[int], list[str]]:
    if cfg.theta_index == "all":
        k = min(count, cfg.max_thetas)
        notes = [] if k == count else [f"ran the first {k} of {count} admissible thetas (raise --max-thetas for more)"]
        return list(range(k)), notes
    idx = int(cfg.theta_index)
    if idx >= count:
        raise ConfigError(f"theta index {idx} out of range (there are {count})")
    return [idx], []


def _cache_key(kind: str, inst: Instance) -> str:
    blob = json.dumps({"v": __version__, "kind": kind, "params": inst.params.key(), "theta": inst.theta_index,
                       "cocycle": inst.cocycle, "seed": inst.seed}, sort_keys=True)  # fmt: skip
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def _run_one(args) -> dict:
    kind, inst, cache_dir = args
    if cache_dir is not None:
        path = Path(cache_dir) / f"{_cache_key(kind, inst)}.json"
        if path.is_file():
            return json.loads(path.read_text())
    cache = TowerCache()
    if kind == "formal-degree":
        rep = verify_formal_degree(inst, cache)
    elif kind == "root-number":
        rep = verify_root_number(inst, cache)
    elif kind == "decomposition":
        rep = verify_decomposition(inst, cache)
    else:
        rep = run_instance(inst, cache)
    out = rep.to_json()
    if cache_dir is not None:
        path.write_text(json.dumps(out, sort_keys=True))
    return out


def _run_many(kind: str, insts: Sequence[Instance], cfg: Config) -> list[dict]:
    args = [(kind, inst, cfg.cache_dir) for inst in insts]
    if cfg.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            return list(ex.map(_run_one, args))
    return [_run_one(a) for a in args]


def cmd_tower_describe(cfg: Config) -> tuple[dict, int]:
    prm = cfg.params()
    data = TowerCache().get(prm)
    t = data.tower
    G = t.gamma
    H, case = involutions(G)
    fields = []
    for info in subfield_lattice(G, t.tau):
        L = t.field(info.name)
        fields.append({"name": info.name, "e": L.e_L, "f": L.f_L, "q": L.q_L, "d": L.different_exponent})
    return {
        "params": {"p": prm.p, "f0": prm.f0, "e": prm.e, "f": prm.f, "m": prm.m, "r": prm.r, "tau": prm.tau_kind},
        "q": prm.q,
        "n": prm.n,
        "gamma": {"order": G.order, "abelian": G.is_abelian(), "cyclic": G.is_cyclic()},
        "involutions": sorted(G.label(h) for h in H),
        "case": case,
        "tau": G.label(t.tau),
        "fields": fields,
        "admissible_thetas": len(data.thetas),
        "c(-1)": data.cdata.c_minus_one.render(),
        "supercuspidal_range": prm.supercuspidal_range_ok(),
    }, EXIT_OK


def cmd_chars_list(cfg: Config, limit: int) -> tuple[dict, int]:
    prm = cfg.params()
    data = TowerCache().get(prm)
    t = data.tower
    rows = []
    for i in range(min(limit, len(data.thetas))):
        th = data.theta(i)
        tt = data.theta_tilde(i)
        rows.append({
            "index": i,
            "theta": th.serialize(),
            "theta(-1)": th(t.from_int(-1)).render(),
            "f(theta~)": tt.conductor(),
            "vartheta(-1)": tt(t.beta).render(),
        })  # fmt: skip
    return {"count": len(data.thetas), "expected_count": data.thetas.expected_count(), "thetas": rows}, EXIT_OK


def cmd_factors(cfg: Config) -> tuple[dict, int]:
    from .localfactors import epsilon_adjoint

    prm = cfg.params()
    data = TowerCache().get(prm)
    idx, notes = _theta_indices(cfg, len(data.thetas))
    out = []
    for i in idx:
        rep = epsilon_adjoint(data.tower, data.theta_tilde(i))
        out.append({"theta_index": i, **rep.to_json()})
    status = all(all(r["closed_form_match"].values()) for r in out)
    return {"factors": out, "notes": notes, "status": "ok" if status else "mismatch"}, EXIT_OK if status else EXIT_MISMATCH


def cmd_verify(cfg: Config, kind: str) -> tuple[dict, int]:
    prm = cfg.params()
    count = len(TowerCache().get(prm).thetas)
    idx, notes = _theta_indices(cfg, count)
    insts = [Instance(prm, i, cfg.cocycle, cfg.seed) for i in idx]
    reports = _run_many(kind, insts, cfg)
    ok = all(r["status"] == "ok" for r in reports)
    payload = {"reports": reports, "status": "ok" if ok else "mismatch"}
    if notes:
        payload["notes"] = notes
    return payload, EXIT_OK if ok else EXIT_MISMATCH


def cmd_sweep(cfg: Config, qs, ns, r) -> tuple[dict, int]:
    params = grid(qs, ns, r)
    idx = 0 if cfg.theta_index == "all" else int(cfg.theta_index)
    insts = [Instance(p, idx, cfg.cocycle, cfg.seed) for p in params]
    reports = _run_many("all", insts, cfg)
    ok = all(rep["status"] == "ok" for rep in reports)
    return {"instances": reports, "count": len(reports), "status": "ok" if ok else "mismatch"}, EXIT_OK if ok else EXIT_MISMATCH


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = merge_config(args)
        if args.command == "tower":
            payload, code = cmd_tower_describe(cfg)
        elif args.command == "chars":
            payload, code = cmd_chars_list(cfg, args.limit)
        elif args.command == "factors":
            payload, code = cmd_factors(cfg)
        elif args.command == "verify":
            payload, code = cmd_verify(cfg, args.action)
        else:
            payload, code = cmd_sweep(cfg, args.q, args.n, args.r)
    except (ConfigError, InvalidParams, Unrealizable, PrecisionTooSmall) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(payload, cfg.format, out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
