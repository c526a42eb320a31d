"""Command-line front end: constants, verification suites, moment runs,
bias scans, the sieve probe, and the Poisson check.

Every run prints CSV to stdout or --csv PATH with the full configuration
embedded as '# key = value' header comments, so outputs are self-describing
and reruns with identical configs are byte-identical in serial mode.

Exit codes: 0 ok, 2 config error, 3 assertion failure, 4 cache mismatch.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import CacheMismatch, CmlError, ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3
EXIT_CACHE = 4


@dataclass
class RunConfig:
    command: str
    x: float = 0.0
    grid: int = 1
    f_kind: str = "smoothstep"
    mode: str = "first"
    theta: float = 0.1
    trunc_mult: float = 6.0
    workers: int = 0  # 0 = CML_WORKERS / cpu count
    cache_dir: str = ""
    seed: int = 1
    csv_path: str = ""
    k_shift: str = "1,0"
    t_max: float = 10**6
    a_bound: int = 500
    b_bound: int = 500
    trials: int = 20
    q_coords: str = "1,0"
    m_scale: float = 400.0
    level: str = "fast"
    prime_bound: int = 10**5

    def header_lines(self) -> List[str]:
        items = [f"# version = {__version__}"]
        for k, v in asdict(self).items():
            items.append(f"# {k} = {v}")
        return items

    def to_file(self, path: str) -> None:
        with open(path, "w") as fh:
            for k, v in asdict(self).items():
                fh.write(f"{k} = {v}\n")

    @staticmethod
    def from_file(path: str) -> "RunConfig":
        kv: Dict[str, str] = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                k, _, v = line.partition("=")
                kv[k.strip()] = v.strip()
        if "command" not in kv:
            raise ConfigError(f"{path}: missing 'command'")
        cfg = RunConfig(command=kv.pop("command"))
        for k, v in kv.items():
            if not hasattr(cfg, k):
                raise ConfigError(f"{path}: unknown key {k!r}")
            cur = getattr(cfg, k)
            setattr(cfg, k, type(cur)(v) if not isinstance(cur, bool) else v == "True")
        return cfg


def _parse_eis(text: str):
    from .eisenstein import EisInt

    try:
        a, b = (int(t) for t in text.split(","))
    except Exception as exc:
        raise ConfigError(f"expected 'a,b' integer pair, got {text!r}") from exc
    return EisInt(a, b)


class _CsvOut:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.buf = io.StringIO()

    def header(self) -> None:
        for line in self.cfg.header_lines():
            self.buf.write(line + "\n")

    def row(self, *cells) -> None:
        self.buf.write(",".join(_fmt(c) for c in cells) + "\n")

    def finish(self) -> None:
        text = self.buf.getvalue()
        if self.cfg.csv_path:
            with open(self.cfg.csv_path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _fmt(c) -> str:
    if isinstance(c, float):
        return repr(c)
    return str(c)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_constants(cfg: RunConfig) -> int:
    from .euler import constant, remarkable_identity

    out = _CsvOut(cfg)
    out.header()
    out.row("name", "value", "prime_bound", "successive_diff", "tail_estimate")
    for name in ("C", "D", "scriptP", "c0"):
        r = constant(name, cfg.prime_bound)
        out.row(r.name, r.value, r.prime_norm_bound, r.successive_diff, r.tail_estimate)
    out.row("remarkable_identity", remarkable_identity(cfg.prime_bound),
            cfg.prime_bound, "", "")
    out.finish()
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    from .family import (build_mollifier, compute_l_values, enumerate_f3prime,
                         moment, mollified_moment, trivial_mollifier)
    from .gauss import GaussSumTable
    from .lfun import AfeContext, LValueCache

    x = cfg.x
    ratio = 3.0
    grid = sorted(x / ratio**i for i in range(max(1, cfg.grid)))
    max_norm = int(2 * x)
    fam = enumerate_f3prime(max_norm)
    cache = None
    if cfg.cache_dir:
        os.makedirs(cfg.cache_dir, exist_ok=True)
        cache = LValueCache(os.path.join(cfg.cache_dir, f"lvalues_{max_norm}.csv"),
                            max_norm, cfg.trunc_mult, cfg.f_kind)
    gauss_cache = os.path.join(cfg.cache_dir, f"g3_{max_norm}.csv") if cfg.cache_dir else None
    gt = GaussSumTable.build(max_norm, cache_path=gauss_cache)
    ctx = AfeContext(max_norm, cfg.trunc_mult, gauss_table=gt)
    recs = compute_l_values(ctx, fam, workers=cfg.workers or None, cache=cache)
    out = _CsvOut(cfg)
    out.header()
    out.row("x", "mode", "f_kind", "raw_re", "raw_im", "main_term", "ratio",
            "slope", "intercept", "count", "wall_time")
    if cfg.mode == "mollified":
        spec = build_mollifier(cfg.theta, x) if cfg.theta > 0 else trivial_mollifier()
        for xi in grid:
            rep = mollified_moment(xi, spec, recs, cfg.f_kind)
            out.row(xi, "mollified", cfg.f_kind, rep.raw_sum.real, rep.raw_sum.imag,
                    rep.main_term, rep.ratio, rep.extras.get("cs_ratio"),
                    rep.extras.get("target_theta_over_1p"), rep.count, rep.wall_time)
    else:
        for xi in grid:
            rep = moment(cfg.mode, xi, recs, cfg.f_kind,
                         grid=grid if cfg.mode == "second" else None)
            out.row(xi, cfg.mode, cfg.f_kind, rep.raw_sum.real, rep.raw_sum.imag,
                    rep.main_term, rep.ratio, rep.slope, rep.intercept,
                    rep.count, rep.wall_time)
    out.finish()
    return EXIT_OK


def cmd_bias(cfg: RunConfig) -> int:
    from .bias import BiasContext, bias_scan

    k = _parse_eis(cfg.k_shift)
    ctx = BiasContext(int(cfg.t_max))
    rep = bias_scan(k, cfg.t_max, ctx)
    out = _CsvOut(cfg)
    out.header()
    out.row("T", "sum_re", "sum_im", "pred_re", "pred_im", "abs_ratio")
    for t, s, p in zip(rep.ts, rep.partial_sums, rep.predictions):
        out.row(t, s.real, s.imag, p.real, p.imag,
                abs(s) / abs(p) if p else float("nan"))
    out.row("exponent", rep.exponent, "", "", "", "")
    out.finish()
    return EXIT_OK


def cmd_sieve_probe(cfg: RunConfig) -> int:
    from .bias import large_sieve_ratio

    res = large_sieve_ratio(cfg.a_bound, cfg.b_bound, cfg.trials, cfg.seed)
    out = _CsvOut(cfg)
    out.header()
    out.row("key", "value")
    for k, v in res.items():
        out.row(k, v)
    out.finish()
    return EXIT_OK


def cmd_poisson(cfg: RunConfig) -> int:
    from .bias import poisson_check

    q = _parse_eis(cfg.q_coords)
    res = poisson_check(q, m_scale=cfg.m_scale, v_kind=cfg.f_kind
                        if cfg.f_kind in ("bump", "smoothstep") else "bump")
    out = _CsvOut(cfg)
    out.header()
    out.row("key", "value")
    for k, v in res.items():
        out.row(k, v)
    out.finish()
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    """Fast identity/oracle checks; exit 3 on any failure."""
    from .suite import run_verify

    ok = run_verify(seed=cfg.seed, out=sys.stdout)
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_suite(cfg: RunConfig) -> int:
    from .suite import run_suite

    ok = run_suite(level=cfg.level, cache_dir=cfg.cache_dir or None,
                   out=sys.stdout)
    return EXIT_OK if ok else EXIT_ASSERT


_COMMANDS = {
    "constants": cmd_constants,
    "moments": cmd_moments,
    "bias": cmd_bias,
    "sieve-probe": cmd_sieve_probe,
    "poisson": cmd_poisson,
    "verify": cmd_verify,
    "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cml",
        description="cubic Hecke L-function laboratory over Z[w]")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="Euler-product constants as CSV")
    pc.add_argument("--prime-bound", type=int, default=10**5)
    pc.add_argument("--csv", default="")

    pm = sub.add_parser("moments", help="family moment experiments")
    pm.add_argument("--x", type=float, required=True)
    pm.add_argument("--grid", type=int, default=1,
                    help="number of X grid points (geometric, ratio 3)")
    pm.add_argument("--f", choices=("bump", "smoothstep"), default="smoothstep")
    pm.add_argument("--mode", choices=("first", "second", "nonvanishing",
                                       "mollified"), default="first")
    pm.add_argument("--theta", type=float, default=0.1)
    pm.add_argument("--csv", default="")
    pm.add_argument("--cache", default="")
    pm.add_argument("--trunc-mult", type=float, default=6.0)

    pb = sub.add_parser("bias", help="dyadic Gauss-sum bias scan")
    pb.add_argument("--k", default="1,0", help="shift as 'a,b'")
    pb.add_argument("--tmax", type=float, default=10**6)
    pb.add_argument("--csv", default="")

    ps = sub.add_parser("sieve-probe", help="cubic large sieve ratio probe")
    ps.add_argument("--a", type=int, default=500)
    ps.add_argument("--b", type=int, default=500)
    ps.add_argument("--trials", type=int, default=20)
    ps.add_argument("--seed", type=int, default=1)
    ps.add_argument("--csv", default="")

    pp = sub.add_parser("poisson", help="radial Poisson identity check")
    pp.add_argument("--q", default="1,0", help="modulus as 'a,b'")
    pp.add_argument("--m", type=float, default=400.0)
    pp.add_argument("--csv", default="")

    pv = sub.add_parser("verify", help="fast oracle/identity checks")
    pv.add_argument("--seed", type=int, default=1)

    pu = sub.add_parser("suite", help="acceptance checklist")
    pu.add_argument("--level", choices=("fast", "full"), default="fast")
    pu.add_argument("--cache", default="")
    return p


def _to_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    mapping = {"x": "x", "grid": "grid", "f": "f_kind", "mode": "mode",
               "theta": "theta", "csv": "csv_path", "cache": "cache_dir",
               "trunc_mult": "trunc_mult", "k": "k_shift", "tmax": "t_max",
               "a": "a_bound", "b": "b_bound", "trials": "trials",
               "seed": "seed", "q": "q_coords", "m": "m_scale",
               "level": "level", "prime_bound": "prime_bound"}
    for src, dst in mapping.items():
        if hasattr(ns, src) and getattr(ns, src) is not None:
            setattr(cfg, dst, getattr(ns, src))
    cfg.workers = 0
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _to_config(ns)
        return _COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CacheMismatch as exc:
        print(f"cache mismatch: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except AssertionError as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except CmlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
