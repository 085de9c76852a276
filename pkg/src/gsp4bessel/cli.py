"""Command-line entry point: parse a run configuration, dispatch, emit JSON lines.

Exit status: 0 when no row failed, 1 when some row failed, 2 on usage errors,
3 on configuration errors, 4 when a harness could not run, 5 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, TextIO

from .besselcore import (
    BesselContext,
    BesselError,
    CosetAddress,
    LamCondition,
    addresses,
    b_table,
    conductor,
    dim_and_testvector,
    make_context,
    uniformizer_value,
)
from .grp import matrix_identity_suite
from .heckeverify import (
    VerificationError,
    VerificationReport,
    char_sum,
    norm_check,
    verify_hecke,
    welldef_check,
)
from .padicbase import AssumptionError, build_field_data
from .scalars import ScalarError, parse_scalar
from .zeta import TAU_CLASSES, ZetaError, l_factor, make_zeta_context, verify_integral_theorem, y_prime, zeta_closed

COMMANDS = (
    "info",
    "dim",
    "bvalue",
    "verify-hecke",
    "verify-welldef",
    "verify-charsum",
    "verify-identities",
    "norm",
    "zeta",
    "verify-theorem",
    "all",
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_RESOURCE, EXIT_IO = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "p": "3",
    "abc": "1,0,1",
    "omega": "-1",
    "m0": "0",
    "lam": "",
    "tau": "unram_ps",
    "lrange": "-2,4",
    "mrange": "0,4",
    "samples": "500",
    "seed": "0",
    "numeric": "",
    "addr": "h(0,0)",
    "norm_bounds": "12,12",
}


class ConfigError(ValueError):
    """A configuration value is missing or malformed; carries its key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int
    abc: tuple[Fraction, Fraction, Fraction]
    omega: int
    m0: int
    j: int
    unif: Optional[str]
    tau: str
    numeric: dict
    lrange: range
    mrange: range
    samples: int
    seed: int
    addr: str
    norm_bounds: tuple[int, int]
    out: Optional[str] = None
    extras: dict = field(default_factory=dict)

    def bessel_context(self) -> BesselContext:
        fd = build_field_data(self.p, *self.abc)
        kwargs: dict = {}
        if self.unif is not None:
            if fd.split:
                kwargs["lam"] = None if self.unif == "symbolic" else parse_scalar(self.unif)
            elif fd.case == 0:
                kwargs["sign"] = int(self.unif)
            elif self.unif not in ("1", "symbolic"):
                raise ConfigError("lam", "inert L has Lambda(varpi) = 1")
        return make_context(fd, self.m0, self.j, -self.omega, **kwargs)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}", "expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"not an integer: {text!r}") from None


def _range(key: str, text: str) -> range:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(key, "expected lo,hi")
    lo, hi = (_int(key, s) for s in parts)
    if hi < lo:
        raise ConfigError(key, "empty range")
    return range(lo, hi + 1)


def _pairs(key: str, text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ConfigError(key, f"expected name=value, got {item!r}")
        name, value = item.split("=", 1)
        out[name.strip()] = value.strip()
    return out


def build_config(values: dict) -> RunConfig:
    v = dict(DEFAULTS)
    v.update({k: s for k, s in values.items() if s is not None})
    try:
        abc = tuple(Fraction(s) for s in v["abc"].split(","))
    except ValueError:
        raise ConfigError("abc", f"not rational: {v['abc']!r}") from None
    if len(abc) != 3:
        raise ConfigError("abc", "expected three values a,b,c")
    omega = _int("omega", v["omega"])
    if omega not in (1, -1):
        raise ConfigError("omega", "must be +1 or -1")
    lam = _pairs("lam", v["lam"])
    unknown = set(lam) - {"j", "unif"}
    if unknown:
        raise ConfigError("lam", f"unknown keys {sorted(unknown)}")
    if v["tau"] not in TAU_CLASSES:
        raise ConfigError("tau", f"expected one of {', '.join(TAU_CLASSES)}")
    numeric = _pairs("numeric", v["numeric"])
    if set(numeric) - {"aT", "bT", "omg"}:
        raise ConfigError("numeric", "only aT, bT and omg can be substituted")
    bounds = [_int("norm_bounds", s) for s in v["norm_bounds"].split(",")]
    if len(bounds) != 2:
        raise ConfigError("norm_bounds", "expected Lmax,Mmax")
    return RunConfig(
        p=_int("p", v["p"]),
        abc=abc,  # type: ignore[arg-type]
        omega=omega,
        m0=_int("m0", v["m0"]),
        j=_int("lam", lam.get("j", "1")),
        unif=lam.get("unif"),
        tau=v["tau"],
        numeric=numeric,
        lrange=_range("lrange", v["lrange"]),
        mrange=_range("mrange", v["mrange"]),
        samples=_int("samples", v["samples"]),
        seed=_int("seed", v["seed"]),
        addr=v["addr"],
        norm_bounds=(bounds[0], bounds[1]),
        out=v.get("out"),
    )


_ADDR = re.compile(r"^h\((-?\d+),(\d+)\)((?:[·*.](?:W0|W\+|W-|s1s2s1s2|s2s1s2|s1s2s1|s1s2|s2s1|s1|s2|1))*)$")


def parse_address(text: str) -> CosetAddress:
    """Inverse of :meth:`CosetAddress.to_text`; also accepts ``*`` or ``.`` as separators."""
    m = _ADDR.match(text.replace(" ", ""))
    if not m:
        raise ConfigError("addr", f"cannot parse address {text!r}")
    l, mm = int(m.group(1)), int(m.group(2))
    parts = [s for s in re.split(r"[·*.]", m.group(3)) if s]
    wmap = {"W0": "w0", "W+": "wplus", "W-": "wminus"}
    try:
        if parts and parts[0] in wmap:
            if len(parts) < 2 or parts[1] != "s1":
                raise ConfigError("addr", "a W frame is followed by s1")
            rest = parts[2:] or ["1"]
            return CosetAddress(l, mm, wmap[parts[0]], "".join(rest) if rest != ["1"] else "1")
        stag = "".join(s for s in parts if s != "1") or "1"
        return CosetAddress(l, mm, "none", stag)
    except BesselError as exc:
        raise ConfigError("addr", str(exc)) from None


# --------------------------------------------------------------- rows


def _row(data: dict, sort: bool = True) -> str:
    return json.dumps(data, sort_keys=sort, ensure_ascii=False)


class Report:
    """Collects JSON rows and pass/fail counts."""

    def __init__(self) -> None:
        self.lines: list[str] = []
        self.passed = 0
        self.failed = 0

    def info(self, data: dict) -> None:
        self.lines.append(_row(data))

    def verdict(self, rep: VerificationReport) -> None:
        self.lines.append(rep.to_json())
        if rep.passed:
            self.passed += 1
        else:
            self.failed += 1

    def extend(self, reps: Iterable[VerificationReport]) -> None:
        for rep in sorted(reps, key=lambda r: (r.check, json.dumps(r.params, sort_keys=True))):
            self.verdict(rep)


def emit_report(rows: Iterable[str], passed: int, failed: int, stream: TextIO) -> None:
    for line in rows:
        stream.write(line + "\n")
    stream.write(_row({"pass": passed, "fail": failed}, sort=False) + "\n")


def _testvector_json(tv):
    return tv.to_text() if isinstance(tv, LamCondition) else bool(tv)


def _tau_params(cfg: RunConfig) -> dict:
    names = {"aT": "a", "bT": "b", "omg": "omg"}
    return {names[k]: parse_scalar(s) for k, s in cfg.numeric.items()}


# ----------------------------------------------------------- commands


def cmd_info(cfg: RunConfig, rep: Report) -> None:
    ctx = cfg.bessel_context()
    fd = ctx.fd
    row = {"field": fd.describe(), "m0": ctx.m0, "j": ctx.lam.j, "omega": ctx.omega, "Omega": ctx.Omega}
    row["quotient_order"] = ctx.lam.quotient.order
    row["conductor"] = conductor(fd, ctx.lam.quotient, ctx.lam.j)
    if fd.case == 0:
        row["Lambda(varpi_L)"] = uniformizer_value(fd, ctx.lam).to_text()
    if fd.split:
        row["lam"] = ctx.lam.lam.to_text()
    rep.info(row)


def cmd_dim(cfg: RunConfig, rep: Report) -> None:
    dim, tv = dim_and_testvector(cfg.bessel_context())
    rep.info({"dim": dim, "testvector": _testvector_json(tv)})


def cmd_bvalue(cfg: RunConfig, rep: Report) -> None:
    ctx = cfg.bessel_context()
    addr = parse_address(cfg.addr)
    try:
        value = b_table(ctx, addr)
    except BesselError as exc:
        raise ConfigError("addr", str(exc)) from None
    rep.info({"addr": addr.to_text(), "value": value.to_text()})


def cmd_hecke(cfg: RunConfig, rep: Report) -> None:
    rep.extend(verify_hecke(cfg.bessel_context(), cfg.lrange, cfg.mrange))


def cmd_welldef(cfg: RunConfig, rep: Report) -> None:
    ctx = cfg.bessel_context()
    rep.extend(welldef_check(ctx, a, cfg.samples, cfg.seed) for a in addresses(ctx.fd, cfg.lrange, cfg.mrange))


def cmd_charsum(cfg: RunConfig, rep: Report) -> None:
    ctx = cfg.bessel_context()
    for m in cfg.mrange:
        computed, expected = char_sum(ctx, m)
        params = {"m": m, "m0": ctx.m0}
        if expected is None:
            rep.info({"check": "charsum", "params": params, "status": "vacuous", "lhs": computed.to_text()})
            continue
        status = "pass" if computed == expected else "fail"
        rep.verdict(VerificationReport("charsum", params, status, computed.to_text(), expected.to_text()))


def cmd_identities(cfg: RunConfig, rep: Report) -> None:
    fd = build_field_data(cfg.p, *cfg.abc)
    mrange = range(max(cfg.mrange.start, 0), cfg.mrange.stop)
    for res in matrix_identity_suite(fd, cfg.lrange, mrange):
        status = "pass" if res.ok else "fail"
        rep.verdict(VerificationReport("identity", {"name": res.name, "at": [str(x) for x in res.params]}, status))


def cmd_norm(cfg: RunConfig, rep: Report) -> None:
    rep.verdict(norm_check(cfg.bessel_context(), *cfg.norm_bounds))


def cmd_zeta(cfg: RunConfig, rep: Report) -> None:
    z = make_zeta_context(cfg.bessel_context(), cfg.tau, **_tau_params(cfg))
    rep.info(
        {
            "tau": cfg.tau,
            "C": str(z.C),
            "Z": zeta_closed(z).to_text(),
            "L": l_factor(z).to_text(),
            "Yprime": y_prime(z).to_text(),
        }
    )


def cmd_theorem(cfg: RunConfig, rep: Report) -> None:
    z = make_zeta_context(cfg.bessel_context(), cfg.tau, **_tau_params(cfg))
    res = verify_integral_theorem(z)
    witness = {"difference": res.difference, "series_ok": res.series_ok}
    status = "pass" if res.passed else "fail"
    rep.verdict(VerificationReport("theorem", {"tau": cfg.tau}, status, res.lhs, res.rhs, witness))


def cmd_all(cfg: RunConfig, rep: Report) -> None:
    cmd_identities(cfg, rep)
    cmd_charsum(cfg, rep)
    cmd_hecke(cfg, rep)
    cmd_welldef(cfg, rep)
    cmd_dim(cfg, rep)
    ctx = cfg.bessel_context()
    dim, tv = dim_and_testvector(ctx)
    if dim == 1 and ctx.m0 <= 1 and (isinstance(tv, LamCondition) or tv):
        for cls in TAU_CLASSES:
            sub = RunConfig(**{**cfg.__dict__, "tau": cls, "numeric": {}})
            cmd_theorem(sub, rep)
    if cfg.extras.get("norm"):
        cmd_norm(cfg, rep)


DISPATCH = {
    "info": cmd_info,
    "dim": cmd_dim,
    "bvalue": cmd_bvalue,
    "verify-hecke": cmd_hecke,
    "verify-welldef": cmd_welldef,
    "verify-charsum": cmd_charsum,
    "verify-identities": cmd_identities,
    "norm": cmd_norm,
    "zeta": cmd_zeta,
    "verify-theorem": cmd_theorem,
    "all": cmd_all,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gsp4bessel", description="Exact checks for Iwahori-spherical Bessel functions.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key = value file; flags override it")
    ap.add_argument("--p")
    ap.add_argument("--abc", help="a,b,c")
    ap.add_argument("--omega", help="Atkin-Lehner sign, +1 or -1; Omega(varpi) = -omega")
    ap.add_argument("--m0")
    ap.add_argument("--lam", help="j=INT,unif=VALUE (ramified sign, split lam value or 'symbolic')")
    ap.add_argument("--tau", help="GL(2) class: " + ", ".join(TAU_CLASSES))
    ap.add_argument("--numeric", help="substitutions aT=..,bT=..,omg=..")
    ap.add_argument("--lrange", help="lo,hi inclusive")
    ap.add_argument("--mrange", help="lo,hi inclusive")
    ap.add_argument("--samples")
    ap.add_argument("--seed")
    ap.add_argument("--addr", help='for bvalue, e.g. "h(1,0)" or "h(0,0)·W0·s1·s2"')
    ap.add_argument("--norm-bounds", dest="norm_bounds", help="Lmax,Mmax for the norm sum")
    ap.add_argument("--with-norm", action="store_true", help="include the norm check in 'all'")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


_VALUE_FLAGS = {"--" + k.replace("_", "-") for k in DEFAULTS} | {"--config", "--out"}


def _join_values(argv: list[str]) -> list[str]:
    """Glue values such as ``-2,4`` to their flag so they are not read as options."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] not in ("-", ""):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _diagnostic(kind: str, message: str) -> None:
    sys.stderr.write(_row({"error": kind, "message": message}) + "\n")


def run_command(argv: Optional[list[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    try:
        argv = sys.argv[1:] if argv is None else list(argv)
        args = make_parser().parse_args(_join_values(argv))
    except UsageError as exc:
        _diagnostic("usage", str(exc))
        return EXIT_USAGE
    try:
        values = read_config_file(args.config) if args.config else {}
        flags = {k: getattr(args, k) for k in DEFAULTS if getattr(args, k, None) is not None}
        if args.out is not None:
            flags["out"] = args.out
        cfg = build_config({**values, **flags})
        cfg.extras["norm"] = args.with_norm
        rep = Report()
        DISPATCH[args.command](cfg, rep)
    except OSError as exc:
        _diagnostic("io", str(exc))
        return EXIT_IO
    except (ConfigError, AssumptionError, BesselError, ZetaError, ScalarError) as exc:
        _diagnostic("config", str(exc))
        return EXIT_CONFIG
    except (VerificationError, MemoryError, RecursionError) as exc:
        _diagnostic("resource", str(exc))
        return EXIT_RESOURCE
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                emit_report(rep.lines, rep.passed, rep.failed, fh)
        else:
            emit_report(rep.lines, rep.passed, rep.failed, stdout)
    except OSError as exc:
        _diagnostic("io", str(exc))
        return EXIT_IO
    return EXIT_OK if rep.failed == 0 else EXIT_FAIL


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
