"""Command-line entry point: ``u1aba <task> [options]``.

Tasks: verify, spectrum, bethe, offshell, limit, hamiltonian.  A run is
described by a :class:`RunConfig`, read from an INI-style file with
``[model]``, ``[lattice]`` and ``[task]`` sections (``--config``) and then
overridden by flags.  Complex numbers are written ``re+imi``.

Exit status: 0 when every asserted tolerance passes, 1 on a numerical
failure (the report is still written), 2 on an invalid configuration.
Output is deterministic for a fixed seed; wall-clock timings are only
included with ``--timings``.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import aba, colored, nonadditive, sl2r, verify, xxz
from .common import Lattice, PoleError, parse_complex
from .tensor import DimensionError

TASKS = ("verify", "spectrum", "bethe", "offshell", "limit", "hamiltonian")
FORMATS = ("json-lines", "csv", "human")
MODELS = ("xxz", "colored", "nonadditive", "sl2r")


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


@dataclass
class RunConfig:
    task: str
    model: dict
    lattice: dict
    params: dict
    seed: int = 0
    tol: Optional[float] = None
    out: Optional[str] = None
    fmt: str = "json-lines"
    timings: bool = False

    def echo(self) -> dict:
        return {"model": dict(self.model), "lattice": dict(self.lattice), "task": dict(self.params), "tol": self.tol}


@dataclass
class Report:
    task: str
    config: dict
    seed: int
    items: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    passed: bool = True

    def to_dict(self, with_timings: bool) -> dict:
        return {
            "task": self.task,
            "config_echo": self.config,
            "seed": self.seed,
            "items": self.items,
            "timings": self.timings if with_timings else None,
            "pass": self.passed,
        }


# -- serialization ----------------------------------------------------------


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def fmt_complex(z: complex) -> str:
    z = complex(z)
    im = fmt_float(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{fmt_float(z.real)}{sign}{im}i"


def _json(obj) -> str:
    """JSON with sorted keys, 17-significant-digit floats and complex as ``re+imi`` strings."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(float(obj))
        return s if math.isfinite(float(obj)) else json.dumps(s)
    if isinstance(obj, (complex, np.complexfloating)):
        return json.dumps(fmt_complex(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return fmt_complex(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return _json(v)
    return str(v)


def emit(report: Report, fmt: str, with_timings: bool = False) -> str:
    d = report.to_dict(with_timings)
    if fmt == "json-lines":
        return _json(d) + "\n"
    if fmt == "csv":
        keys = sorted({k for it in report.items for k in it})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for it in report.items:
            w.writerow([_cell(it.get(k, "")) for k in keys])
        return buf.getvalue()
    if fmt == "human":
        lines = [f"task: {report.task}   seed: {report.seed}", f"config: {_json(d['config_echo'])}"]
        for it in report.items:
            tag = "" if "passed" not in it else ("[PASS] " if it["passed"] else "[FAIL] ")
            body = "  ".join(f"{k}={_cell(v)}" for k, v in sorted(it.items()) if k != "passed")
            lines.append(tag + body)
        if with_timings:
            lines.append("timings: " + _json(report.timings))
        lines.append("RESULT: " + ("PASS" if report.passed else "FAIL"))
        return "\n".join(lines) + "\n"
    raise ConfigError("format", f"unknown format {fmt!r}")


# -- configuration ----------------------------------------------------------


def _num(section: dict, key: str, kind, where: str, default=None):
    if key not in section or section[key] in (None, ""):
        return default
    raw = section[key]
    try:
        if kind is complex:
            return parse_complex(raw)
        if kind is int:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.{key}", f"cannot parse {raw!r} as {kind.__name__}") from None


def build_model(model: dict):
    """(provider, spec) from the ``[model]`` section."""
    name = model.get("name")
    if name not in MODELS:
        raise ConfigError("model.name", f"expected one of {', '.join(MODELS)}, got {name!r}")
    try:
        if name == "xxz":
            N = _num(model, "N", int, "model", 2)
            spec = xxz.XxzSpec(N, _num(model, "gamma", float, "model", 0.37))
            return xxz.provider(spec), spec
        if name == "colored":
            N = _num(model, "N", int, "model", 3)
            spec = colored.ColoredSpec(N, _num(model, "k", int, "model", 1), _num(model, "gbar", complex, "model", 0.3 + 0.2j))
            return colored.provider(spec), spec
        if name == "nonadditive":
            # Bethe roots are generically complex; allow_complex = false restricts to (-1, 1)
            cx = str(model.get("allow_complex", "true")).lower() in ("1", "true", "yes")
            spec = nonadditive.NonAddSpec(_num(model, "N", int, "model", 2), _num(model, "k", int, "model", 1), allow_complex=cx)
            return nonadditive.provider(spec), spec
        spec = sl2r.Sl2rSpec(_num(model, "s", float, "model", -0.5))
        return sl2r.provider(spec), spec
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError("model", str(e)) from None


def build_lattice(lat: dict, provider, rng: np.random.Generator) -> Lattice:
    L = _num(lat, "L", int, "lattice", 2)
    if L < 1:
        raise ConfigError("lattice.L", "needs L >= 1")
    mus = lat.get("mus")
    if mus:
        vals = [parse_complex(x) for x in str(mus).split(",") if x.strip()]
        if len(vals) != L:
            raise ConfigError("lattice.mus", f"{len(vals)} inhomogeneities for L={L}")
        return Lattice(tuple(vals))
    if lat.get("homogeneous", "false").lower() in ("1", "true", "yes"):
        return Lattice.homogeneous(L)
    if provider.additive:
        vals = rng.uniform(-0.3, 0.3, L) + 1j * rng.uniform(-0.3, 0.3, L)
    else:
        vals = rng.uniform(-0.3, 0.3, L)
    return Lattice(tuple(complex(v) for v in vals))


def load_config(args) -> RunConfig:
    sections = {"model": {}, "lattice": {}, "task": {}}
    if args.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except OSError as e:
            raise ConfigError("config", str(e)) from None
        for sec in cp.sections():
            if sec not in sections:
                raise ConfigError(sec, "unknown section (expected model, lattice, task)")
            sections[sec].update(cp[sec])
    flagmap = {
        "model": "model.name", "N": "model.N", "k": "model.k", "gamma": "model.gamma",
        "gbar": "model.gbar", "s": "model.s", "L": "lattice.L", "mus": "lattice.mus",
    }
    for attr, dest in flagmap.items():
        v = getattr(args, attr, None)
        if v is not None:
            sec, key = dest.split(".")
            sections[sec][key] = str(v)
    if getattr(args, "homogeneous", False):
        sections["lattice"]["homogeneous"] = "true"
    for attr in ("n", "lam", "samples", "random", "aux_cap", "Ns", "route"):
        v = getattr(args, attr, None)
        if v is not None:
            sections["task"][attr] = str(v)
    for kv in args.set or []:
        if "=" not in kv or "." not in kv.split("=", 1)[0]:
            raise ConfigError("set", f"expected section.key=value, got {kv!r}")
        k, v = kv.split("=", 1)
        sec, key = k.split(".", 1)
        if sec not in sections:
            raise ConfigError(sec, "unknown section")
        sections[sec][key] = v
    if args.format not in FORMATS:
        raise ConfigError("format", f"expected one of {', '.join(FORMATS)}")
    if args.tol is not None and not args.tol > 0:
        raise ConfigError("tol", "must be positive")
    return RunConfig(
        task=args.task,
        model=sections["model"],
        lattice=sections["lattice"],
        params=sections["task"],
        seed=args.seed,
        tol=args.tol,
        out=args.out,
        fmt=args.format,
        timings=args.timings,
    )


# -- tasks ------------------------------------------------------------------


def _closed_lambda(spec, lattice, roots, lam):
    if isinstance(spec, xxz.XxzSpec):
        return xxz.lambda_eig_xxz(spec, lattice, roots, lam)
    if isinstance(spec, colored.ColoredSpec):
        return colored.lambda_eig_colored(spec, lattice, roots, lam)
    if isinstance(spec, nonadditive.NonAddSpec):
        return nonadditive.lambda_eig_nonadd(spec, lattice, roots, lam)
    raise ConfigError("model.name", "closed-form eigenvalue available only for compact models")


def _default_lam(provider, additive_default: complex) -> complex:
    # non-additive weights are defined for real arguments in (-1, 1)
    return additive_default if provider.additive else 0.1 + 0j


def _require_compact(provider, task):
    if not provider.compact:
        raise ConfigError("model.name", f"task {task} needs a compact model (finite auxiliary trace)")


def task_verify(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    samples = _num(cfg.params, "samples", int, "task", 10)
    tol = cfg.tol
    kw = {} if tol is None else {"tol": tol}
    reports = [
        verify.check_ice(provider, samples=min(samples, 5), seed=cfg.seed),
        verify.check_ybe(provider, samples=samples, seed=cfg.seed, **kw),
        verify.check_unitarity(provider, samples=samples, seed=cfg.seed, **kw),
    ]
    if isinstance(spec, xxz.XxzSpec):
        reports.append(verify.check_braid(xxz.braid_matrix(spec), spec.N, **kw))
    elif isinstance(spec, colored.ColoredSpec):
        reports.append(verify.check_braid(colored.colored_braid(spec), spec.N, **kw))
    elif isinstance(spec, nonadditive.NonAddSpec):
        from .tensor import permutation

        P = permutation(spec.N)
        reports.append(
            verify.check_colored_braid(lambda g1, g2: P @ nonadditive.r_matrix_nonadd(spec, g1, g2), spec.N, samples=samples, seed=cfg.seed, **kw)
        )
    if provider.compact:
        reports.append(verify.check_transfer_commute(provider, lattice, samples=min(samples, 5), seed=cfg.seed, **kw))
    for r in reports:
        rep.items.append(r.to_dict())
    rep.passed = all(r.passed for r in reports)


def task_spectrum(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    _require_compact(provider, "spectrum")
    lam = _num(cfg.params, "lam", complex, "task", _default_lam(provider, 0.1 + 0.2j))
    n = _num(cfg.params, "n", int, "task")
    T = aba.transfer(provider, lattice, lam)
    rep.items.append({"kind": "off-block-mass", "value": T.off_block_mass(), "passed": T.off_block_mass() == 0.0})
    for sector, B in sorted(T.sector_blocks.items()):
        if n is not None and sector != n:
            continue
        for i, ev in enumerate(np.sort_complex(np.linalg.eigvals(B))):
            rep.items.append({"kind": "eigenvalue", "sector": sector, "index": i, "value": complex(ev)})
    rep.passed = T.off_block_mass() == 0.0


def task_bethe(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    _require_compact(provider, "bethe")
    n = _num(cfg.params, "n", int, "task", 1)
    lam = _num(cfg.params, "lam", complex, "task", _default_lam(provider, 0.1 + 0.2j))
    n_random = _num(cfg.params, "random", int, "task", 20)
    tol = 1e-8 if cfg.tol is None else cfg.tol
    if n < 1:
        raise ConfigError("task.n", "needs n >= 1")
    sol = aba.solve_bae(provider, lattice, n, n_random=n_random, rng=rng)
    block = aba.transfer(provider, lattice, lam).sector_blocks.get(n)
    dense = np.linalg.eigvals(block) if block is not None else np.array([])
    ok = True
    for j, br in enumerate(sol.solutions):
        gen = aba.eigenvalue_generic(provider, lattice, br.roots, lam)
        closed = _closed_lambda(spec, lattice, br.roots, lam)
        _, eres = aba.eigen_residual(provider, lattice, br.roots, lam)
        match = float(np.abs(dense - gen).min()) if dense.size else float("inf")
        agree = abs(gen - closed) / max(abs(gen), 1e-300)
        passed = bool(max(br.residuals) <= tol and match <= tol and eres <= tol and agree <= 1e-10)
        ok &= passed
        rep.items.append(
            {
                "kind": "bethe-roots",
                "index": j,
                "roots": list(br.roots),
                "bae_residual": max(br.residuals),
                "lambda_generic": gen,
                "lambda_closed": closed,
                "dense_match": match,
                "eigen_residual": eres,
                "passed": passed,
            }
        )
    rep.items.append({"kind": "solver", "attempts": sol.attempts, "failures": sol.failures, "solutions": len(sol.solutions)})
    rep.timings["solver"] = sol.elapsed
    rep.passed = ok and len(sol.solutions) > 0


def task_offshell(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    n = _num(cfg.params, "n", int, "task", 1)
    lam = _num(cfg.params, "lam", complex, "task", _default_lam(provider, 0.29 - 0.14j))
    samples = _num(cfg.params, "samples", int, "task", 3)
    aux_cap = _num(cfg.params, "aux_cap", int, "task", None if provider.compact else 20)
    tol = 1e-8 if cfg.tol is None else cfg.tol
    ok = True
    for i in range(samples):
        roots = list(rng.uniform(-0.6, 0.6, n) + 1j * rng.uniform(0.1, 0.5, n))
        if not provider.additive:
            roots = list(rng.uniform(-0.8, 0.8, n).astype(complex))
        res = aba.offshell_decomposition_check(provider, lattice, roots, lam, aux_cap=aux_cap)
        ok &= res <= tol
        rep.items.append({"kind": "offshell", "index": i, "roots": roots, "residual": res, "passed": bool(res <= tol)})
    rep.passed = bool(ok)


def task_limit(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    if not isinstance(spec, sl2r.Sl2rSpec):
        raise ConfigError("model.name", "limit needs the sl2r model")
    Ns = tuple(int(x) for x in str(cfg.params.get("Ns", "64,128,256")).split(","))
    routes = [cfg.params["route"]] if "route" in cfg.params else (["colored", "xxz"] if spec.s == -0.5 else ["colored"])
    lo, hi = 0.4, 0.6
    ok = True
    for route in routes:
        try:
            rows, th, fr = sl2r.limit_table(spec, Ns, route=route)
        except ValueError as e:
            raise ConfigError("task.route", str(e)) from None
        for r in rows:
            rep.items.append({"kind": "limit-error", "route": route, "N": r.N, "theta_error": r.theta_error, "f_error": r.f_error})
        for name, ratios in (("theta", th), ("f", fr)):
            for (a, b), q in zip(zip(Ns, Ns[1:]), ratios):
                passed = bool(lo <= q <= hi)
                ok &= passed
                rep.items.append({"kind": "limit-ratio", "route": route, "observable": name, "N": a, "N_next": b, "ratio": q, "passed": passed})
    rep.passed = bool(ok)


def task_hamiltonian(cfg: RunConfig, provider, spec, lattice, rng, rep: Report):
    if not isinstance(spec, sl2r.Sl2rSpec):
        raise ConfigError("model.name", "hamiltonian needs the sl2r model")
    n = _num(cfg.params, "n", int, "task", 2)
    L = lattice.L
    tol = 1e-8 if cfg.tol is None else cfg.tol
    H = sl2r.build_hamiltonian(spec, L, n)
    sym = float(np.abs(H - H.T).max())
    for i, ev in enumerate(np.linalg.eigvalsh(H)):
        rep.items.append({"kind": "eigenvalue", "sector": n, "index": i, "value": float(ev)})
    ok = sym <= 1e-12
    rep.items.append({"kind": "symmetry", "residual": sym, "passed": bool(sym <= 1e-12)})
    for m in range(1, min(n, sl2r.TABLE_SECTOR_CAP) + 1):
        d = float(np.abs(sl2r.hamiltonian_from_r(spec, m) - sl2r.two_site_block(spec, m)).max())
        ok &= d <= tol
        rep.items.append({"kind": "from-r", "sector": m, "residual": d, "passed": bool(d <= tol)})
    if n == 2 and L >= 3:
        sols = sl2r.cba_two_particle(spec, L, rng=rng)
        Es = np.array([s.energy for s in sols])
        worst = max(float(np.abs(Es - ev).min()) for ev in np.linalg.eigvalsh(H))
        psi = max(s.eigen_residual for s in sols)
        ok &= worst <= tol and psi <= tol
        rep.items.append({"kind": "cba", "solutions": len(sols), "energy_match": worst, "psi_residual": psi, "passed": bool(worst <= tol and psi <= tol)})
    rep.passed = bool(ok)


RUNNERS = {
    "verify": task_verify,
    "spectrum": task_spectrum,
    "bethe": task_bethe,
    "offshell": task_offshell,
    "limit": task_limit,
    "hamiltonian": task_hamiltonian,
}


def run(cfg: RunConfig) -> Report:
    if cfg.task not in RUNNERS:
        raise ConfigError("task", f"expected one of {', '.join(TASKS)}")
    provider, spec = build_model(cfg.model)
    rng = np.random.default_rng(cfg.seed)
    lattice = build_lattice(cfg.lattice, provider, rng)
    echo = cfg.echo()
    echo["lattice"] = {"L": lattice.L, "mus": list(lattice.mus)}
    rep = Report(cfg.task, echo, cfg.seed)
    t0 = time.perf_counter()
    RUNNERS[cfg.task](cfg, provider, spec, lattice, rng, rep)
    rep.timings["total"] = time.perf_counter() - t0
    return rep


# -- argument parsing -------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = common.add_argument_group("run")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=None, help="override the asserted tolerance")
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.add_argument("--format", default="json-lines", help="json-lines, csv or human")
    g.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identity)")
    g.add_argument("--config", default=None, help="INI file with [model], [lattice], [task]")
    g.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    m = common.add_argument_group("model")
    m.add_argument("--model", choices=MODELS)
    m.add_argument("--N", type=int)
    m.add_argument("--k", type=int)
    m.add_argument("--gamma", type=float)
    m.add_argument("--gbar")
    m.add_argument("--s", type=float)
    m.add_argument("--L", type=int)
    m.add_argument("--mus", help="comma-separated inhomogeneities")
    m.add_argument("--homogeneous", action="store_true")

    p = argparse.ArgumentParser(prog="u1aba", description=__doc__.split("\n")[0], allow_abbrev=False)
    sub = p.add_subparsers(dest="task", required=True)
    for name in TASKS:
        sp = sub.add_parser(name, parents=[common], allow_abbrev=False)
        if name in ("spectrum", "bethe", "offshell", "hamiltonian"):
            sp.add_argument("--n", type=int)
        if name in ("spectrum", "bethe", "offshell"):
            sp.add_argument("--lam")
        if name in ("verify", "offshell"):
            sp.add_argument("--samples", type=int)
        if name == "bethe":
            sp.add_argument("--random", type=int)
        if name == "offshell":
            sp.add_argument("--aux-cap", dest="aux_cap", type=int)
        if name == "limit":
            sp.add_argument("--Ns")
            sp.add_argument("--route", choices=("colored", "xxz"))
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        cfg = load_config(args)
        rep = run(cfg)
        text = emit(rep, cfg.fmt, cfg.timings)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (nonadditive.DomainError, sl2r.SectorError, DimensionError, PoleError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as e:
            print(f"error: cannot write {cfg.out}: {e}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
