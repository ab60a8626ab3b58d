"""Experiment runner: ``mfcorr <kind> --config FILE [options]``.

Config grammar (UTF-8 text, one entry per line)::

    # comment                      full-line comments and blank lines are ignored
    key = value                    keys are [a-z][a-z0-9_]*, each key at most once

Values are plain strings interpreted by the experiment kind. Lists of
function descriptors and integers use ``,``; sequence families and moment
lists use ``;``. ``--set key=value`` appends an entry after the file.

Every run writes ``<name>.json`` (config echo, results, checks and a separate
``metadata`` field holding timestamps and run environment), one
``<name>[_<series>].csv`` per series with columns ``N,re,im`` and a
``<name>.plot`` file of ``log10(N) value`` pairs. Floats use 17 significant
digits, files are UTF-8 with LF line ends.

Exit status: 0 completed, 1 configuration or descriptor error (with the
offending location), 2 a tolerance check failed under ``--assert``,
3 resource or I/O error.
"""
import argparse
import datetime as _dt
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .averaging import ConvergenceReport, as_schedule, fmt17
from .correlations import (
    ShiftSource, corr_along_deterministic, corr_fixed_shifts, corr_shifted_by_family,
    discrepancy_growth, identity_check_deterministic, pattern_densities,
    prime_dilation_identity_check, product_identity_check)
from .ergodic import TorusRotation, TrigMonomial, ergid2_check, rotation_correlation
from .errors import DescriptorError, DomainError, RangeError, ResourceError
from .furstenberg import (EmpiricalSystem, MomentSpec, _count_at_most, admission_test,
                          correspondence_identity_check, shift_invariance_check)
from .multfun import parse_function
from .pretentious import (TwistSearchConfig, aperiodicity_scan, archimedean_min_trace,
                          pretentious_distance_sq)
from .sequences import (Constant, SequenceFamily, check_congruence_equidistribution,
                        check_independence, check_weak_independence, indicator_of_range,
                        parse_sequence, word_complexity)
from .sieve import build_sieve

KINDS = (
    "corr-fixed", "corr-deterministic", "corr-family", "identity-deterministic",
    "product-identity", "pattern-density", "discrepancy", "prime-dilation", "pretentious",
    "aperiodicity-scan", "furstenberg-moment", "correspondence-check", "ergodic-oracle",
    "sequence-check",
)
FORMATS = ("csv", "json", "plotdata")
EXIT_OK, EXIT_PARSE, EXIT_ASSERT, EXIT_RESOURCE = 0, 1, 2, 3

_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_REQUIRED = object()


class ConfigError(Exception):
    """A config entry failed to parse or validate; ``location`` is file:line."""

    def __init__(self, location, message):
        super().__init__(f"{location}: {message}")
        self.location = location


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    text: str
    values: dict
    locations: dict
    source: str = "<config>"

    @property
    def kind(self):
        return self.values.get("kind")

    def has(self, key):
        return key in self.values

    def where(self, key):
        return self.locations.get(key, f"{self.source}: (missing {key})")

    def get(self, key, conv=str, default=_REQUIRED):
        if key not in self.values:
            if default is _REQUIRED:
                raise ConfigError(self.where(key), f"required key {key!r} is missing")
            return default
        raw = self.values[key]
        try:
            return conv(raw)
        except (ValueError, TypeError, ArithmeticError, DomainError, DescriptorError) as exc:
            raise ConfigError(self.where(key), f"{key} = {raw}: {exc}") from None


def parse_config(text, source="<config>", overrides=()):
    """Parse the key = value grammar; ``overrides`` are ``key=value`` strings."""
    values, locations = {}, {}
    lines = [(f"{source}:{i}", line) for i, line in enumerate(text.split("\n"), 1)]
    lines += [(f"--set[{i}]", s) for i, s in enumerate(overrides, 1)]
    for loc, line in lines:
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        if "=" not in body:
            raise ConfigError(loc, f"expected 'key = value', got {body!r}")
        key, val = (s.strip() for s in body.split("=", 1))
        if not _KEY_RE.match(key):
            raise ConfigError(loc, f"invalid key {key!r}")
        if key in values and not loc.startswith("--set"):
            raise ConfigError(loc, f"duplicate key {key!r} (first at {locations[key]})")
        values[key] = val
        locations[key] = loc
    echo = text
    if overrides:
        if echo and not echo.endswith("\n"):
            echo += "\n"
        echo += "".join(f"{s.strip()}\n" for s in overrides)
    cfg = ExperimentConfig(echo, values, locations, source)
    if cfg.kind is not None and cfg.kind not in KINDS:
        raise ConfigError(cfg.where("kind"), f"unknown experiment kind {cfg.kind!r}")
    return cfg


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _int(text):
    x = float(text) if any(c in text for c in ".eE") else int(text)
    if x != int(x):
        raise ValueError("not an integer")
    return int(x)


def _functions(text):
    return [parse_function(t) for t in text.split(",") if t.strip()]


def _family(text):
    return SequenceFamily.parse(text)


def _monomials(text):
    """``k:l1,l2;k:l1,l2`` with the torus part optional (``k:``)."""
    out = []
    for part in text.split(";"):
        k, _, l = part.strip().partition(":")
        out.append(TrigMonomial(int(k), tuple(_ints(l))))
    return out


def _moments(text):
    return [MomentSpec.parse(t.strip()) for t in text.split(";") if t.strip()]


def _formats(text):
    fm = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fm if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown output format(s) {bad}; choose from {list(FORMATS)}")
    return fm


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


@dataclass
class Outcome:
    series: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


def _check(name, value, bound, passed=None):
    value = float(value)
    ok = value <= bound if passed is None else bool(passed)
    return {"name": name, "value": value, "bound": bound, "passed": ok}


class _Context:
    def __init__(self, cfg, cache_dir):
        self.cfg = cfg
        self.cache_dir = cache_dir

    def sieve(self, need):
        need = max(int(need), 2)
        limit = self.cfg.get("sieve_limit", _int, None)
        if limit is not None and need > limit:
            raise ConfigError(self.cfg.where("sieve_limit"),
                              f"the experiment needs values up to {need} (N_max plus the "
                              f"largest shift), beyond the declared sieve limit {limit}")
        return build_sieve(limit or need, cache_dir=self.cache_dir)


def _schedule(cfg, key="schedule"):
    return cfg.get(key, as_schedule)


def _average(cfg):
    kind = cfg.get("average", str, "logarithmic")
    if kind not in ("logarithmic", "cesaro"):
        raise ConfigError(cfg.where("average"), "average must be logarithmic or cesaro")
    return kind


def _arity(cfg, fns, count, what):
    if len(fns) != count:
        raise ConfigError(cfg.where("functions"), f"{len(fns)} functions for {count} {what}")


def _tol_check(cfg, out, name, value, key="tolerance"):
    tol = cfg.get(key, float, None)
    if tol is not None:
        out.checks.append(_check(name, value, tol))


def _run_corr(cfg, ctx):
    fns = cfg.get("functions", _functions)
    sch = _schedule(cfg)
    avg = _average(cfg)
    if cfg.kind == "corr-family":
        fam = cfg.get("family", _family)
        point = cfg.get("n", _ints)
        _arity(cfg, fns, len(fam) + 1, "shift positions")
        src = cfg.get("n", lambda _: ShiftSource.family_at(fam, point))
        need = sch.n_max + max(src.resolved_shifts())
        res = corr_shifted_by_family(fns, fam, point, sch, avg, ctx.sieve(need))
    else:
        shifts = cfg.get("shifts", _ints)
        _arity(cfg, fns, len(shifts), "shifts")
        if min(shifts) < 0:
            raise ConfigError(cfg.where("shifts"), "shifts must be nonnegative")
        if cfg.kind == "corr-fixed":
            res = corr_fixed_shifts(fns, shifts, sch, avg, ctx.sieve(sch.n_max + max(shifts)))
        else:
            seq = cfg.get("sequence", parse_sequence)
            need = int(seq(sch.n_max + max(shifts)))
            res = corr_along_deterministic(fns, seq, shifts, sch, avg, ctx.sieve(need))
    out = Outcome({"corr": res.report}, res.to_dict())
    _tol_check(cfg, out, "abs_final", abs(res.final))
    return out


def _run_identity(cfg, ctx):
    fns = cfg.get("functions", _functions)
    seq = cfg.get("sequence", parse_sequence)
    shifts = cfg.get("shifts", _ints)
    _arity(cfg, fns, len(shifts), "shifts")
    n_outer, n_inner = cfg.get("n_outer", _int), cfg.get("n_inner", _int)
    s = max(shifts)
    need = max(int(seq(n_inner + s)), n_inner + int(seq(n_outer + s)))
    res = identity_check_deterministic(fns, seq, shifts, n_outer, n_inner, ctx.sieve(need))
    out = Outcome(_scalar_series(n_inner, lhs=res.lhs, rhs=res.rhs), res.to_dict())
    _tol_check(cfg, out, "gap", res.gap)
    return out


def _scalar_series(n, **values):
    return {k: ConvergenceReport((n,), [v], label=k) for k, v in values.items()}


def _run_product(cfg, ctx):
    fns = cfg.get("functions", _functions)
    fam = cfg.get("family", _family)
    _arity(cfg, fns, len(fam) + 1, "shift positions")
    n_outer, n_inner = cfg.get("n_outer", _int), cfg.get("n_inner", _int)
    top = max(int(np.max(g)) for g in fam.grid(n_outer))
    res = product_identity_check(fns, fam, n_outer, n_inner, ctx.sieve(n_inner + top))
    out = Outcome(_scalar_series(n_inner, lhs=res.lhs, rhs_a=res.rhs_a, rhs_b=res.rhs_b),
                  res.to_dict())
    target = cfg.get("target", float, None)
    if target is not None:
        out.results["target"] = target
        _tol_check(cfg, out, "gap_target", abs(res.lhs - target))
    else:
        _tol_check(cfg, out, "gap_b", res.gap_b)
    return out


def _run_patterns(cfg, ctx):
    fns = cfg.get("functions", _functions)
    sch = _schedule(cfg)
    avg = _average(cfg)
    kw = {}
    if cfg.has("family"):
        fam = cfg.get("family", _family)
        kw = {"family": fam, "n": cfg.get("n", _ints)}
        _arity(cfg, fns, len(fam) + 1, "shift positions")
        need = sch.n_max + max(ShiftSource.family_at(fam, kw["n"]).resolved_shifts())
    else:
        shifts = cfg.get("shifts", _ints)
        _arity(cfg, fns, len(shifts), "shifts")
        kw = {"shifts": shifts}
        need = sch.n_max + max(shifts)
        if cfg.has("sequence"):
            seq = cfg.get("sequence", parse_sequence)
            kw["sequence"] = seq
            need = int(seq(sch.n_max + max(shifts)))
    dens = pattern_densities(fns, sch, kind=avg, sieve=ctx.sieve(need), **kw)
    target = 0.5 ** len(fns)
    out = Outcome()
    total = 0.0
    for eps, res in dens.items():
        key = "pattern_" + "".join("+" if e > 0 else "-" for e in eps)
        out.series[key] = res.report
        out.results[key] = res.to_dict()
        total += res.final.real
        _tol_check(cfg, out, key, abs(res.final.real - target))
    out.results["target"] = target
    out.results["sum_final"] = total
    _tol_check(cfg, out, "sum_minus_one", abs(total - 1.0), "sum_tolerance")
    return out


def _run_discrepancy(cfg, ctx):
    fns = cfg.get("functions", _functions)
    _arity(cfg, fns, 1, "function slots")
    sch = _schedule(cfg)
    seq = cfg.get("sequence", parse_sequence, None)
    need = sch.n_max if seq is None else int(seq(sch.n_max))
    rep = discrepancy_growth(fns[0], seq, sch, ctx.sieve(need))
    vals = rep.values.real
    inc = bool(np.all(np.diff(vals) > 0))
    out = Outcome({"discrepancy": rep}, {"report": rep.to_dict(), "strictly_increasing": inc})
    if cfg.get("require_growth", str, "no") == "yes":
        out.checks.append(_check("strictly_increasing", 0.0 if inc else 1.0, 0.0, inc))
    return out


def _run_prime_dilation(cfg, ctx):
    fns = cfg.get("functions", _functions)
    shifts = cfg.get("shifts", _ints)
    _arity(cfg, fns, len(shifts), "shifts")
    d, p_max, n = cfg.get("d", _int, 1), cfg.get("p_max", _int), cfg.get("n", _int)
    need = max(n + p_max * max(shifts), p_max)
    res = prime_dilation_identity_check(fns, shifts, d, p_max, n, ctx.sieve(need))
    out = Outcome(_scalar_series(n, lhs=res.lhs, rhs=res.rhs), res.to_dict())
    _tol_check(cfg, out, "gap", res.gap)
    return out


def _twist_config(cfg):
    try:
        return TwistSearchConfig(cfg.get("t_max", float, 100.0),
                                 cfg.get("grid_step", float, 0.01), cfg.get("refine", _int, 30))
    except DomainError as exc:
        raise ConfigError(cfg.where("t_max"), str(exc)) from None


def _run_pretentious(cfg, ctx):
    fns = cfg.get("functions", _functions)
    sch = _schedule(cfg)
    sieve = ctx.sieve(sch.n_max)
    if len(fns) == 2:
        vals = [pretentious_distance_sq(fns[0], fns[1], n, sieve) for n in sch.points]
        rep = ConvergenceReport(sch.points, vals, label="distance_sq")
        out = Outcome({"distance_sq": rep}, {"functions": [f.descriptor for f in fns],
                                             "report": rep.to_dict()})
    elif len(fns) == 1:
        conf = _twist_config(cfg)
        trace = archimedean_min_trace(fns[0], sch, conf, sieve)
        rep = ConvergenceReport(sch.points, [r.value for r in trace], label="twist_min")
        out = Outcome({"twist_min": rep},
                      {"function": fns[0].descriptor, "config": conf.to_dict(),
                       "report": rep.to_dict(), "t_star": [r.t_star for r in trace],
                       "value_at_zero": [r.value_at_zero for r in trace]})
    else:
        raise ConfigError(cfg.where("functions"), "pretentious takes one or two functions")
    target = cfg.get("target", float, 0.0)
    _tol_check(cfg, out, "final_minus_target", abs(rep.final.real - target))
    return out


def _run_scan(cfg, ctx):
    fns = cfg.get("functions", _functions)
    _arity(cfg, fns, 1, "function slots")
    sch = _schedule(cfg)
    conf = _twist_config(cfg)
    scan = aperiodicity_scan(fns[0], cfg.get("q_max", _int), sch, conf, ctx.sieve(sch.n_max),
                             cfg.get("growth_eps", float, 1e-9))
    out = Outcome(results=scan.to_dict())
    for r in scan.rows:
        out.series[f"q{r['modulus']}_chi{r['character']}"] = ConvergenceReport(
            sch.points, r["values"], label=f"q={r['modulus']} chi={r['character']}")
    if cfg.get("require_aperiodic", str, "no") == "yes":
        bad = len(scan.failing())
        out.checks.append(_check("non_increasing_rows", bad, 0.0))
    return out


def _run_moments(cfg, ctx):
    fns = cfg.get("functions", _functions)
    sch = _schedule(cfg)
    specs = cfg.get("moments", _moments)
    max_shift = cfg.get("max_shift", _int, 16)
    h = cfg.get("h", _int, 1)
    sieve = ctx.sieve(sch.n_max + max_shift)
    try:
        emp = EmpiricalSystem.from_functions(fns, sch, max_shift, sieve)
        reps = [emp.moment(s) for s in specs]
    except DomainError as exc:
        raise ConfigError(cfg.where("moments"), str(exc)) from None
    out = Outcome({r.label: r for r in reps},
                  {"functions": [f.descriptor for f in fns], "schedule": sch.descriptor,
                   "moments": {r.label: r.to_dict() for r in reps}})
    if cfg.has("tolerance"):
        if h + max(max(s.canonical().shifts) for s in specs) > max_shift:
            raise ConfigError(cfg.where("h"), f"translation by {h} leaves the window "
                              f"[0, {max_shift}]")
        gap = shift_invariance_check(emp, specs, h)
        out.results["shift_invariance"] = {"h": h, "gap": gap}
        _tol_check(cfg, out, "shift_invariance_gap", gap)
    if cfg.has("admission_tol"):
        tol = cfg.get("admission_tol", float)
        verdicts = admission_test(emp, specs, tol)
        out.results["admission"] = [{"key": v.key, "steps": v.steps, "stabilizing": v.stabilizing}
                                    for v in verdicts]
        for v in verdicts:
            out.checks.append(_check(f"admission[{v.key}]", max(v.steps), tol))
    return out


def _run_correspondence(cfg, ctx):
    fns = cfg.get("functions", _functions)
    seq = cfg.get("sequence", parse_sequence)
    shifts = cfg.get("shifts", _ints)
    _arity(cfg, fns, len(shifts), "shifts")
    n = cfg.get("n", _int)
    count = _count_at_most(seq, n)
    need = max(n, int(seq(count + max(shifts) + 1)), int(seq(n + max(shifts))))
    res = correspondence_identity_check(fns, seq, shifts, n, ctx.sieve(need))
    out = Outcome(_scalar_series(n, lhs=res.lhs, rhs=res.rhs), res.to_dict())
    _tol_check(cfg, out, "gap", res.gap)
    return out


def _run_ergodic(cfg, ctx):
    alpha = cfg.get("alpha", lambda s: [Constant(x) for x in s.split(",") if x.strip()], [])
    rot = cfg.get("u", lambda s: TorusRotation(int(s), alpha), None) or TorusRotation(1, alpha)
    mons = cfg.get("monomials", _monomials)
    shifts = cfg.get("shifts", _ints)
    if len(mons) != len(shifts):
        raise ConfigError(cfg.where("shifts"), f"{len(shifts)} shifts for {len(mons)} monomials")
    d, r0 = cfg.get("d", _int, 1), cfg.get("r0", _int, 1)
    p_max, m_max = cfg.get("p_max", _int), cfg.get("m_max", _int)
    try:
        res = ergid2_check(rot, mons, shifts, d, r0, p_max, m_max, ctx.sieve(p_max))
        analytic = rotation_correlation(rot, mons, shifts)
    except DomainError as exc:
        raise ConfigError(cfg.where("monomials"), str(exc)) from None
    out = Outcome({"lhs": ConvergenceReport((p_max,), [res.lhs], label="lhs"),
                   "rhs": ConvergenceReport((m_max,), [res.rhs], label="rhs")},
                  {"ergid2": res.to_dict(), "analytic": analytic})
    _tol_check(cfg, out, "gap", res.gap)
    if cfg.has("orbit_n"):
        n = cfg.get("orbit_n", _int)
        orbit = rotation_correlation(rot, mons, shifts, "orbit", n)
        out.series["orbit"] = ConvergenceReport((n,), [orbit], label="orbit")
        out.results["orbit"] = {"N": n, "value": orbit, "gap": abs(orbit - analytic)}
        _tol_check(cfg, out, "orbit_gap", abs(orbit - analytic), "orbit_tolerance")
    return out


def _run_sequences(cfg, ctx):
    mode = cfg.get("mode", str, "independence")
    n = cfg.get("n", _int)
    if mode == "complexity":
        seq = cfg.get("sequence", parse_sequence)
        length = cfg.get("length", _int)
        count = _count_at_most(seq, n)
        word = indicator_of_range(seq.values(np.arange(1, count + 1, dtype=np.int64)), n)
        c = word_complexity(word, length)
        out = Outcome(results={"sequence": seq.descriptor, "N": n, "length": length,
                               "complexity": c})
        bound = cfg.get("max_complexity", _int, None)
        if bound is not None:
            out.checks.append(_check("complexity", c, bound))
        return out
    fam = cfg.get("family", _family)
    if mode == "congruence":
        stat, u, k = check_congruence_equidistribution(fam, cfg.get("u_max", _int), n)
        out = Outcome(results={"family": fam.descriptor, "N": n, "statistic": stat, "u": u,
                               "k": list(k) if k else None})
        _tol_check(cfg, out, "congruence_statistic", stat)
        return out
    k_max = cfg.get("k_max", _int)
    if mode == "independence":
        rep = check_independence(fam, k_max, n)
    elif mode == "weak":
        rep = check_weak_independence(fam, k_max, n, cfg.get("threshold", float, 1e-2))
    else:
        raise ConfigError(cfg.where("mode"), f"unknown mode {mode!r}; use independence, weak, "
                          "congruence or complexity")
    out = Outcome(results={"family": fam.descriptor, **rep.to_dict()})
    expect = cfg.get("expect", str, None)
    if expect is not None:
        if expect not in ("pass", "fail"):
            raise ConfigError(cfg.where("expect"), "expect must be pass or fail")
        ok = rep.verdict == (expect == "pass")
        out.checks.append(_check("verdict", 0.0 if ok else 1.0, 0.0, ok))
    return out


_RUNNERS = {
    "corr-fixed": _run_corr, "corr-deterministic": _run_corr, "corr-family": _run_corr,
    "identity-deterministic": _run_identity, "product-identity": _run_product,
    "pattern-density": _run_patterns, "discrepancy": _run_discrepancy,
    "prime-dilation": _run_prime_dilation, "pretentious": _run_pretentious,
    "aperiodicity-scan": _run_scan, "furstenberg-moment": _run_moments,
    "correspondence-check": _run_correspondence, "ergodic-oracle": _run_ergodic,
    "sequence-check": _run_sequences,
}


def run_experiment(cfg, cache_dir=None):
    """Run a parsed config and return its :class:`Outcome`."""
    if cfg.kind not in _RUNNERS:
        raise ConfigError(cfg.where("kind"), f"unknown experiment kind {cfg.kind!r}")
    return _RUNNERS[cfg.kind](cfg, _Context(cfg, cache_dir))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _scalar(x):
    if x is None or isinstance(x, bool):
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return fmt17(x) if math.isfinite(x) else json.dumps(str(x))
    return json.dumps(str(x), ensure_ascii=False)


def to_json(obj, level=0):
    """Deterministic JSON text with every float printed to 17 significant digits."""
    pad, inner = " " * level, " " * (level + 1)
    if isinstance(obj, (complex, np.complexfloating)):
        obj = [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {to_json(v, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        parts = [to_json(v, level + 1) for v in obj]
        if all("\n" not in p for p in parts) and sum(map(len, parts)) < 100:
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + "\n" + pad + "]"
    return _scalar(obj)


def _safe(label):
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", label)


def series_csv(rep):
    return rep.to_csv()


def series_plotdata(series):
    """``log10(N) value`` pairs; complex series get a second ``:im`` block."""
    blocks = []
    for key, rep in series.items():
        parts = [("", rep.values.real)]
        if np.any(rep.values.imag != 0.0):
            parts = [(":re", rep.values.real), (":im", rep.values.imag)]
        for suffix, vals in parts:
            rows = [f"# series {key}{suffix}"]
            rows += [f"{fmt17(math.log10(n))} {fmt17(v)}" for n, v in zip(rep.checkpoints, vals)]
            blocks.append("\n".join(rows) + "\n")
    return "\n".join(blocks)


def build_report(cfg, outcome):
    """The reproducible JSON payload (everything except run metadata)."""
    return {
        "version": __version__,
        "kind": cfg.kind,
        "config": {"text": cfg.text, "values": dict(cfg.values)},
        "results": outcome.results,
        "series": {k: r.to_dict() for k, r in outcome.series.items()},
        "checks": outcome.checks,
    }


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_reports(cfg, outcome, out_dir, formats, metadata):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _safe(cfg.get("name", str, cfg.kind))
    written = []
    if "csv" in formats:
        single = len(outcome.series) == 1
        for key, rep in outcome.series.items():
            path = out_dir / (f"{stem}.csv" if single else f"{stem}_{_safe(key)}.csv")
            _write(path, series_csv(rep))
            written.append(path)
    if "plotdata" in formats and outcome.series:
        path = out_dir / f"{stem}.plot"
        _write(path, series_plotdata(outcome.series))
        written.append(path)
    if "json" in formats:
        payload = build_report(cfg, outcome)
        payload["metadata"] = metadata
        path = out_dir / f"{stem}.json"
        _write(path, to_json(payload) + "\n")
        written.append(path)
    return written


def load_report(path):
    """Parse an emitted JSON report and its embedded config."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    cfg = parse_config(data["config"]["text"], str(path))
    if cfg.kind is None:
        # the kind came from the subcommand rather than the file
        cfg.values["kind"] = data["kind"]
        cfg.locations["kind"] = "command line"
    return data, cfg


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("command line", message)


def _build_parser():
    p = _Parser(prog="mfcorr", description="Run a correlation experiment from a config file.")
    sub = p.add_subparsers(dest="kind", metavar="KIND")
    sub.required = True
    for kind in KINDS:
        s = sub.add_parser(kind, help=f"run a {kind} experiment")
        s.add_argument("--config", metavar="FILE", help="key = value experiment config")
        s.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="add or override a config entry")
        s.add_argument("--out", metavar="DIR", default="mfcorr-out", help="report directory")
        s.add_argument("--threads", metavar="K", type=int, default=None,
                       help="cap worker threads (outputs do not depend on it)")
        s.add_argument("--assert", dest="assert_mode", action="store_true",
                       help="exit 2 when a tolerance check fails")
        s.add_argument("--sieve-cache", metavar="DIR", default=None,
                       help="directory for cached sieve tables")
    return p


def _stamp():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _main(argv):
    args = _build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads", "K must be >= 1")
    text, source = "", "<command line>"
    if args.config:
        source = args.config
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError(source, "config file not found") from None
    cfg = parse_config(text, source, args.set)
    if cfg.kind is None:
        cfg.values["kind"] = args.kind
        cfg.locations["kind"] = "command line"
    elif cfg.kind != args.kind:
        raise ConfigError(cfg.where("kind"),
                          f"config is for {cfg.kind!r} but the subcommand is {args.kind!r}")
    formats = cfg.get("formats", _formats, list(FORMATS))
    _accel.set_threads(args.threads)
    started, t0 = _stamp(), time.perf_counter()
    outcome = run_experiment(cfg, args.sieve_cache)
    metadata = {"started": started, "finished": _stamp(),
                "elapsed_s": round(time.perf_counter() - t0, 3), "config_path": source,
                "backend": _accel.backend(), "threads": _accel.get_threads(),
                "python": sys.version.split()[0], "numpy": np.__version__}
    for path in emit_reports(cfg, outcome, args.out, formats, metadata):
        print(f"wrote {path}")
    failed = [c for c in outcome.checks if not c["passed"]]
    for c in outcome.checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: {fmt17(c['value'])} (bound {fmt17(c['bound'])})")
    if failed and args.assert_mode:
        return EXIT_ASSERT
    return EXIT_OK


def main(argv=None):
    try:
        return _main(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"mfcorr: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RangeError, ResourceError, MemoryError, OSError) as exc:
        print(f"mfcorr: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DescriptorError, DomainError) as exc:
        print(f"mfcorr: error: invalid experiment: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
