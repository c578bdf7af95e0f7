"""Command-line front end: configuration, orchestration and report files.

Configuration is a flat ``key = value`` text file (``#`` starts a comment).
Every key and its default is listed in ``SCHEMA``; the values actually used
are written into each JSON report. Flags override environment variables,
which override the config file, which overrides the defaults:

    --config PATH        QUADSUM_CONFIG
    --out DIR            QUADSUM_OUT
    --threads N          QUADSUM_THREADS
    --strict-sequential  QUADSUM_STRICT_SEQUENTIAL (1/true/yes)
    --tolerance X        QUADSUM_TOLERANCE

Exit status: 0 success, 2 invalid configuration, 3 a tolerance was
violated, 4 a resource guard aborted the run.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import summation
from .descent import TestFunction, arch_preset, scale
from .local_arith import density_table
from .quadspace import FamilyError, QuadFamily, build_family

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_TOLERANCE = 3
EXIT_RESOURCE = 4

ENV_PREFIX = "QUADSUM_"
EXPERIMENTS = ("verify", "scale", "count", "properties", "theta", "densities")
PRESETS = ("majorant", "majorant-times-linear", "skew")

log = logging.getLogger("quadsum")


class ConfigError(ValueError):
    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


def _matrix(text: str) -> np.ndarray:
    text = text.strip()
    if not text:
        return np.zeros((0, 0), dtype=int)
    rows = [[int(v) for v in row.split(",")] for row in text.split(";")]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("J0 must be square, rows separated by ';' and entries by ','")
    return np.array(rows, dtype=int)


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _fraction_list(text: str) -> List[Fraction]:
    return [Fraction(v.strip()) for v in text.split(",") if v.strip()]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str):
    return None if text.strip() in ("", "default") else float(text)


# key -> (parser, default text, description)
SCHEMA: Dict[str, tuple] = {
    "family.J0": (_matrix, "", "Gram matrix of the anisotropic core, rows ';' entries ','; empty for the split family"),
    "family.ell": (int, "3", "number of hyperbolic planes added to the core"),
    "arch.preset": (str, "majorant", "archimedean Gaussian: " + ", ".join(PRESETS)),
    "dilation": (Fraction, "1", "positive rational torus dilation applied to the test function"),
    "scale.a_list": (_fraction_list, "2,3,1/2", "scaling parameters for the scale experiment"),
    "count.B_list": (_float_list, "1,2,3", "box sizes for the counting experiment"),
    "count.ratio_tolerance": (float, "0.05", "allowed |count / main term - 1| at the largest B"),
    "densities.primes": (_int_list, "2,3,5,7", "primes for the density table"),
    "densities.kmax": (int, "2", "largest prime-power exponent for the density table"),
    "theta.T_list": (_float_list, "2,3,4,5,6", "truncation parameters for the theta experiment"),
    "numeric.tolerance": (_optional_float, "default", "relative tolerance; default depends on the experiment"),
    "numeric.threads": (int, "1", "worker threads for point sums"),
    "numeric.strict_sequential": (_bool, "false", "force one thread"),
    "output.dir": (str, "quadsum-out", "directory for reports and the log"),
}

DEFAULT_TOLERANCE = {"verify": 1e-5, "scale": 1e-5, "count": 1e-6, "theta": 1e-3}

FLAG_KEYS = {"config": None, "out": "output.dir", "threads": "numeric.threads",
             "strict_sequential": "numeric.strict_sequential", "tolerance": "numeric.tolerance"}


def read_config_file(path) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    errors = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {n}: expected key = value")
            continue
        k, v = (s.strip() for s in line.split("=", 1))
        raw[k] = v
    if errors:
        raise ConfigError(errors)
    return raw


@dataclass
class RunConfig:
    experiment: str
    values: Dict[str, object]
    sources: Dict[str, str] = field(default_factory=dict)
    family: QuadFamily | None = None

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def threads(self) -> int:
        return 1 if self["numeric.strict_sequential"] else self["numeric.threads"]

    @property
    def tolerance(self) -> float | None:
        t = self["numeric.tolerance"]
        return DEFAULT_TOLERANCE.get(self.experiment) if t is None else t

    def test_function(self) -> TestFunction:
        fam = self.family
        tf = TestFunction(fam, fam.ell, arch_preset(fam, fam.ell, self["arch.preset"]))
        return tf if self["dilation"] == 1 else scale(tf, self["dilation"])

    def to_json(self) -> dict:
        out = {}
        for k, v in self.values.items():
            if isinstance(v, np.ndarray):
                v = v.tolist()
            elif isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, list):
                v = [str(x) if isinstance(x, Fraction) else x for x in v]
            out[k] = v
        return {"experiment": self.experiment, "settings": out, "sources": self.sources,
                "effective_threads": self.threads, "effective_tolerance": self.tolerance}


def load_config(experiment: str, config_path=None, overrides: Dict[str, str] | None = None,
                env: Dict[str, str] | None = None) -> RunConfig:
    """Layer defaults, config file, environment and flag overrides; validate everything."""
    env = os.environ if env is None else env
    layers: Dict[str, tuple] = {k: (entry[1], "default") for k, entry in SCHEMA.items()}
    errors: List[str] = []
    if experiment not in EXPERIMENTS:
        errors.append(f"unknown experiment {experiment!r}")
    config_path = config_path or env.get(ENV_PREFIX + "CONFIG")
    if config_path:
        try:
            for k, v in read_config_file(config_path).items():
                if k not in SCHEMA:
                    errors.append(f"unknown key {k!r}")
                else:
                    layers[k] = (v, "config")
        except ConfigError as e:
            errors.extend(e.errors)
        except OSError as e:
            errors.append(f"cannot read config: {e}")
    for flag, key in FLAG_KEYS.items():
        if key and ENV_PREFIX + flag.upper() in env:
            layers[key] = (env[ENV_PREFIX + flag.upper()], "environment")
    for key, v in (overrides or {}).items():
        layers[key] = (v, "flag")
    values: Dict[str, object] = {}
    for k, (text, _) in layers.items():
        try:
            values[k] = SCHEMA[k][0](text)
        except (ValueError, ZeroDivisionError) as e:
            errors.append(f"{k}: {e}")
    cfg = RunConfig(experiment, values, {k: src for k, (_, src) in layers.items()})
    if not errors:
        errors.extend(_validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def _validate(cfg: RunConfig) -> List[str]:
    errors = []
    J0 = cfg["family.J0"]
    if J0.shape[0] % 2:
        errors.append("family.J0 must have even size")
    if cfg["family.ell"] < 1:
        errors.append("family.ell must be at least 1")
    if cfg["arch.preset"] not in PRESETS:
        errors.append(f"arch.preset must be one of {', '.join(PRESETS)}")
    if cfg["dilation"] <= 0:
        errors.append("dilation must be positive")
    if cfg["numeric.threads"] < 1:
        errors.append("numeric.threads must be positive")
    t = cfg["numeric.tolerance"]
    if t is not None and not t > 0:
        errors.append("numeric.tolerance must be positive")
    if errors:
        return errors
    try:
        cfg.family = build_family(J0, cfg["family.ell"])
    except (FamilyError, ValueError) as e:
        return [f"family: {e}"]
    fam, exp = cfg.family, cfg.experiment
    d = fam.dim(fam.ell)
    try:
        tf = cfg.test_function()
    except ValueError as e:
        return [f"test function: {e}"]
    if exp == "verify":
        try:
            summation._require_verify(tf)
        except ValueError as e:
            errors.append(f"verify: {e}")
    elif exp == "scale":
        if not (d > 4 or not fam.chi_trivial):
            errors.append("scale: needs dim V_l > 4 or a nontrivial character")
        if any(a <= 0 for a in cfg["scale.a_list"]) or not cfg["scale.a_list"]:
            errors.append("scale.a_list must be nonempty and positive")
        try:
            summation._require_unramified(fam)
        except ValueError as e:
            errors.append(f"scale: {e}")
    elif exp == "count":
        if d <= 4:
            errors.append("count: needs dim V_l > 4")
        if not cfg["count.B_list"] or any(b <= 0 for b in cfg["count.B_list"]):
            errors.append("count.B_list must be nonempty and positive")
        try:
            summation._require_unramified(fam)
        except ValueError as e:
            errors.append(f"count: {e}")
    elif exp == "theta":
        if fam.dim0 or cfg["arch.preset"] != "majorant":
            errors.append("theta: needs the split family (empty family.J0) and arch.preset = majorant")
        T = cfg["theta.T_list"]
        if len(T) < 4 or any(b <= a for a, b in zip(T, T[1:])) or T[0] < 0:
            errors.append("theta.T_list must be increasing, nonnegative, with at least four entries")
    elif exp == "densities":
        if any(p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)) for p in cfg["densities.primes"]):
            errors.append("densities.primes must be primes")
        if cfg["densities.kmax"] < 1:
            errors.append("densities.kmax must be at least 1")
    return errors


# -- experiments ------------------------------------------------------------------------
# each returns (passed, json payload, csv rows with header first)

def _r(x) -> str:
    return repr(float(x))


def _cx(z) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def run_verify(cfg: RunConfig):
    rep = summation.verify_main(cfg.test_function(), threads=cfg.threads)
    rows = [["term_label", "side", "real", "imag", "abs_err_bound"]]
    for side, terms, errs in (("lhs", rep.lhs_terms, rep.lhs_errors), ("rhs", rep.rhs_terms, rep.rhs_errors)):
        rows += [[k, side, _r(v.real), _r(v.imag), _r(errs[k])] for k, v in terms.items()]
    return rep.relative_deviation <= cfg.tolerance, rep.to_json(), rows


def run_scale(cfg: RunConfig):
    tf = cfg.test_function()
    reports = [summation.scaling_check(tf, a, threads=cfg.threads) for a in cfg["scale.a_list"]]
    rows = [["a", "side", "term_label", "real", "imag"]]
    for r in reports:
        for side, terms in (("lhs", r.lhs_terms), ("rhs", r.rhs_terms)):
            rows += [[str(r.a), side, k, _r(v.real), _r(v.imag)] for k, v in terms.items()]
    ok = all(r.relative_deviation <= cfg.tolerance for r in reports)
    return ok, {"reports": [r.to_json() for r in reports]}, rows


def run_count(cfg: RunConfig):
    tf = summation.counting_function(cfg.family)
    B = sorted(cfg["count.B_list"])
    crows = summation.count_asymptotics(tf, B, threads=cfg.threads)
    ss = summation.singular_series_check(tf)
    rows = [["B", "count", "main_term", "ratio", "expansion_deviation", "radius"]]
    rows += [[_r(r.B), _r(r.count.real), _r(r.main.real), _r(r.ratio), _r(r.expansion_deviation), r.radius]
             for r in crows]
    ratio_ok = abs(crows[-1].ratio - 1) <= cfg["count.ratio_tolerance"]
    ss_ok = ss.relative_deviation <= cfg.tolerance
    payload = {
        "rows": [{"B": r.B, "count": _cx(r.count), "main": _cx(r.main), "ratio": r.ratio,
                  "expansion_deviation": r.expansion_deviation, "radius": r.radius} for r in crows],
        "singular_series": {"c_top": _cx(ss.c_top), "L_value": _cx(ss.L_value),
                            "density_product": ss.density_product,
                            "singular_integral": _cx(ss.singular_integral),
                            "relative_deviation": ss.relative_deviation},
        "ratio_ok": ratio_ok, "singular_series_ok": ss_ok,
    }
    return ratio_ok and ss_ok, payload, rows


def run_properties(cfg: RunConfig):
    from .properties import run_all

    results = run_all()
    tol = cfg["numeric.tolerance"]
    for r in results:
        if tol is not None and r.tolerance > 0:
            r.tolerance = tol
        print(r.line(), flush=True)
    rows = [["name", "deviation", "tolerance", "passed"]]
    rows += [[r.name, _r(r.deviation), _r(r.tolerance), str(r.passed)] for r in results]
    return all(r.passed for r in results), {"results": [r.to_json() for r in results]}, rows


def run_theta(cfg: RunConfig):
    rep = summation.theta_truncation_experiment(cfg.test_function(), cfg["theta.T_list"], threads=cfg.threads)
    rows = [["T", "integral"]] + [[_r(T), _r(v)] for T, v in zip(rep.T_list, rep.integrals)]
    ok = rep.relative_deviation <= cfg.tolerance
    return ok, rep.to_json(), rows


def run_densities(cfg: RunConfig):
    table = density_table(cfg.family, cfg["densities.primes"], cfg["densities.kmax"])
    rows = [["p", "k", "count", "normalized_density"]]
    rows += [[r.p, r.k, r.count, str(r.normalized)] for r in table]
    payload = {"rows": [{"p": r.p, "k": r.k, "count": r.count, "normalized": str(r.normalized)} for r in table]}
    return True, payload, rows


RUNNERS: Dict[str, Callable] = {
    "verify": run_verify, "scale": run_scale, "count": run_count,
    "properties": run_properties, "theta": run_theta, "densities": run_densities,
}


def run(cfg: RunConfig) -> int:
    out = Path(cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / f"{cfg.experiment}.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    pkg_log = logging.getLogger("quadsum")
    pkg_log.addHandler(handler)
    pkg_log.setLevel(logging.INFO)
    try:
        log.info("settings: %s", json.dumps(cfg.to_json()["settings"]))
        log.info("numeric defaults: tail_rtol=%g max_radius=%d batch=%d",
                 summation.TAIL_RTOL, summation.MAX_RADIUS, summation.BATCH)
        t0 = time.perf_counter()
        try:
            ok, payload, rows = RUNNERS[cfg.experiment](cfg)
        except (RuntimeError, MemoryError) as e:
            log.error("resource guard: %s", e)
            print(f"resource guard: {e}", file=sys.stderr)
            return EXIT_RESOURCE
        elapsed = time.perf_counter() - t0
        report = {**cfg.to_json(), "numeric_defaults": {"tail_rtol": summation.TAIL_RTOL,
                                                        "max_radius": summation.MAX_RADIUS,
                                                        "batch": summation.BATCH},
                  "passed": ok, "runtime": elapsed, "result": payload}
        (out / f"{cfg.experiment}.json").write_text(json.dumps(report, indent=2, default=str) + "\n")
        with open(out / f"{cfg.experiment}.csv", "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        log.info("%s finished in %.1f s, passed=%s", cfg.experiment, elapsed, ok)
        print(f"{cfg.experiment}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s), reports in {out}")
        return EXIT_OK if ok else EXIT_TOLERANCE
    finally:
        pkg_log.removeHandler(handler)
        handler.close()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadsum", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog="config keys:\n" + "\n".join(
                                    f"  {k} (default {entry[1]!r}): {entry[2]}" for k, entry in SCHEMA.items()))
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--threads", metavar="N")
    p.add_argument("--strict-sequential", action="store_true", default=None)
    p.add_argument("--tolerance", metavar="X")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for flag, key in FLAG_KEYS.items():
        v = getattr(args, flag)
        if key and v is not None:
            overrides[key] = "true" if v is True else str(v)
    try:
        cfg = load_config(args.experiment, args.config, overrides)
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_SCHEMA
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
