"""Command-line front end.

    yamabe-spectra analyze  CONFIG [--out PATH] [--threads N]
    yamabe-spectra profile  CONFIG [--out PATH] [--format csv|json] [--threads N]
    yamabe-spectra witness  CONFIG [--out PATH] [--threads N]
    yamabe-spectra spectrum CATALOG [ARGS...] [--out PATH]

Exit codes: 0 success, 1 usage/config error, 2 certified incompleteness
(insufficient truncation, or a degenerate pair), 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .equivariant import classify, hf_necessary_check
from .errors import (
    DegeneratePairError,
    InvariantViolation,
    ModelError,
    SpectrumFormatError,
    TruncationError,
)
from .morse import morse_profile
from .product import (
    build_model,
    degeneracy_instants,
    instant_sequences,
    is_pair_degenerate,
    neutral_fixture,
)
from .spectra import (
    Boundary,
    FactorSpectrum,
    format_rational,
    hemisphere_neumann_spectrum,
    interval_neumann_spectrum,
    load_spectrum,
    parse_rational,
    serialize_spectrum,
    sphere_spectrum,
)
from . import witness as wit

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATION, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- configuration -----------------------------------------------------------


def catalog_spectrum(name: str, args: list) -> FactorSpectrum:
    """Resolve a catalog name and its integer arguments to a spectrum."""
    try:
        ints = [int(a) for a in args]
    except (TypeError, ValueError):
        raise ConfigError(f"catalog arguments must be integers, got {args!r}") from None

    def arity(k):
        if len(ints) != k:
            raise ConfigError(f"catalog {name!r} takes {k} argument(s), got {len(ints)}")

    try:
        if name == "sphere":
            arity(2)
            return sphere_spectrum(*ints)
        if name == "interval":
            arity(1)
            return interval_neumann_spectrum(*ints)
        if name == "hemisphere":
            arity(1)
            return hemisphere_neumann_spectrum(*ints)
        if name in ("neutral-closed", "neutral-neumann"):
            if len(ints) > 1:
                raise ConfigError(f"catalog {name!r} takes an optional truncation bound")
            model = neutral_fixture(None, *ints)
            return model.factor1 if name == "neutral-closed" else model.factor2
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown catalog {name!r}")


_CATALOG_ARGS = {
    "sphere": ("n", "k_max"),
    "interval": ("k_max",),
    "hemisphere": ("k_max",),
    "neutral-closed": (),
    "neutral-neumann": (),
}


def _factor_from_config(entry: Any, base: Path, which: str) -> FactorSpectrum:
    if not isinstance(entry, dict):
        raise ConfigError(f"{which} must be an object with 'catalog' or 'file'")
    if "file" in entry:
        path = base / entry["file"]
        if not path.is_file():
            raise ConfigError(f"{which}: spectrum file {str(path)!r} does not exist")
        try:
            spectrum = load_spectrum(path.read_bytes())
        except SpectrumFormatError as exc:
            raise ConfigError(f"{which}: {path}: {exc}") from None
    elif "catalog" in entry:
        name = entry["catalog"]
        if name not in _CATALOG_ARGS:
            raise ConfigError(f"{which}: unknown catalog {name!r}")
        args = [entry[k] for k in _CATALOG_ARGS[name] if k in entry]
        if name.startswith("neutral") and "truncation_bound" in entry:
            args = [entry["truncation_bound"]]
        spectrum = catalog_spectrum(name, args)
    else:
        raise ConfigError(f"{which} needs 'catalog' or 'file'")
    if "harmonically_free" in entry:
        flag = entry["harmonically_free"]
        if flag not in (True, False, None):
            raise ConfigError(f"{which}: harmonically_free must be true, false or null")
        spectrum = spectrum.replace(harmonically_free=flag)
    return spectrum


@dataclass(frozen=True)
class WitnessOptions:
    grid1: int = 64
    grid2: int = 65
    c1: Fraction = Fraction(1, 2)
    c2: Fraction = Fraction(0)
    s_range: tuple[Fraction, Fraction] = (Fraction(1), Fraction(4))
    samples: int = 31
    rtol: float = 1e-6
    m: int = 4
    newton: bool = False
    newton_epsilon: float = 1e-2
    newton_offset: float = 1e-2


@dataclass(frozen=True)
class AnalysisConfig:
    factor1: FactorSpectrum
    factor2: FactorSpectrum
    window: tuple[Fraction, Fraction]
    sequence_count: int
    witness: Optional[WitnessOptions]
    raw: dict = field(compare=False)


def _rational(value, what):
    try:
        return parse_rational(value)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _window(value, what):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{what} must be a two-element list")
    lo, hi = (_rational(v, what) for v in value)
    if not (0 < lo < hi):
        raise ConfigError(f"{what} must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    return lo, hi


def _witness_options(entry) -> WitnessOptions:
    if not isinstance(entry, dict):
        raise ConfigError("witness must be an object")
    known = set(WitnessOptions.__dataclass_fields__)
    unknown = set(entry) - known
    if unknown:
        raise ConfigError(f"unknown witness option(s): {sorted(unknown)}")
    opts = dict(entry)
    for key in ("c1", "c2"):
        if key in opts:
            opts[key] = _rational(opts[key], f"witness.{key}")
    if "s_range" in opts:
        opts["s_range"] = _window(opts["s_range"], "witness.s_range")
    for key in ("grid1", "grid2", "samples", "m"):
        if key in opts and (not isinstance(opts[key], int) or opts[key] < 1):
            raise ConfigError(f"witness.{key} must be a positive integer")
    return WitnessOptions(**opts)


def parse_config(text: str, base: Path = Path(".")) -> AnalysisConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("factor1", "factor2", "window"):
        if key not in raw:
            raise ConfigError(f"config is missing {key!r}")
    count = raw.get("sequence_count", 3)
    if not isinstance(count, int) or count < 0:
        raise ConfigError("sequence_count must be a non-negative integer")
    return AnalysisConfig(
        factor1=_factor_from_config(raw["factor1"], base, "factor1"),
        factor2=_factor_from_config(raw["factor2"], base, "factor2"),
        window=_window(raw["window"], "window"),
        sequence_count=count,
        witness=_witness_options(raw["witness"]) if "witness" in raw else None,
        raw=raw,
    )


def load_config(path) -> AnalysisConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} does not exist")
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


# -- report ------------------------------------------------------------------


def _q(x: Fraction) -> str:
    return format_rational(x)


def _float(x) -> float:
    return float(np.float64(x))


@dataclass
class AnalysisReport:
    """JSON-compatible report; exact values are rendered as "p/q" strings."""

    tool: dict
    config: dict
    model: dict
    instants: list = field(default_factory=list)
    morse_profile: Optional[dict] = None
    sequences: Optional[dict] = None
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"tool": self.tool, "config": self.config, "model": self.model, "instants": self.instants}
        for key in ("morse_profile", "sequences", "witness"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(
            tool=data["tool"],
            config=data["config"],
            model=data["model"],
            instants=data.get("instants", []),
            morse_profile=data.get("morse_profile"),
            sequences=data.get("sequences"),
            witness=data.get("witness"),
        )

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _factor_summary(f: FactorSpectrum) -> dict:
    out = {
        "name": f.name,
        "dimension": f.dimension,
        "scalar_curvature": _q(f.scalar_curvature),
        "boundary": f.boundary.value,
        "truncation_bound": _q(f.truncation_bound),
        "entries": len(f.entries),
        "harmonically_free": f.harmonically_free,
    }
    if f.boundary is Boundary.CLOSED:
        check = hf_necessary_check(f)
        out["distinct_multiplicities"] = check.passed
    return out


def _signature_dict(sig) -> list:
    return [{"label": t.label, "coefficient": t.coefficient, "dimension": t.dimension} for t in sig.terms]


def _instant_dict(instant, cls_) -> dict:
    return {
        "s_star": _q(instant.s_star),
        "vanishing": [
            {"i": b.i, "j": b.j, "A": _q(b.A), "B": _q(b.B), "multiplicity": b.multiplicity,
             "direction": "increasing" if b.B < 0 else "decreasing"}
            for b in instant.vanishing
        ],
        "classification": {
            "kind": cls_.kind.value,
            "jump": cls_.jump,
            "incoming": _signature_dict(cls_.incoming),
            "outgoing": _signature_dict(cls_.outgoing),
            "signatures_equal": cls_.signatures_equal,
        },
    }


def _profile_dict(profile) -> dict:
    return {
        "window": [_q(profile.window[0]), _q(profile.window[1])],
        "breakpoints": [_q(b) for b in profile.breakpoints],
        "values": list(profile.values),
    }


def _threads(n: int) -> int:
    return (os.cpu_count() or 1) if n == 0 else max(1, n)


def _tool() -> dict:
    return {"name": "yamabe-spectra", "version": __version__}


def _model_section(config: AnalysisConfig):
    model = build_model(config.factor1, config.factor2)
    verdict = is_pair_degenerate(model)
    section = {
        "m": model.m,
        "c1": _q(model.c1),
        "c2": _q(model.c2),
        "factor1": _factor_summary(model.factor1),
        "factor2": _factor_summary(model.factor2),
        "pair_degenerate": verdict.degenerate,
        "degenerate_witness": list(verdict.witness) if verdict.witness else None,
    }
    if verdict.degenerate:
        raise DegeneratePairError(
            f"degenerate pair of metrics: c1 = {model.c1} and c2 = {model.c2} are eigenvalues "
            f"of their factors (labels {verdict.witness}), so J_s is singular for every s"
        )
    return model, section


def cmd_analyze(config: AnalysisConfig, threads: int = 1) -> AnalysisReport:
    model, section = _model_section(config)
    window = config.window
    instants = degeneracy_instants(model, window)
    profile = morse_profile(model, window)
    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        classes = list(pool.map(lambda d: classify(model, d, window), instants))
    sequences = None
    if config.sequence_count:
        zero, infinity = instant_sequences(model, config.sequence_count)
        sequences = {"toward_zero": [_q(s) for s in zero], "toward_infinity": [_q(s) for s in infinity]}
    return AnalysisReport(
        tool=_tool(),
        config=config.raw,
        model=section,
        instants=[_instant_dict(d, c) for d, c in zip(instants, classes)],
        morse_profile=_profile_dict(profile),
        sequences=sequences,
    )


def cmd_profile(config: AnalysisConfig) -> list[tuple[Fraction, Fraction, int]]:
    model, _ = _model_section(config)
    return morse_profile(model, config.window).intervals()


def profile_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s_lo", "s_hi", "morse_index"])
    for a, b, v in rows:
        writer.writerow([_q(a), _q(b), v])
    return buf.getvalue()


def _crossing_dict(c) -> dict:
    return {
        "s_estimate": _float(c.s_estimate),
        "bracket": [_float(c.bracket[0]), _float(c.bracket[1])],
        "kind": c.kind,
        "analytic": _q(c.analytic) if c.analytic is not None else None,
        "deviation": _float(c.deviation) if c.deviation is not None else None,
    }


def cmd_witness(opts: WitnessOptions, threads: int = 1) -> dict:
    g1 = wit.Grid1D(opts.grid1, wit.Topology.PERIODIC)
    g2 = wit.Grid1D(opts.grid2, wit.Topology.NEUMANN_INTERVAL)
    analytic = wit.analytic_instants(opts.c1, opts.c2, opts.s_range)
    crossings = wit.crossing_scan(
        g1, g2, float(opts.c1), float(opts.c2),
        (float(opts.s_range[0]), float(opts.s_range[1])), opts.samples,
        analytic=analytic, rtol=opts.rtol,
    )

    # residual checks on the discrete Laplacian at the middle of the range
    s_mid = float(opts.s_range[0] + opts.s_range[1]) / 2
    family = wit.WitnessFamily(g1, g2, float(opts.c1), float(opts.c2), opts.m)
    op = family.laplacian(s_mid)
    params = wit.YamabeParams(opts.m, 1.0, 1.0)
    ones = np.ones(op.dimension)
    phi = np.kron(np.cos(g1.nodes), np.cos(g2.nodes))
    jac = wit.yamabe_linearization(ones, params, op)
    base = wit.yamabe_residual_vector(ones, params, op)

    def remainder(eps):
        return op.norm(wit.yamabe_residual_vector(ones + eps * phi, params, op) - base - eps * (jac @ phi))

    residuals = {
        "s": _float(s_mid),
        "constant_solution": _float(wit.yamabe_residual(ones, params, op)),
        "taylor_remainder_ratio": _float(remainder(1e-2) / remainder(5e-3)),
    }

    section = {
        "grid1": {"points": g1.points, "topology": g1.topology.value},
        "grid2": {"points": g2.points, "topology": g2.topology.value},
        "c1": _q(opts.c1),
        "c2": _q(opts.c2),
        "s_range": [_q(opts.s_range[0]), _q(opts.s_range[1])],
        "samples": opts.samples,
        "analytic_instants": [_q(a) for a in analytic],
        "crossings": [_crossing_dict(c) for c in crossings],
        "residual_checks": residuals,
    }
    if opts.newton:
        def probe(c):
            r = wit.newton_branch_probe(
                family, c.s_estimate, epsilon=opts.newton_epsilon, offset=opts.newton_offset
            )
            return {
                "s": _float(r.s), "epsilon": _float(r.epsilon), "converged": bool(r.converged),
                "iterations": r.iterations, "residual": _float(r.residual),
                "non_constancy": _float(r.non_constancy), "label": r.label,
            }

        with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
            section["newton_probes"] = list(pool.map(probe, crossings))
    return section


# -- entry point -------------------------------------------------------------


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yamabe-spectra", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=True):
        p.add_argument("--out", help="write output here instead of stdout")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")

    p = sub.add_parser("analyze", help="instants, classifications and Morse profile as JSON")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("profile", help="Morse-index staircase")
    p.add_argument("config")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    common(p)
    p = sub.add_parser("witness", help="numerical crossing and residual checks")
    p.add_argument("config")
    common(p)
    p = sub.add_parser("spectrum", help="print a catalog spectrum in the spectrum file format")
    p.add_argument("catalog")
    p.add_argument("args", nargs="*")
    common(p, threads=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(ns, "threads", 0) < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if ns.command == "spectrum":
            _emit(serialize_spectrum(catalog_spectrum(ns.catalog, ns.args)), ns.out)
            return EXIT_OK
        config = load_config(ns.config)
        if ns.command == "analyze":
            report = cmd_analyze(config, ns.threads)
            if config.witness is not None:
                report.witness = cmd_witness(config.witness, ns.threads)
            _emit(report.to_json(), ns.out)
        elif ns.command == "profile":
            rows = cmd_profile(config)
            if ns.format == "csv":
                _emit(profile_csv(rows), ns.out)
            else:
                data = [{"s_lo": _q(a), "s_hi": _q(b), "morse_index": v} for a, b, v in rows]
                _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", ns.out)
        elif ns.command == "witness":
            if config.witness is None:
                raise ConfigError("config has no 'witness' section")
            section = cmd_witness(config.witness, ns.threads)
            _emit(json.dumps({"tool": _tool(), "witness": section}, indent=2, sort_keys=True) + "\n", ns.out)
        return EXIT_OK
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, DegeneratePairError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
