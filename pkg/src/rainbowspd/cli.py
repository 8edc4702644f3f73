"""Command-line front end: price tables, density recovery, validation runs.

One JSON config document drives a run; the only overrides are the output
directory, the seed descriptor, and the thread count, so a (config, seed)
pair pins every output byte.  Exit codes are a stable contract:

    0  success
    2  configuration error (the diagnostic names the offending field)
    3  numerical failure
    4  recovery requested on a law without a density
    5  validation checks failed
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__, validation
from .errors import (
    ConfigError,
    DimensionMismatch,
    DimensionNotTwo,
    MonteCarloUnsupported,
    NonFiniteEvaluation,
    NoStabilization,
    NotAbsolutelyContinuous,
    QuadratureUnavailable,
    RainbowError,
    StencilOutOfDomain,
)
from .fdiff import DiffSpec, LimitSpec
from .models import law_from_dict, load_law
from .payoffs import INFINITY, StrikeSpec
from .pricers import PricerConfig, price
from .recovery import (
    make_grid_axes,
    recover_density_cdf,
    recover_density_cp,
    recover_density_main,
    recover_density_n2_alternative,
)

_NUMERICAL_ERRORS = (
    NonFiniteEvaluation,
    NoStabilization,
    StencilOutOfDomain,
    QuadratureUnavailable,
    MonteCarloUnsupported,
    DimensionNotTwo,
    DimensionMismatch,
)


def _canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _parse_p(value, field):
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return INFINITY
        raise ConfigError(field, f"cannot parse exponent {value!r}")
    p = float(value)
    if p <= 0.0:
        raise ConfigError(field, "exponent must be positive")
    return p


def _format_p(p) -> str:
    return "inf" if p == INFINITY else f"{p:g}"


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError("config", "top-level document must be an object")
    return doc


class RunConfig:
    """Config document resolved against CLI overrides, plus derived objects."""

    def __init__(self, doc: dict, config_dir: str, out=None, seed=None, threads=None):
        law_entry = doc.get("law")
        if law_entry is None:
            raise ConfigError("law", "missing law file path or inline document")
        if isinstance(law_entry, str):
            law_path = os.path.join(config_dir, law_entry)
            if not os.path.exists(law_path):
                raise ConfigError("law", f"law file does not exist: {law_path}")
            self.law = load_law(law_path)
        else:
            self.law = law_from_dict(law_entry)

        self.seed = str(seed if seed is not None else doc.get("seed", "default"))
        self.output_dir = str(out if out is not None else doc.get("output_dir", "out"))
        threads = threads if threads is not None else doc.get("threads", "auto")
        if threads != "auto":
            try:
                threads = int(threads)
            except (TypeError, ValueError):
                raise ConfigError("threads", f"expected integer or 'auto', got {threads!r}")
            if threads < 1:
                raise ConfigError("threads", "thread count must be >= 1")
        self.threads = threads

        pricer_doc = dict(doc.get("pricer", {}))
        pricer_doc.setdefault("seed_descriptor", self.seed)
        try:
            self.pricer = PricerConfig(**pricer_doc)
        except TypeError as exc:
            raise ConfigError("pricer", f"unknown field ({exc})")
        except ValueError as exc:
            raise ConfigError("pricer", str(exc))

        self.diff_doc = dict(doc.get("diff", {}))
        self.limit_doc = dict(doc.get("limit", {}))
        self.grid_axes = self._parse_grid(doc.get("grid"))
        self.price_doc = doc.get("price", {})
        self.recover_doc = doc.get("recover", {})
        self.validate_doc = doc.get("validate", {})

        resolved = dict(doc)
        resolved["law"] = self.law.to_dict()
        resolved["seed"] = self.seed
        resolved["threads"] = self.threads
        resolved.pop("output_dir", None)  # digest is location-independent
        self.digest = hashlib.sha256(_canonical_json(resolved).encode()).hexdigest()

    def _parse_grid(self, grid_doc):
        if grid_doc is None:
            return None
        for key in ("lo", "hi", "shape"):
            if key not in grid_doc:
                raise ConfigError(f"grid.{key}", "missing required field")
            if len(grid_doc[key]) != self.law.dimension:
                raise ConfigError(
                    f"grid.{key}",
                    f"has {len(grid_doc[key])} entries but the law has "
                    f"dimension {self.law.dimension}",
                )
        try:
            return make_grid_axes(grid_doc["lo"], grid_doc["hi"], grid_doc["shape"])
        except ValueError as exc:
            raise ConfigError("grid", str(exc))

    def diff_spec(self, axes) -> DiffSpec:
        frac = float(self.diff_doc.get("base_step_fraction", 0.01))
        levels = int(self.diff_doc.get("richardson_levels", 2))
        scale = np.array([max(abs(np.asarray(a)).max(), 1e-8) for a in axes])
        try:
            return DiffSpec(
                orders=(1,) * len(axes),
                base_step=tuple(frac * scale),
                richardson_levels=levels,
                stabilization_tol=float(self.diff_doc.get("stabilization_tol", 1e-4)),
            )
        except ValueError as exc:
            raise ConfigError("diff", str(exc))

    def limit_spec(self, axes) -> LimitSpec:
        scale = float(np.mean([np.abs(np.asarray(a)).mean() for a in axes]))
        try:
            return LimitSpec.geometric(
                max(scale, 1e-8),
                first_fraction=float(self.limit_doc.get("first_fraction", 0.1)),
                ratio=float(self.limit_doc.get("ratio", 0.5)),
                count=int(self.limit_doc.get("count", 6)),
                extrapolation=self.limit_doc.get("extrapolation", "linear-in-k"),
            )
        except ValueError as exc:
            raise ConfigError("limit", str(exc))

    def ensure_outdir(self) -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        return self.output_dir


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows, digest):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*header, "config_digest", "tool_version"])
        for row in rows:
            writer.writerow([*(_cell(v) for v in row), digest, __version__])


def _write_json(path, doc, digest):
    payload = {"config_digest": digest, "tool_version": __version__, **doc}
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _price_rows(cfg: RunConfig):
    doc = cfg.price_doc
    if not doc:
        raise ConfigError("price", "missing price block")
    entries = []
    n = cfg.law.dimension
    for i, entry in enumerate(doc.get("strikes", [])):
        field = f"price.strikes[{i}]"
        kbar = entry.get("kbar")
        if kbar is None or len(kbar) != n:
            raise ConfigError(field, f"kbar must have {n} entries")
        entries.append(
            (
                [float(v) for v in kbar],
                float(entry.get("k", 0.0)),
                _parse_p(entry.get("p", 1), f"{field}.p"),
            )
        )
    grid_doc = doc.get("kbar_grid")
    if grid_doc is not None:
        for key in ("lo", "hi", "shape"):
            if key not in grid_doc or len(grid_doc[key]) != n:
                raise ConfigError(f"price.kbar_grid.{key}", f"must have {n} entries")
        axes = make_grid_axes(grid_doc["lo"], grid_doc["hi"], grid_doc["shape"])
        kout = float(grid_doc.get("k", 0.0))
        p_values = [
            _parse_p(v, "price.kbar_grid.p_values")
            for v in grid_doc.get("p_values", [1])
        ]
        mesh = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
        for kbar in mesh:
            for p in p_values:
                entries.append((kbar.tolist(), kout, p))
    if not entries:
        raise ConfigError("price.strikes", "no strikes requested")
    methods = doc.get("methods", [cfg.pricer.method])
    rows = []
    for kbar, kout, p in entries:
        for method in methods:
            try:
                pc = PricerConfig(
                    method=method,
                    nodes_per_dim=cfg.pricer.nodes_per_dim,
                    truncation_tail_mass=cfg.pricer.truncation_tail_mass,
                    mc_samples=cfg.pricer.mc_samples,
                    seed_descriptor=cfg.pricer.seed_descriptor,
                )
            except ValueError as exc:
                raise ConfigError("price.methods", str(exc))
            est = price(cfg.law, StrikeSpec(tuple(kbar), kout), p, pc)
            rows.append(
                [*kbar, kout, _format_p(p), est.value, est.error_bound, est.method]
            )
    return rows


def cmd_price(cfg: RunConfig) -> int:
    rows = _price_rows(cfg)
    outdir = cfg.ensure_outdir()
    n = cfg.law.dimension
    header = [f"K{i + 1}" for i in range(n)] + ["K", "p", "value", "error_bound", "method"]
    path = os.path.join(outdir, "price.csv")
    _write_csv(path, header, rows, cfg.digest)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_recover(cfg: RunConfig) -> int:
    doc = cfg.recover_doc
    formulas = doc.get("formulas")
    if not formulas:
        raise ConfigError("recover.formulas", "formula list must be non-empty")
    unknown = [f for f in formulas if f not in ("main", "cp", "cdf", "n2-alternative")]
    if unknown:
        raise ConfigError("recover.formulas", f"unknown formulas {unknown}")
    if cfg.grid_axes is None:
        raise ConfigError("grid", "recover requires a grid block")
    axes = cfg.grid_axes
    diff = cfg.diff_spec(axes)
    limit = cfg.limit_spec(axes)
    p_values = [
        _parse_p(v, "recover.p_values") for v in doc.get("p_values", [1])
    ]
    outdir = cfg.ensure_outdir()
    reports = {}
    for tag in formulas:
        if tag == "main":
            reports["main"] = recover_density_main(cfg.law, axes, cfg.pricer, diff)
        elif tag == "cdf":
            reports["cdf"] = recover_density_cdf(cfg.law, axes, cfg.pricer, diff)
        elif tag == "n2-alternative":
            reports["n2-alternative"] = recover_density_n2_alternative(
                cfg.law, axes, cfg.pricer, diff, limit
            )
        elif tag == "cp":
            for p in p_values:
                reports[f"cp_p{_format_p(p)}"] = recover_density_cp(
                    cfg.law, axes, p, cfg.pricer, diff, limit
                )
    summary = {}
    n = cfg.law.dimension
    grid_header = [f"K{i + 1}" for i in range(n)] + [
        "recovered", "analytic", "error", "formula_tag"
    ]
    for label, rep in reports.items():
        slug = label.replace("(", "_").replace(")", "")
        _write_json(os.path.join(outdir, f"report_{slug}.json"), rep.to_dict(), cfg.digest)
        _write_csv(
            os.path.join(outdir, f"grid_{slug}.csv"), grid_header, rep.csv_rows(), cfg.digest
        )
        summary[label] = {
            "oracle_linf": rep.oracle_comparison["linf"],
            "oracle_l1": rep.oracle_comparison["l1"],
            "mass": rep.mass,
            "negativity": rep.density_grid.negativity_report,
        }
    if "cdf" in reports:
        ref = reports["cdf"].density_grid.values
        for label, rep in reports.items():
            if label != "cdf":
                summary[label]["gap_vs_cdf"] = float(
                    np.max(np.abs(rep.density_grid.values - ref))
                )
    _write_json(os.path.join(outdir, "summary.json"), {"formulas": summary}, cfg.digest)
    for label, info in summary.items():
        print(
            f"{label}: oracle L-inf {info['oracle_linf']:.3e}, "
            f"L1 {info['oracle_l1']:.3e}, mass {info['mass']:.4f}"
        )
    print(f"wrote {len(reports)} reports to {outdir}")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    doc = cfg.validate_doc
    names = doc.get("checks", list(validation.CHECK_NAMES))
    tolerances = doc.get("tolerances", {})
    unknown_tols = [k for k in tolerances if k not in validation.DEFAULT_TOLERANCES]
    if unknown_tols:
        raise ConfigError("validate.tolerances", f"unknown tolerance keys {unknown_tols}")
    axes = cfg.grid_axes
    ctx = validation.build_context(
        cfg.law,
        cfg.pricer,
        cfg.seed,
        grid_axes=axes,
        formulas=cfg.recover_doc.get("formulas"),
        p_values=[_parse_p(v, "recover.p_values") for v in cfg.recover_doc.get("p_values", [1, "inf"])],
        diff=cfg.diff_spec(axes) if axes is not None else None,
        limit=cfg.limit_spec(axes) if axes is not None else None,
        tolerances=tolerances,
    )
    try:
        results = validation.run_checks(ctx, names)
    except ValueError as exc:
        raise ConfigError("validate.checks", str(exc))
    outdir = cfg.ensure_outdir()
    failed = [r["name"] for r in results if r["status"] == "fail"]
    _write_json(
        os.path.join(outdir, "validation.json"),
        {"checks": results, "failed": failed, "passed": not failed},
        cfg.digest,
    )
    for r in results:
        line = f"{r['status'].upper():5s} {r['name']}"
        if "measured" in r and r.get("tolerance") is not None:
            line += f" (measured {r['measured']:.3e}, tolerance {r['tolerance']:.3e})"
        elif "measured" in r:
            line += f" (measured {r['measured']:.3e})"
        if r["status"] == "skip":
            line += f" [{r.get('reason', '')}]"
        print(line)
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 5
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rainbowspd",
        description="State-price density recovery from rainbow option prices",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("price", "price a strike table and write a CSV"),
        ("recover", "recover density grids for the requested formulas"),
        ("validate", "run the named validation checks"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", default=None, help="seed descriptor override")
        p.add_argument("--threads", default=None, help="thread count or 'auto'")
    args = parser.parse_args(argv)

    try:
        doc = _load_config(args.config)
        cfg = RunConfig(
            doc,
            os.path.dirname(os.path.abspath(args.config)),
            out=args.out,
            seed=args.seed,
            threads=args.threads,
        )
        if args.command == "price":
            return cmd_price(cfg)
        if args.command == "recover":
            return cmd_recover(cfg)
        return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NotAbsolutelyContinuous as exc:
        print(f"law is not absolutely continuous: {exc}", file=sys.stderr)
        return 4
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except RainbowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
