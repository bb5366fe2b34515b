"""Command-line interface.

Subcommands: simulate, solve, forecast, acf, uncond, fit, fit-regime,
fit-biv, breaks.  Every artifact is CSV or JSON with a metadata header
(package version, seed, config hash).  Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, backend, io, mean, qml, variance
from . import bivariate as biv
from . import breaks as brk
from . import montecarlo as sim
from .errors import DataError, DivergenceError, FilterError, FitError, SpecError
from .params import TvArSpec, TvGarchSpec

_COMMANDS = ("simulate", "solve", "forecast", "acf", "uncond", "fit",
             "fit-regime", "fit-biv", "breaks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abgarch",
        description="Break AR-AGARCH toolkit: closed forms, simulation, "
                    "estimation, and break detection.")
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("--config", help="key-value configuration file")
    parser.add_argument("--input", help="input price CSV")
    parser.add_argument("--output-dir", default=".", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configured seed")
    parser.add_argument("--dates", default=None,
                        help="breakdate override file (one ISO date per line)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="preferred artifact format where both apply")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _dispatch(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (DivergenceError, FitError, FilterError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    config = io.load_config(args.config) if args.config else io.RunConfig({})
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": __version__,
        "command": args.command,
        "seed": seed,
        "config-hash": io.config_hash(config),
        "backend": backend.BACKEND,
    }
    handler = {
        "simulate": _cmd_simulate,
        "solve": _cmd_solve,
        "forecast": _cmd_forecast,
        "acf": _cmd_acf,
        "uncond": _cmd_uncond,
        "fit": _cmd_fit,
        "fit-regime": _cmd_fit,
        "fit-biv": _cmd_fit_biv,
        "breaks": _cmd_breaks,
    }[args.command]
    return handler(args, config, seed, outdir, meta)


def _ar_spec(config: io.RunConfig) -> TvArSpec:
    breaks = config.get("ar.breaks", ())
    n = len(breaks) + 1
    drift = config.get("ar.drift", 0.0)
    phi1 = config.require("ar.phi1") if "ar.phi1" in config.values else 0.0
    phi2 = config.get("ar.phi2", 0.0)
    return TvArSpec.from_lists(breaks, _fill(drift, n), _fill(phi1, n),
                               _fill(phi2, n), config.get("horizon"))


def _garch_spec(config: io.RunConfig) -> TvGarchSpec:
    breaks = config.get("garch.breaks", ())
    n = len(breaks) + 1
    return TvGarchSpec.from_lists(
        breaks,
        _fill(config.require("garch.omega"), n),
        _fill(config.get("garch.alpha", 0.0), n),
        _fill(config.get("garch.gamma", 0.0), n),
        _fill(config.get("garch.beta", 0.0), n),
        config.get("horizon"))


def _fill(value, n: int):
    if np.isscalar(value):
        return [float(value)] * n
    if len(value) == 1:
        return [float(value[0])] * n
    return list(value)


def _shock(config: io.RunConfig):
    dist = config.get("shock.dist", "normal")
    if dist == "normal":
        return sim.ShockMoments.gaussian(), dist, 0.0
    if dist == "student_t":
        df = config.require("shock.df")
        return sim.ShockMoments.student_t(df), dist, df
    raise SpecError("shock.dist must be 'normal' or 'student_t'")


def _cmd_simulate(args, config, seed, outdir, meta) -> int:
    _, dist, df = _shock(config)
    cfg = sim.SimConfig(ar=_ar_spec(config), garch=_garch_spec(config),
                        length=config.require("sim.length"),
                        paths=config.get("sim.paths", 1),
                        burn_in=config.get("sim.burnin", 200),
                        distribution=dist, df=df or 8.0, seed=seed)
    out = sim.simulate(cfg)
    n, T = out.y.shape
    path_id = np.repeat(np.arange(n), T)
    offsets = np.tile(np.arange(T - 1, -1, -1), n)
    io.emit_csv(outdir / "simulate.csv",
                {"path": path_id, "offset": offsets,
                 "y": out.y.ravel(), "h": out.h.ravel(),
                 "eps": out.eps.ravel(), "v": out.v.ravel()},
                meta)
    print(f"wrote {outdir / 'simulate.csv'} ({n} paths x {T} steps)")
    return 0


def _cmd_solve(args, config, seed, outdir, meta) -> int:
    count = config.get("solve.count", 50)
    ks = np.arange(count + 1)
    cols = {"k": ks}
    try:
        cols["ar_weight"] = mean.impulse_weights(_ar_spec(config), count)
    except SpecError:
        pass
    if "garch.omega" in config.values:
        cols["garch_weight"] = variance.persistence_products_expected(
            _garch_spec(config), count)
    if len(cols) == 1:
        raise SpecError("solve needs an AR and/or GARCH specification")
    io.emit_csv(outdir / "solve.csv", cols, meta)
    print(f"wrote {outdir / 'solve.csv'}")
    return 0


def _cmd_forecast(args, config, seed, outdir, meta) -> int:
    horizon = config.require("forecast.horizon")
    arspec = _ar_spec(config)
    gspec = _garch_spec(config)
    shock, _, _ = _shock(config)
    y_start = config.get("forecast.y-start", (0.0, 0.0))
    if len(y_start) != 2:
        raise SpecError("forecast.y-start needs two values (newest first)")
    h_start = config.get("forecast.h-start")
    if h_start is None:
        h_start = variance.unconditional_variance(gspec, 0)
    rows = {"horizon": [], "mean_forecast": [], "mean_mse": [],
            "var_forecast": [], "var_mse": []}
    hs_path = variance.h_second_moment_path(
        gspec, shock, np.arange(-horizon, 1))
    for j in range(1, horizon + 1):
        rows["horizon"].append(j)
        rows["mean_forecast"].append(
            mean.predict_mean(arspec, j, y_start, ref_offset=-j))
        sig = [variance.unconditional_variance(gspec, -j + r)
               for r in range(j - 1, -1, -1)]
        rows["mean_mse"].append(
            mean.forecast_error_variance(arspec, j, sig, ref_offset=-j))
        rows["var_forecast"].append(
            variance.predict_variance(gspec, j, h_start, ref_offset=-j))
        hs = [float(hs_path.h_second[hs_path.offsets == (-j + r)])
              for r in range(j, 0, -1)]
        rows["var_mse"].append(
            variance.variance_mse(gspec, j, hs, shock))
    io.emit_csv(outdir / "forecast.csv", rows, meta)
    print(f"wrote {outdir / 'forecast.csv'}")
    return 0


def _acf_error_vars(config, gspec):
    if gspec is not None:
        return lambda off: variance.unconditional_variance(gspec, off)
    return float(config.get("ar.sigma2", 1.0))


def _cmd_acf(args, config, seed, outdir, meta) -> int:
    arspec = _ar_spec(config)
    gspec = _garch_spec(config) if "garch.omega" in config.values else None
    lag = config.get("acf.lag", 1)
    offsets = config.require("acf.offsets")
    sig = _acf_error_vars(config, gspec)
    values = [mean.autocorrelation(arspec, sig, lag, ref_offset=int(i))
              for i in offsets]
    io.emit_csv(outdir / "acf.csv",
                {"offset": np.asarray(offsets), "acr": np.asarray(values)},
                {**meta, "lag": lag})
    print(f"wrote {outdir / 'acf.csv'}")
    return 0


def _cmd_uncond(args, config, seed, outdir, meta) -> int:
    gspec = _garch_spec(config)
    offsets = config.require("uncond.offsets")
    path = variance.unconditional_variance_path(gspec, offsets)
    io.emit_csv(outdir / "uncond.csv",
                {"offset": path.offsets, "value": path.values},
                {**meta, "past-limit": io.format_number(path.past_limit),
                 "future-limit": io.format_number(path.future_limit)})
    print(f"wrote {outdir / 'uncond.csv'}")
    return 0


def _load_returns(args, config) -> io.PriceSeries:
    if not args.input:
        raise SpecError("this command needs --input")
    return io.ingest(args.input,
                     date_col=config.get("input.date-col", "date"),
                     price_col=config.get("input.price-col", "price"))


def _break_indices(args, config, series: io.PriceSeries):
    """Break observation indices; --dates overrides the config list."""
    if args.dates:
        dates = io.read_dates_file(args.dates)
    else:
        dates = tuple(io._parse_date(d, "fit.breaks")
                      for d in config.get("fit.breaks", ()))
    # returns are indexed from the second price observation
    return tuple(max(series.index_of_date(d) - 1, 1) for d in dates)


def _cmd_fit(args, config, seed, outdir, meta) -> int:
    series = _load_returns(args, config)
    if args.command == "fit-regime":
        spec = qml.UnivariateModelSpec(
            mean_lags=config.get("fit.mean-lags", 0),
            variance="sign", asymmetry=False)
    else:
        idx = _break_indices(args, config, series)
        if idx:
            free = tuple(tuple(f.split(":")) for f in config.get("fit.free", ())) \
                or ()
            spec = qml.UnivariateModelSpec(
                mean_lags=config.get("fit.mean-lags", 0),
                variance="break", asymmetry=config.get("fit.asymmetry", True),
                break_indices=idx, free=free)
        else:
            spec = qml.UnivariateModelSpec(
                mean_lags=config.get("fit.mean-lags", 0),
                variance="gjr", asymmetry=config.get("fit.asymmetry", True))
    options = qml.FitOptions(seed=seed, prune=config.get("fit.prune", False),
                             restarts=config.get("fit.restarts", 4))
    result = qml.fit(series.returns, spec, options)
    out = outdir / f"{args.command}.json"
    io.emit_json(out, {"fit": _json_loads(result.to_json())}, meta)
    print(result.to_table())
    print(f"wrote {out}")
    return 0


def _cmd_fit_biv(args, config, seed, outdir, meta) -> int:
    if not args.input:
        raise SpecError("fit-biv needs --input")
    s1 = io.ingest(args.input, date_col=config.get("input.date-col", "date"),
                   price_col=config.get("input.price-col", "price"))
    s2 = io.ingest(args.input, date_col=config.get("input.date-col", "date"),
                   price_col=config.require("input.price-col2"))
    returns = np.column_stack([s1.returns, s2.returns])
    shifts = []
    for item in config.get("fitbiv.shifts", ()):
        entry, _, datestr = item.partition("@")
        date = io._parse_date(datestr, "fitbiv.shifts")
        shifts.append(biv.ShiftConfig(entry, max(s1.index_of_date(date) - 1, 1)))
    cfg = biv.BivariateFitConfig(
        mean_lags=config.get("fit.mean-lags", 2),
        asymmetry=config.get("fitbiv.asymmetry", True),
        spillovers=config.get("fitbiv.spillovers", True),
        shifts=tuple(shifts),
        sign_entries=tuple(config.get("fitbiv.sign-entries", ())),
        seed=seed)
    result = biv.fit_bivariate(returns, cfg)
    out = outdir / "fit-biv.json"
    io.emit_json(out, {"fit": _json_loads(result.to_json())}, meta)
    # correlation path for plotting, aligned to dates
    mu = np.asarray(result.mean["mu"])
    phi1 = np.asarray(result.mean["phi1"])
    phi2 = np.asarray(result.mean["phi2"])
    spec = biv.BivariateSpec(
        mu=mu, phi1=phi1, phi2=phi2,
        omega=[result.params["omega1"], result.params["omega2"]],
        alpha=[[result.params["a11"], max(result.params.get("a12", 0.0), 0.0)],
               [max(result.params.get("a21", 0.0), 0.0), result.params["a22"]]],
        gamma=[result.params.get("g1", 0.0), result.params.get("g2", 0.0)],
        beta=[[result.params["b11"], result.params.get("b12", 0.0)],
              [result.params.get("b21", 0.0), result.params["b22"]]],
        dcc_alpha=result.dcc["alpha_d"], dcc_beta=result.dcc["beta_d"],
        qbar=result.qbar)
    filt = biv.bivariate_filter(spec, returns, mean_lags=cfg.mean_lags)
    rho_dates = [d.isoformat() for d in s1.dates[1 + cfg.mean_lags:]]
    io.emit_csv(outdir / "fit-biv-rho.csv",
                {"date": np.asarray(rho_dates), "rho": filt.rho}, meta)
    print(result.to_table())
    print(f"wrote {out} and {outdir / 'fit-biv-rho.csv'}")
    return 0


def _cmd_breaks(args, config, seed, outdir, meta) -> int:
    series = _load_returns(args, config)
    result = brk.scan_variance_breaks(
        series.returns,
        min_segment=config.get("breaks.min-segment", 30),
        level=config.get("breaks.level", 0.05))
    detected_dates = [series.dates[i + 1].isoformat() for i in result.breaks]
    payload = {
        "detected": {
            "indices": list(result.breaks),
            "dates": detected_dates,
            "stats": list(result.stats),
            "pvalues": list(result.pvalues),
            "segments": [list(s) for s in result.segments],
            "segment_mean": list(result.segment_mean),
            "segment_variance": list(result.segment_variance),
        },
    }
    if args.dates:
        payload["override"] = [d.isoformat()
                               for d in io.read_dates_file(args.dates)]
        payload["note"] = "user-supplied dates take precedence downstream"
    io.emit_json(outdir / "breaks.json", payload, meta)
    if result.breaks:
        io.emit_csv(outdir / "breaks.csv",
                    {"index": np.asarray(result.breaks),
                     "date": np.asarray(detected_dates),
                     "stat": np.asarray(result.stats),
                     "pvalue": np.asarray(result.pvalues)}, meta)
    print(f"wrote {outdir / 'breaks.json'}"
          + (f" and {outdir / 'breaks.csv'}" if result.breaks else ""))
    return 0


def _json_loads(text: str):
    import json

    return json.loads(text)


if __name__ == "__main__":
    sys.exit(main())
