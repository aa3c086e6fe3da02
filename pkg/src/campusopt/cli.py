"""
campusopt command line.

Every subcommand reads its inputs, writes its outputs into ``--out-dir``
and leaves a ``manifest.json`` there recording input hashes, the effective
configuration, the seed and the wall time.

Exit codes: 0 success, 2 usage or parse error, 3 infeasible optimisation,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import bus_queue, bus_sched, carpark_opt, classroom, forecast, lpr_cleanse, markov_carpark
from .errors import InfeasibleError, NumericalError
from .files import (DataError, format_time, read_actuals, read_columns, read_lpr, read_pdu,
                    read_rates, read_rooms, read_scheme_table, read_timetable, read_rows, sha256,
                    write_json, write_table)

log = logging.getLogger("campusopt")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4
DEFAULT_SEED = 20190923

DEFAULTS = {
    "cleanse": {"dedup_lookahead": 5, "dedup_distance": 2, "ocr_threshold_entry": 75,
                "ocr_threshold_exit": 65, "match_distance": 2, "clusters": 3},
    "forecast": {"horizon_days": 5, "model": "ols", "tau": 0.75, "lag_days": 10,
                 "fourier_pairs": 2, "periods": [24.0, 120.0], "folds": 0, "test_days": 5},
    "forecast-attendance": {"tau": 0.75, "model": "quantile"},
    "simulate-carpark": {"tolerance": 1e-12},
    "scheme-table": {"capacity": carpark_opt.DEFAULT_TOTAL_CAPACITY, "rhos": list(carpark_opt.DEFAULT_RHOS),
                     "subscribers": 200, "p_in": 0.5, "p_out": 0.4, "diversion": 0.2,
                     "epoch_minutes": 5.0, "sample": False},
    "optimize-partition": {"W_SV": 15.8, "W_PV": 26.0, "M": 15.8, "R": 36468.75, "D": 5},
    "allocate-rooms": {"margin": 0.0, "spare_room": classroom.SPARE_ROOM_SEATS},
    "infer-queue": {"bin_minutes": 2.0, "detect_threshold": 0.2, "band_low": 200.0,
                    "band_high": 300.0, "persons_per_segment": 10, "sensors": 10,
                    "tie_break": "shorter"},
    "optimize-bus": {"population": 50, "max_generations": 1000, "stall_halt": 100,
                     "crossover_prob": 0.8, "mutation_prob": 0.2, "h_min": 1.0, "h_max": 60.0,
                     "smooth_window": 0, "buses": None, "capacity": None},
}


class _Run:
    def __init__(self, command, args, cfg):
        self.command = command
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.fmt = cfg.get("format", "csv")
        self.cfg = cfg
        self.inputs = []
        self.outputs = []
        self.t0 = time.perf_counter()

    def input(self, path):
        p = Path(path)
        if not p.is_file():
            raise DataError(f"input file not found: {p}")
        self.inputs.append({"path": str(p), "sha256": sha256(p)})
        return p

    def table(self, name, header, rows):
        self.outputs.append(str(write_table(self.out_dir / name, header, rows, self.fmt)))

    def json(self, name, obj):
        self.outputs.append(str(write_json(self.out_dir / name, obj)))

    def finish(self):
        manifest = {
            "command": self.command,
            "inputs": self.inputs,
            "config": self.cfg,
            "seed": self.cfg.get("seed"),
            "outputs": self.outputs,
            "duration_ms": int(round((time.perf_counter() - self.t0) * 1000)),
        }
        write_json(self.out_dir / "manifest.json", manifest)


def _pct(removed, total):
    return round(100.0 * removed / total, 4) if total else 0.0


def cmd_cleanse(run: _Run, args, cfg):
    records = read_lpr(run.input(args.input))
    cc = lpr_cleanse.CleanseConfig(cfg["dedup_lookahead"], cfg["dedup_distance"],
                                   cfg["ocr_threshold_entry"], cfg["ocr_threshold_exit"],
                                   cfg["match_distance"])
    report, cleaned = {}, {}
    for direction in lpr_cleanse.Direction:
        recs = sorted((r for r in records if r.direction is direction), key=lambda r: r.timestamp)
        n = len(recs)
        kept, dropped = lpr_cleanse.dedup_partition(recs, cc)
        low = [r for r in kept if r.usable and r.ocr_score < cc.threshold_for(direction)]
        not_read = [r for r in kept if not r.usable]
        final = lpr_cleanse.filter_low_ocr(kept, cc.threshold_for(direction))
        cleaned[direction] = final
        report[direction.value.lower()] = {
            "records": n,
            "multiple_recognitions_removed": len(dropped),
            "low_ocr_removed": len(low),
            "not_read_removed": len(not_read),
            "retained": len(final),
            "percent_removed": {
                "multiple_recognitions": _pct(len(dropped), n),
                "low_ocr": _pct(len(low), n),
                "not_read": _pct(len(not_read), n),
                "total": _pct(n - len(final), n),
            },
        }
    entries, exits = cleaned[lpr_cleanse.Direction.ENTRY], cleaned[lpr_cleanse.Direction.EXIT]
    stays, un_en, un_ex = lpr_cleanse.match_entries_exits(entries, exits, cc)
    report["matching"] = {"stays": len(stays), "unmatched_entries": len(un_en),
                          "unmatched_exits": len(un_ex),
                          "percent_entries_matched": _pct(len(stays), len(entries))}
    run.table("stays.csv", ["entry_time", "exit_time", "stay_hours"],
              [[format_time(s.entry_time), format_time(s.exit_time), f"{s.stay_duration:.6f}"]
               for s in stays])

    times = [r.timestamp for r in entries + exits]
    rate_rows = []
    if times:
        start = (min(times) // 86400) * 86400
        hours = int((max(times) // 86400) * 86400 + 86400 - start) // 3600
        arr = lpr_cleanse.hourly_rates([r.timestamp for r in entries], start, hours)
        dep = lpr_cleanse.hourly_rates([r.timestamp for r in exits], start, hours)
        rate_rows = [[format_time(start + 3600 * k), int(a), int(d)]
                     for k, (a, d) in enumerate(zip(arr.values, dep.values))]
    run.table("rates.csv", ["slot_start", "arrivals", "departures"], rate_rows)

    cluster_rows = []
    k = min(cfg["clusters"], len(stays))
    if k >= 1:
        for c, cl in enumerate(lpr_cleanse.kmeans_users(stays, k, cfg["seed"])):
            cluster_rows.append([c, *(f"{v:.4f}" for v in cl.center), len(cl.members), f"{cl.inertia:.6f}"])
    run.table("clusters.csv", ["cluster", "arrival_hour", "departure_hour", "stay_hours", "size", "inertia"],
              cluster_rows)
    run.json("cleanse_report.json", report)


def _fitter(cfg):
    model = cfg["model"]
    if model == "ols":
        return forecast.fit_ols
    if model == "quantile":
        return lambda data: forecast.fit_quantile(data, cfg["tau"])
    raise DataError(f"unknown model {model!r}")


def cmd_forecast(run: _Run, args, cfg):
    starts, arr, dep = read_rates(run.input(args.rates))
    if len(starts) % 24:
        raise DataError("rates file must cover whole days of 24 hourly slots")
    spec = forecast.FeatureSpec(cfg["fourier_pairs"], tuple(cfg["periods"]), cfg["lag_days"])
    H = cfg["horizon_days"]
    horizons = list(range(1, H + 1))
    preds, models_out, metrics = {}, {}, {}
    for name, series in (("arrivals", np.array(arr)), ("departures", np.array(dep))):
        if cfg["model"] == "baseline":
            preds[name] = np.tile(forecast.baseline_profile(series), (H, 1))
        else:
            p, models = forecast.direct_forecast(series, spec, horizons, _fitter(cfg))
            preds[name] = p
            models_out[name] = {f"h{h}": m.to_dict() for h, m in zip(horizons, models)}
            if cfg["folds"]:
                metrics[name] = {f"h{h}": forecast.evaluate_direct(series, spec, h, cfg["folds"],
                                                                    cfg["test_days"], _fitter(cfg))
                                 for h in horizons}
    last = starts[-1] - (starts[-1] % 86400)
    rows = []
    for h in horizons:
        for hour in range(24):
            t = last + h * 86400 + hour * 3600
            rows.append([format_time(t), f"{preds['arrivals'][h - 1, hour]:.4f}",
                         f"{preds['departures'][h - 1, hour]:.4f}"])
    run.table("forecast.csv", ["slot_start", "arrivals", "departures"], rows)
    if models_out:
        run.json("models.json", models_out)
    if metrics:
        run.json("metrics.json", metrics)


def cmd_forecast_attendance(run: _Run, args, cfg):
    required = ["course_id", "start", "end", "enrolment", "attendance"]
    train = [r for _, r in read_rows(run.input(args.train), required)]
    X, names, levels = forecast.attendance_design(train)
    y, keep = [], []
    for i, r in enumerate(train):
        ratio = classroom.normalize_attendance(float(r["attendance"]), float(r["enrolment"]))
        if ratio is not None:
            y.append(ratio)
            keep.append(i)
    data = forecast.SupervisedSet(X[keep], forecast.clamp_unit(y), names)
    model = forecast.fit_quantile(data, cfg["tau"]) if cfg["model"] == "quantile" else forecast.fit_ols(data)
    target = [r for _, r in read_rows(run.input(args.predict), ["course_id", "start", "end", "enrolment"])]
    Xp, _, _ = forecast.attendance_design(target, levels)
    ratio = np.clip(model.predict(Xp), 0.0, None)
    rows = [[r["course_id"], r.get("week", ""), r.get("day", ""), f"{q:.6f}",
             f"{q * float(r['enrolment']):.2f}"] for r, q in zip(target, ratio)]
    run.table("attendance_forecast.csv",
              ["course_id", "week", "day", "predicted_ratio", "predicted_attendance"], rows)
    run.json("attendance_model.json", {**model.to_dict(), "levels": levels,
                                       "train_rows": len(keep), "dropped_rows": len(train) - len(keep)})


def cmd_simulate_carpark(run: _Run, args, cfg):
    spec_in = json.loads(run.input(args.spec).read_text())
    try:
        epoch_h = float(spec_in.get("epoch_minutes", 5)) / 60.0
        spec = markov_carpark.BirthDeathSpec(int(spec_in["capacity"]), spec_in["arrivals"],
                                             spec_in["departures"], epoch_h)
    except (KeyError, TypeError) as exc:
        raise DataError(f"{args.spec}: bad simulation spec ({exc})") from exc
    trace, rej = markov_carpark.simulate_day(spec, tol=cfg["tolerance"])
    if not np.all(np.isfinite(trace)) or abs(trace[-1].sum() - 1.0) > 1e-9:
        raise NumericalError("state distribution lost normalisation")
    rows = [[f"{e * spec.epoch * 60:.4f}", f"{trace[e, -1]:.12g}", f"{rej.per_epoch[e]:.12g}"]
            for e in range(len(rej.per_epoch))]
    run.table("trace.csv", ["epoch_start", "p_full", "expected_rejections"], rows)
    run.json("rejections.json", {"total": rej.total,
                                 "hourly": rej.hourly(spec.epochs_per_hour).tolist()})


def cmd_scheme_table(run: _Run, args, cfg):
    starts, arr, dep = read_rates(run.input(args.rates))
    if len(arr) % 24:
        raise DataError("rates file must cover whole days of 24 hourly slots")
    rng = np.random.default_rng(cfg["seed"]) if cfg["sample"] else None
    sv_a, sv_d, pv_a, pv_d = markov_carpark.sv_demand_profile(
        arr, dep, cfg["subscribers"], cfg["p_in"], cfg["p_out"], cfg["diversion"], rng)
    table = carpark_opt.build_scheme_table(pv_a, pv_d, sv_a, sv_d, cfg["capacity"], cfg["rhos"],
                                           cfg["epoch_minutes"] / 60.0)
    rows = []
    for i in range(table.days):
        for j in range(table.schemes):
            rows.append([i + 1, j + 1, f"{table.rhos[j]:.4f}", int(table.spaces[j]),
                         f"{table.r_pv[i, j]:.6f}", f"{table.r_sv[i, j]:.6f}"])
    run.table("scheme_table.csv", ["day", "scheme", "rho", "spaces_sv", "r_pv", "r_sv"], rows)


def _load_table(path):
    rows = read_scheme_table(path)
    if not rows:
        raise DataError(f"{path}: empty scheme table")
    days = sorted({r[0] for r in rows})
    schemes = sorted({r[1] for r in rows})
    di = {d: i for i, d in enumerate(days)}
    sj = {s: j for j, s in enumerate(schemes)}
    r_sv = np.full((len(days), len(schemes)), np.nan)
    r_pv = np.full_like(r_sv, np.nan)
    spaces = np.zeros(len(schemes), dtype=int)
    rhos = np.zeros(len(schemes))
    for d, s, rho, sp, rpv, rsv in rows:
        r_pv[di[d], sj[s]], r_sv[di[d], sj[s]] = rpv, rsv
        spaces[sj[s]], rhos[sj[s]] = sp, rho
    if np.isnan(r_sv).any():
        raise DataError(f"{path}: table is missing (day, scheme) combinations")
    return carpark_opt.SchemeCostTable(r_sv, r_pv, spaces, rhos), schemes


def cmd_optimize_partition(run: _Run, args, cfg):
    table, labels = _load_table(run.input(args.table))
    ocfg = carpark_opt.PartitionOptConfig(cfg["W_SV"], cfg["W_PV"], cfg["M"], cfg["R"], table.days)
    static = _load_table(run.input(args.static_table))[0] if args.static_table else None
    actual = _load_table(run.input(args.actual_table))[0] if args.actual_table else None
    report = carpark_opt.compare_static_dynamic(table, ocfg, static, actual)
    # report positions are 1-based; map them back to the scheme numbers in the file
    for key in ("dynamic", "static"):
        if report.get(key):
            report[key]["schemes"] = [labels[j - 1] for j in report[key]["schemes"]]
    run.json("decision.json", report)


def cmd_allocate_rooms(run: _Run, args, cfg):
    tt_path = run.input(args.timetable)
    meetings = read_timetable(tt_path)
    rooms = classroom.with_spare_room(read_rooms(run.input(args.rooms)), int(cfg["spare_room"]))
    actuals = read_actuals(run.input(args.actuals) if args.actuals else tt_path)
    days = sorted({m.day for m in meetings})
    plans, rows, total = [], [], 0
    over_all, counted = [], 0
    for day in days:
        todays = [m for m in meetings if m.day == day]
        plan = classroom.allocate(todays, rooms, cfg["margin"])
        problems = classroom.check_plan(plan)
        if problems:
            raise NumericalError("solver returned an invalid plan: " + "; ".join(problems))
        total += plan.total_cost
        d = plan.to_dict()
        d["day"] = day
        if actuals:
            frac, over, missing = classroom.overflow_report(plan, actuals)
            d.update(overflow_fraction=frac, overflow=over, missing_actuals=missing)
            over_all += over
            counted += len(todays) - len(missing)
        plans.append(d)
        for a in d["assignment"]:
            rows.append([a["course_id"], day, a["start_slot"], a["duration_slots"], a["demand"],
                         a["room_id"], a["capacity"]])
    run.table("allocation.csv", ["course_id", "day", "start_slot", "duration_slots", "demand",
                                 "room_id", "capacity"], rows)
    out = {"total_cost": total, "days": plans}
    if actuals:
        out["overflow_fraction"] = len(over_all) / counted if counted else 0.0
    run.json("plan.json", out)


def cmd_infer_queue(run: _Run, args, cfg):
    records = read_pdu(run.input(args.input))
    qc = bus_queue.QueueConfig(cfg["bin_minutes"], cfg["detect_threshold"],
                               (cfg["band_low"], cfg["band_high"]), cfg["persons_per_segment"],
                               cfg["sensors"], cfg["tie_break"])
    est = bus_queue.infer_queue(records, qc)
    run.table("queue.csv", ["bin_start", "queue_length", "bits_string"],
              [[format_time(e.bin_start), e.length, e.bits_string] for e in est])
    cov = bus_queue.coverage(records, qc)
    run.json("coverage.json", {format_time(b): s for b, s in cov.items()})


def cmd_optimize_bus(run: _Run, args, cfg):
    cols = read_columns(run.input(args.demand), ["minute_offset", "arrivals"])
    order = np.argsort(cols["minute_offset"], kind="stable")
    counts = np.asarray(cols["arrivals"])[order]
    t0 = float(np.asarray(cols["minute_offset"])[order][0]) if len(order) else 0.0
    if cfg["smooth_window"]:
        counts = bus_sched.smooth_arrivals(counts, int(cfg["smooth_window"]))
    demand = bus_sched.DemandProfile(counts, t0)
    if args.fleet:
        fleet = read_columns(run.input(args.fleet), ["order", "capacity"])
        caps = np.asarray(fleet["capacity"])[np.argsort(fleet["order"], kind="stable")]
    elif cfg["buses"]:
        if not cfg["capacity"]:
            raise DataError("--buses requires --capacity")
        caps = np.full(int(cfg["buses"]), float(cfg["capacity"]))
    else:
        raise DataError("give --fleet or --buses/--capacity")
    gcfg = bus_sched.GaConfig(cfg["population"], cfg["max_generations"], cfg["stall_halt"],
                              cfg["crossover_prob"], cfg["mutation_prob"], cfg["h_min"], cfg["h_max"],
                              seed=cfg["seed"])
    res = bus_sched.ga_optimize(demand, caps, gcfg)
    sched = res.schedule
    run.table("schedule.csv", ["dispatch_time", "capacity"],
              [[f"{d:.4f}", f"{c:g}"] for d, c in zip(sched.dispatch, sched.capacities)])
    run.json("ga_trace.json", {
        "trace": [{"generation": g, "best_fitness": f} for g, f in enumerate(res.trace)],
        "fitness": res.fitness, "penalty": res.penalty, "feasible": res.feasible,
        "total_wait": bus_sched.total_wait(sched, demand),
        "avg_wait_per_passenger": bus_sched.avg_wait_per_passenger(sched, demand),
    })
    if args.baseline:
        base = read_columns(run.input(args.baseline), ["dispatch_time", "capacity"])
        bs = bus_sched.BusSchedule(base["dispatch_time"], base["capacity"])
        run.json("comparison.json", {
            "baseline_avg_wait": bus_sched.avg_wait_per_passenger(bs, demand),
            "optimised_avg_wait": bus_sched.avg_wait_per_passenger(sched, demand),
        })


COMMANDS = {
    "cleanse": cmd_cleanse,
    "forecast": cmd_forecast,
    "forecast-attendance": cmd_forecast_attendance,
    "simulate-carpark": cmd_simulate_carpark,
    "scheme-table": cmd_scheme_table,
    "optimize-partition": cmd_optimize_partition,
    "allocate-rooms": cmd_allocate_rooms,
    "infer-queue": cmd_infer_queue,
    "optimize-bus": cmd_optimize_bus,
}


def _opt(p, flag, type_, help_=None, **kw):
    p.add_argument(flag, type=type_, default=argparse.SUPPRESS, help=help_, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="campusopt", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", required=True)
        p.add_argument("--config", help="JSON file of parameters; flags override it")
        _opt(p, "--seed", int, f"random seed (default {DEFAULT_SEED})")
        _opt(p, "--format", str, "tabular output format", choices=["csv", "json"])

    p = sub.add_parser("cleanse", help="cleanse LPR records, match stays, derive rates and clusters")
    common(p)
    p.add_argument("--input", required=True)
    _opt(p, "--dedup-lookahead", int)
    _opt(p, "--dedup-distance", int)
    _opt(p, "--ocr-threshold-entry", int, "minimum entry OCR score, inclusive (default 75)")
    _opt(p, "--ocr-threshold-exit", int, "minimum exit OCR score, inclusive (default 65)")
    _opt(p, "--match-distance", int)
    _opt(p, "--clusters", int)

    p = sub.add_parser("forecast", help="direct multi-day forecast of hourly arrivals/departures")
    common(p)
    p.add_argument("--rates", required=True)
    _opt(p, "--horizon-days", int)
    _opt(p, "--model", str, choices=["ols", "quantile", "baseline"])
    _opt(p, "--tau", float)
    _opt(p, "--lag-days", int)
    _opt(p, "--fourier-pairs", int)
    _opt(p, "--periods", float, nargs="+")
    _opt(p, "--folds", int, "rolling evaluation folds (0 disables)")
    _opt(p, "--test-days", int)

    p = sub.add_parser("forecast-attendance", help="predict normalised class attendance")
    common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--predict", required=True)
    _opt(p, "--tau", float)
    _opt(p, "--model", str, choices=["ols", "quantile"])

    p = sub.add_parser("simulate-carpark", help="transient occupancy and rejection trace")
    common(p)
    p.add_argument("--spec", required=True)
    _opt(p, "--tolerance", float)

    p = sub.add_parser("scheme-table", help="expected rejections per day and partitioning scheme")
    common(p)
    p.add_argument("--rates", required=True)
    _opt(p, "--capacity", int)
    _opt(p, "--rhos", float, nargs="+")
    _opt(p, "--subscribers", int)
    _opt(p, "--p-in", float)
    _opt(p, "--p-out", float)
    _opt(p, "--diversion", float)
    _opt(p, "--epoch-minutes", float)
    p.add_argument("--sample", action="store_true", default=argparse.SUPPRESS,
                   help="sample the subscriber demand instead of using its expectation")

    p = sub.add_parser("optimize-partition", help="choose a partitioning scheme per day")
    common(p)
    p.add_argument("--table", required=True)
    p.add_argument("--static-table")
    p.add_argument("--actual-table")
    _opt(p, "--W-SV", float, "cost per rejected shared-vehicle user", dest="W_SV")
    _opt(p, "--W-PV", float, "cost per rejected private-vehicle user", dest="W_PV")
    _opt(p, "--M", float, "daily lease price per space", dest="M")
    _opt(p, "--R", float, "minimum revenue over the window (strict)", dest="R")

    p = sub.add_parser("allocate-rooms", help="cost-optimal course-to-room allocation")
    common(p)
    p.add_argument("--timetable", required=True)
    p.add_argument("--rooms", required=True)
    p.add_argument("--actuals")
    _opt(p, "--margin", float)
    _opt(p, "--spare-room", int, "seats of the extra spare room (0 disables)")

    p = sub.add_parser("infer-queue", help="queue length from people-detector records")
    common(p)
    p.add_argument("--input", required=True)
    _opt(p, "--bin-minutes", float)
    _opt(p, "--detect-threshold", float)
    _opt(p, "--band-low", float)
    _opt(p, "--band-high", float)
    _opt(p, "--persons-per-segment", int)
    _opt(p, "--sensors", int)
    _opt(p, "--tie-break", str, choices=["shorter", "longer"])

    p = sub.add_parser("optimize-bus", help="GA dispatch schedule minimising passenger wait")
    common(p)
    p.add_argument("--demand", required=True)
    p.add_argument("--fleet")
    p.add_argument("--baseline", help="schedule CSV to compare against")
    _opt(p, "--buses", int)
    _opt(p, "--capacity", float)
    _opt(p, "--population", int)
    _opt(p, "--max-generations", int)
    _opt(p, "--stall-halt", int)
    _opt(p, "--crossover-prob", float)
    _opt(p, "--mutation-prob", float)
    _opt(p, "--h-min", float)
    _opt(p, "--h-max", float)
    _opt(p, "--smooth-window", int)
    return parser


_NOT_CONFIG = {"command", "out_dir", "config", "verbose", "input", "rates", "spec", "table",
               "static_table", "actual_table", "timetable", "rooms", "actuals", "demand", "fleet",
               "baseline", "train", "predict"}


def _effective_config(command, args):
    cfg = {"seed": DEFAULT_SEED, "format": "csv", **DEFAULTS.get(command, {})}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        try:
            file_cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: {exc}") from exc
        cfg.update({k.replace("-", "_"): v for k, v in file_cfg.items()})
    cfg.update({k: v for k, v in vars(args).items() if k not in _NOT_CONFIG})
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        for name in sorted(_NOT_CONFIG - {"command", "out_dir", "verbose"}):
            path = getattr(args, name, None)
            if path is not None and not Path(path).is_file():
                raise DataError(f"--{name.replace('_', '-')}: file not found: {path}")
        cfg = _effective_config(args.command, args)
        run = _Run(args.command, args, cfg)
        COMMANDS[args.command](run, args, cfg)
        run.finish()
    except (DataError, FileNotFoundError) as exc:
        print(f"campusopt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"campusopt {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"campusopt {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"campusopt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
