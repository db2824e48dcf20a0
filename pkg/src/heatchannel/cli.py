"""Command-line front end: one subcommand per quantity, CSV or JSON output.

JSON output is a single object with ``schema_version``, the ``command``, its
``inputs``, a list of ``routes`` (each tagged discrete, closed_form or
tf_quadrature) and, for curves, a ``table`` with one object per point.
CSV output is a header plus one data row (route fields are prefixed with the
route name), or one row per point for curves. Field names carry units.

Exit status: 0 on success, 1 on a computation or domain error, 2 on a
usage error.
"""
import argparse
import csv
import io
import json
import math
import sys

import numpy as np

SCHEMA_VERSION = 1


class _Output:
    def __init__(self, command, inputs, routes=(), table=None, extra=None):
        self.command = command
        self.inputs = inputs
        self.routes = list(routes)
        self.table = table
        self.extra = extra or {}

    def as_json(self):
        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "inputs": self.inputs}
        if self.routes:
            doc["routes"] = self.routes
        if self.table is not None:
            doc["table"] = self.table
        doc.update(self.extra)
        return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"

    def as_csv(self):
        buf = io.StringIO()
        if self.table is not None:
            rows = [_plain(r) for r in self.table]
            fields = list(rows[0]) if rows else []
        else:
            row = {"schema_version": SCHEMA_VERSION, "command": self.command}
            row.update(self.inputs)
            for r in self.routes:
                tag = f"{r['problem']}_{r['route']}" if "problem" in r else r["route"]
                row.update({f"{tag}_{k}": v for k, v in r.items() if k not in ("route", "problem")})
            for k, v in self.extra.items():
                if not isinstance(v, (list, tuple, dict, np.ndarray)):
                    row[k] = v
            rows, fields = [_plain(row)], list(row)
        for r in rows:
            for v in r.values():
                if isinstance(v, float) and not math.isfinite(v):
                    raise ValueError(f"refusing to emit non-finite value {v!r}")
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _params(args, theta2=None):
    from .channel import make_params

    return make_params(args.alpha, args.beta, args.theta2 if theta2 is None else theta2)


def _channel_inputs(args):
    return {"alpha_seconds": args.alpha, "beta_per_second": args.beta, "theta2_watts_per_hz": args.theta2}


def _capacity_field(args):
    return "capacity_bits_per_transmission" if args.unit == "bits" else "capacity_nats_per_transmission"


def _cap(args, bits):
    from .waterfill import bits_to_nats

    return bits if args.unit == "bits" else bits_to_nats(bits)


# ---------------------------------------------------------------------------
# subcommands


def cmd_capacity(args):
    from .waterfill import capacity_closed_form, energy_balance, solve_waterfill

    params = _params(args)
    sol = solve_waterfill(args.S, params)
    bal = energy_balance(sol, params)
    cf = _capacity_field(args)
    inputs = dict(_channel_inputs(args), input_energy_watt_seconds=args.S)
    routes = [
        {"route": "discrete", cf: _cap(args, sol.capacity_bits), "active_subchannels": sol.K,
         "water_level_watt_seconds": sol.sigma2},
        {"route": "closed_form", cf: _cap(args, capacity_closed_form(args.S, params))},
    ]
    extra = {"e_in_watt_seconds": bal.e_in, "e_out_watt_seconds": bal.e_out,
             "e_err_watt_seconds": bal.e_err, "e_out_hat_watt_seconds": bal.e_out_hat,
             "allocation_watt_seconds": sol.allocation}
    return _Output("capacity", inputs, routes, extra=extra)


def cmd_rd(args):
    from .waterfill import rd_closed_form, solve_reverse_waterfill, source_energy

    params = _params(args, theta2=1.0)
    sol = solve_reverse_waterfill(args.D, args.sigma2, params)
    inputs = {"alpha_seconds": args.alpha, "beta_per_second": args.beta,
              "source_psd_watts_per_hz": args.sigma2, "distortion_watt_seconds": args.D}
    rate = "rate_bits" if args.unit == "bits" else "rate_nats"
    conv = (lambda v: v / math.log(2.0)) if args.unit == "bits" else (lambda v: v)
    routes = [
        {"route": "discrete", rate: conv(sol.rate_nats), "coded_sources": sol.K,
         "water_table_watt_seconds": sol.theta2_table, "incurred_distortion_watt_seconds": sol.distortion},
        {"route": "closed_form", rate: conv(rd_closed_form(args.D, args.sigma2, params))},
    ]
    extra = {"source_energy_watt_seconds": source_energy(args.sigma2, params)}
    return _Output("rd", inputs, routes, extra=extra)


def cmd_tf(args):
    from .tfplane import tf_reverse_waterfill, tf_waterfill

    params = _params(args)
    inputs = dict(_channel_inputs(args))
    routes = []
    if args.S is not None:
        inputs["input_energy_watt_seconds"] = args.S
        r = tf_waterfill(args.S, params)
        cf = _capacity_field(args)
        routes.append({"route": "closed_form", "problem": "waterfill", cf: _cap(args, r.capacity_bits),
                       "water_level_watt_seconds_per_rad": r.nu, "fill_radius": r.fill_radius_L,
                       "input_energy_watt_seconds": r.input_energy})
        if r.capacity_quadrature_bits is not None:
            routes.append({"route": "tf_quadrature", "problem": "waterfill", cf: _cap(args, r.capacity_quadrature_bits),
                           "input_energy_watt_seconds": r.energy_quadrature})
    if args.lam is not None:
        inputs["water_table_watt_seconds_per_rad"] = args.lam
        inputs["source_psd_watts_per_hz"] = args.sigma2
        q = tf_reverse_waterfill(args.lam, args.sigma2, params)
        routes.append({"route": "closed_form", "problem": "reverse_waterfill", "distortion_watt_seconds": q.distortion,
                       "rate_nats": q.rate_nats})
        routes.append({"route": "tf_quadrature", "problem": "reverse_waterfill", "distortion_watt_seconds": q.distortion_quadrature,
                       "rate_nats": q.rate_quadrature_nats})
    if not routes:
        raise _UsageError("tf needs --S and/or --lam")
    return _Output("tf", inputs, routes)


def _snr_grid(args):
    if not (0 < args.snr_min < args.snr_max):
        raise _UsageError("need 0 < --snr-min < --snr-max")
    return np.geomspace(args.snr_min, args.snr_max, args.points)


def cmd_compare(args):
    inputs = {"curve": args.curve, "snr_min": args.snr_min, "snr_max": args.snr_max, "points": args.points}
    if args.curve == "spectral":
        from .gallager import compare_curves, heat_gallager_crossing, heat_shannon_crossover

        table = [{"snr": p.snr, "se_heat_bits_per_second_per_hz": p.se_heat,
                  "se_shannon_bits_per_second_per_hz": p.se_shannon,
                  "se_gallager_bits_per_second_per_hz": p.se_gallager,
                  "eb_n0_heat_db": p.eb_n0_db_heat, "eb_n0_shannon_db": p.eb_n0_db_shannon,
                  "eb_n0_gallager_db": p.eb_n0_db_gallager} for p in compare_curves(_snr_grid(args))]
        extra = {"heat_gallager_crossing_snr": heat_gallager_crossing(),
                 "heat_shannon_crossover_snr": heat_shannon_crossover()}
        return _Output("compare", inputs, table=table, extra=extra)

    from .channel import params_from_dof
    from .simulate import c_llse_check, kink_snrs, llse_average, mmse_average

    if args.snr_min <= 1.0:
        raise _UsageError(f"--curve {args.curve} needs --snr-min > 1")
    params = params_from_dof(args.dof, 1.0)
    inputs["dof"] = args.dof
    grid = _snr_grid(args)
    rows = c_llse_check(grid, params)
    if args.curve == "capacity":
        table = [{"snr": r.snr, "active_subchannels": r.K, "discrete_capacity_nats": r.capacity_nats,
                  "closed_form_capacity_nats": r.smooth_capacity_nats, "kink_before": r.kink_before,
                  "dc0_dsnr_analytic_nats": r.dc0_analytic, "dc0_dsnr_finite_difference_nats": r.dc0_finite_difference,
                  "discrete_half_llse_normalized": r.half_llse_exact,
                  "closed_form_half_llse_normalized": r.half_llse_asymptotic,
                  "discrete_half_mmse_corrected_normalized": r.half_mmse_corrected} for r in rows]
        extra = {"kink_snrs": kink_snrs(params, args.snr_max)}
        return _Output("compare", inputs, table=table, extra=extra)
    from .simulate import llse_exact, mmse_exact

    table = [{"snr": r.snr, "closed_form_llse_per_dof": llse_average(r.snr),
              "closed_form_mmse_per_dof": mmse_average(r.snr),
              "discrete_llse_per_dof": llse_exact(r.snr, params) / params.dof,
              "discrete_mmse_per_dof": mmse_exact(r.snr, params) / params.dof} for r in rows]
    return _Output("compare", inputs, table=table)


def cmd_simulate(args):
    from .simulate import SimulationConfig, run_simulation

    params = _params(args)
    cfg = SimulationConfig(params, args.S, args.trials, args.seed, args.mode, workers=args.workers)
    rep = run_simulation(cfg)
    inputs = dict(_channel_inputs(args), input_energy_watt_seconds=args.S, trials=args.trials,
                  seed=args.seed, mode=args.mode)
    eb, se = rep.empirical_energy_balance, rep.energy_standard_error
    extra = {
        "active_subchannels": rep.K,
        "capacity_bits_per_transmission": rep.capacity_reference,
        "max_noise_var_deviation_standard_errors":
            float(np.max(np.abs(rep.empirical_noise_var - rep.theta2)) / rep.noise_var_standard_error),
        "max_abs_noise_correlation": rep.empirical_cross_cov,
        "analytic_e_out_hat_watt_seconds": rep.analytic_e_out_hat,
    }
    for k in ("e_in", "e_out", "e_out_hat", "e_err"):
        extra[f"mean_{k}_watt_seconds"] = eb[k]
        extra[f"se_{k}_watt_seconds"] = se[k]
    extra["empirical_noise_var_watt_seconds"] = rep.empirical_noise_var
    extra["empirical_estimate_var_watt_seconds"] = rep.empirical_estimate_var
    return _Output("simulate", inputs, extra=extra)


def cmd_szego(args):
    from . import tfplane
    from .channel import params_from_dof

    if args.test_fn == "monomial":
        fn = tfplane.monomial(args.n)
    elif args.test_fn == "log_plus":
        fn = tfplane.log_plus(args.b)
    elif args.test_fn == "clipped_inverse":
        fn = tfplane.clipped_inverse(args.a, args.b)
    else:
        fn = tfplane.min_one(args.b, args.a)
    table = []
    for dof in args.dof:
        rep = tfplane.szego_check(fn, params_from_dof(dof, 1.0))
        table.append({"test_function": rep.test_function_id, "dof": rep.dof, "eigen_sum": rep.lhs,
                      "phase_plane_integral": rep.rhs, "phase_plane_quadrature": rep.rhs_quadrature,
                      "normalized_gap": rep.normalized_gap})
    return _Output("szego", {"test_function": fn.label, "dofs": list(args.dof)}, table=table)


# ---------------------------------------------------------------------------
# parser


class _UsageError(Exception):
    pass


def _positive(s):
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def _count(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    unit = common.add_mutually_exclusive_group()
    unit.add_argument("--bits", dest="unit", action="store_const", const="bits")
    unit.add_argument("--nats", dest="unit", action="store_const", const="nats")
    common.set_defaults(unit="bits")

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--alpha", type=_positive, required=True, help="time scale (s)")
    chan.add_argument("--beta", type=_positive, required=True, help="frequency scale (rad/s)")

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--theta2", type=_positive, required=True, help="two-sided noise PSD (W/Hz)")

    snr = argparse.ArgumentParser(add_help=False)
    snr.add_argument("--snr-min", type=_positive, default=0.01)
    snr.add_argument("--snr-max", type=_positive, default=1e4)
    snr.add_argument("--points", type=_count, default=61)

    p = argparse.ArgumentParser(prog="heatchannel", description="Heat-channel capacity and related quantities.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("capacity", parents=[common, chan, noise], help="discrete and closed-form capacity")
    c.add_argument("--S", type=_positive, required=True, help="input energy (W s)")
    c.set_defaults(func=cmd_capacity)

    r = sub.add_parser("rd", parents=[common, chan], help="rate distortion of the filtered white-noise source")
    r.add_argument("--D", type=_positive, required=True, help="distortion (W s)")
    r.add_argument("--sigma2", type=_positive, default=1.0, help="source white-noise PSD")
    r.set_defaults(func=cmd_rd)

    t = sub.add_parser("tf", parents=[common, chan, noise], help="time-frequency (reverse) water-filling")
    t.add_argument("--S", type=_positive, help="input energy for water-filling")
    t.add_argument("--lam", type=_positive, help="water table for reverse water-filling")
    t.add_argument("--sigma2", type=_positive, default=1.0, help="source PSD for reverse water-filling")
    t.set_defaults(func=cmd_tf)

    m = sub.add_parser("compare", parents=[common, snr], help="curve tables over an SNR grid")
    m.add_argument("--curve", choices=("spectral", "capacity", "estimation"), default="spectral")
    m.add_argument("--dof", type=_positive, default=5.0, help="alpha*beta for capacity/estimation curves")
    m.set_defaults(func=cmd_compare)

    s = sub.add_parser("simulate", parents=[common, chan, noise], help="seeded Monte Carlo of the measurement model")
    s.add_argument("--S", type=_positive, required=True)
    s.add_argument("--trials", type=_count, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=("coefficient", "waveform"), default="coefficient")
    s.add_argument("--workers", type=_count, default=1)
    s.set_defaults(func=cmd_simulate)

    z = sub.add_parser("szego", parents=[common], help="trace asymptotics over a sweep of alpha*beta")
    z.add_argument("--test-fn", choices=("monomial", "log_plus", "clipped_inverse", "min_one"), required=True)
    z.add_argument("--n", type=int, default=1, help="monomial degree")
    z.add_argument("--a", type=float, default=1.0)
    z.add_argument("--b", type=float, default=1.0)
    z.add_argument("--dof", type=_positive, nargs="+", default=[10.0, 100.0, 1000.0])
    z.set_defaults(func=cmd_szego)
    return p


def main(argv=None):
    from .errors import HeatChannelError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
        text = out.as_json() if args.format == "json" else out.as_csv()
    except _UsageError as e:
        parser.error(str(e))
    except (HeatChannelError, ValueError, OverflowError) as e:
        print(f"heatchannel: error: {e}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0
