"""Command line front end.

Seven subcommands map onto the library layers: `material` prints the
builtin table, `spectrum` and `dynamics` emit deterministic curves,
`synth` draws a stationary record, `detect` and `taumin` run the Monte
Carlo decision machinery, and `feasibility` evaluates the planning laws.

Every run resolves its settings in three layers: built-in defaults, then
a config file (`--config`, one `key = value` per line, # comments), then
explicit flags. Physical values accept unit suffixes ("10 mHz", "300 K",
"432 mW", "184 amu", "0.0478 A2", "1.6 h"); frequencies given in hertz
are converted to angular form, since every frequency in the package is
angular. Emitted files embed the fully resolved config and master seed;
JSON outputs can be fed straight back through --config, and rerunning an
emitted config reproduces the file byte for byte.

Exit codes: 0 success, 1 domain or runtime failure, 2 usage or config
problems (argparse keeps its native behavior for unknown flags).

Output location: --outdir, else $SNOPTO_OUTDIR, else the working
directory. Filenames embed the command and seed, so reruns overwrite
their own outputs and nothing else. No plotting here; curves are emitted
as plot-ready CSV.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import AMU
from .detect import HypothesisPair, fit_prediction, outcome_probs, tau_min
from .errors import BoundedSearchError, ConfigError, DomainError
from .feasibility import ExperimentConfig, optimize_beta, post_report, pre_report
from .gaussian_dynamics import GaussianState, evolve_moments
from .materials import derive, get_material, table_rows
from .response import gamma_squared
from .spectra import (
    SpectrumParams,
    beta_limit,
    default_grid,
    evaluate,
    post_feature,
    pre_feature,
)
from .synth import KINDS, BasebandModel, gen_baseband

_TWO_PI = 2.0 * math.pi

# Suffix -> factor to SI. The hertz family lands in rad/s on purpose.
# Matching tries longer suffixes first so "mHz" wins over "Hz" and
# "amu" over a bare trailing letter.
_UNITS = [
    ("THz", _TWO_PI * 1e12),
    ("GHz", _TWO_PI * 1e9),
    ("MHz", _TWO_PI * 1e6),
    ("kHz", _TWO_PI * 1e3),
    ("mHz", _TWO_PI * 1e-3),
    ("uHz", _TWO_PI * 1e-6),
    ("amu", AMU),
    ("A^2", 1e-20),
    ("Hz", _TWO_PI),
    ("mK", 1e-3),
    ("uK", 1e-6),
    ("pW", 1e-12),
    ("nW", 1e-9),
    ("uW", 1e-6),
    ("mW", 1e-3),
    ("kg", 1.0),
    ("mg", 1e-6),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("A2", 1e-20),
    ("K", 1.0),
    ("W", 1.0),
    ("g", 1e-3),
    ("h", 3600.0),
    ("d", 86400.0),
    ("s", 1.0),
]


def parse_quantity(text) -> float:
    """A float, optionally with a unit suffix, normalized to SI."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    for suffix, factor in _UNITS:
        if s.endswith(suffix):
            head = s[: -len(suffix)].strip()
            if not head:
                continue
            try:
                value = float(head) * factor
            except ValueError:
                continue
            if not math.isfinite(value):
                raise ConfigError(f"non-finite quantity {text!r}")
            return value
    try:
        value = float(s)
    except ValueError:
        raise ConfigError(f"cannot parse quantity {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"non-finite quantity {text!r}")
    return value


def _to_int(value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"expected an integer, got {value!r}")
    f = float(value)
    i = int(round(f))
    if f != i:
        raise ConfigError(f"expected an integer, got {value!r}")
    return i


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("true", "yes", "on", "1"):
        return True
    if s in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


_STR_KEYS = {"material", "prescription", "kind", "truth", "method"}
_INT_KEYS = {"seed", "jobs", "n", "store_every", "npoints", "max_samples", "n_grid"}
_BOOL_KEYS = {"all", "fit_only", "sweep"}


def _convert(key: str, value):
    if key in _STR_KEYS:
        return str(value)
    if key in _INT_KEYS:
        return _to_int(value)
    if key in _BOOL_KEYS:
        return _to_bool(value)
    return parse_quantity(value)


def load_config(path) -> dict:
    """Key = value document, or the config block of an emitted JSON report."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        block = data.get("config", data)
        if not isinstance(block, dict):
            raise ConfigError(f"{path}: JSON config block must be an object")
        return dict(block)
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, eq, value = s.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_REQUIRED = object()


def resolve(args, spec: dict) -> dict:
    """Three-layer merge: defaults, then config file, then explicit flags."""
    file_conf = load_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_conf) - set(spec)
    conf = {}
    for key, default in spec.items():
        cli_value = getattr(args, key, None)
        if key in _BOOL_KEYS and cli_value is False:
            cli_value = None  # store_true flags: absent means "not set here"
        if cli_value is not None:
            conf[key] = _convert(key, cli_value)
        elif file_conf.get(key) is not None:
            conf[key] = _convert(key, file_conf[key])
        elif default is _REQUIRED:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        else:
            conf[key] = default
    if unknown:
        # emitted configs legitimately carry keys for other subcommands'
        # shared knobs; only complain about ones nothing recognizes
        hopeless = {k for k in unknown if k not in _ALL_KEYS}
        if hopeless:
            raise ConfigError(f"unknown config keys: {sorted(hopeless)}")
    return conf


def _outdir(args) -> Path:
    d = getattr(args, "outdir", None) or os.environ.get("SNOPTO_OUTDIR") or "."
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit_json(path: Path, command: str, conf: dict, result) -> None:
    payload = {
        "command": command,
        "version": __version__,
        "master_seed": conf.get("seed", 0),
        "config": conf,
        "result": result,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(path: Path, command: str, conf: dict, columns: dict) -> None:
    lines = [f"command = {command}", f"version = {__version__}"]
    lines += [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in conf.items()]
    lines.append(", ".join(columns))
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns.values()])
    np.savetxt(path, data, fmt="%.17g", header="\n".join(lines))


# ---------------------------------------------------------------- material

def cmd_material(args) -> int:
    if args.all:
        names = [row["element"] for row in table_rows()]
    elif args.name:
        names = [args.name]
    else:
        raise ConfigError("give a material name or --all")
    rows = []
    for name in names:
        spec = get_material(name)
        d = derive(spec)
        rows.append({
            "name": spec.name,
            "atomic_mass_amu": spec.atomic_mass / AMU,
            "debye_waller_A2": spec.debye_waller_B / 1e-20,
            "density_g_cm3": spec.density / 1e3,
            "delta_x_zp_pm": d.delta_x_zp / 1e-12,
            "omega_sn": d.omega_sn,
        })
    keys = list(rows[0])
    widths = {k: max(len(k), 12) for k in keys}
    print("  ".join(k.ljust(widths[k]) for k in keys))
    for row in rows:
        cells = []
        for k in keys:
            v = row[k]
            cells.append((f"{v:.4f}" if isinstance(v, float) else str(v)).ljust(widths[k]))
        print("  ".join(cells))
    return 0


# ---------------------------------------------------------------- spectrum

_EXPERIMENT_SPEC = {
    "material": "W",
    "mass": 0.2,
    "omega_cm": _TWO_PI * 0.010,
    "q": 1e4,
    "t0": 300.0,
    "i_in": 0.0,
    "transmissivity": 1e-2,
    "omega_c": _TWO_PI * 0.2e12,
}


def _experiment(conf) -> ExperimentConfig:
    return ExperimentConfig.build(
        material=conf["material"],
        mass=conf["mass"],
        omega_cm=conf["omega_cm"],
        q=conf["q"],
        t0=conf["t0"],
        i_in=conf["i_in"],
        transmissivity=conf["transmissivity"],
        omega_c=conf["omega_c"],
    )


def cmd_spectrum(args) -> int:
    conf = resolve(args, {
        **_EXPERIMENT_SPEC,
        "prescription": "pre",
        "beta": None,
        "wmin": None,
        "wmax": None,
        "npoints": 2001,
        "seed": 0,
    })
    exp = _experiment(conf)
    if conf["beta"] is not None:
        params = SpectrumParams.from_beta(exp.osc, conf["beta"])
    elif conf["i_in"] > 0:
        params = SpectrumParams.from_optics(exp.osc, exp.optics)
    else:
        rec = beta_limit(SpectrumParams(exp.osc, 0.0), exp.material).recommended
        params = SpectrumParams.from_beta(exp.osc, rec)
    conf["beta"] = params.beta
    prescription = conf["prescription"]
    if conf["wmin"] is not None and conf["wmax"] is not None:
        grid = np.geomspace(conf["wmin"], conf["wmax"], conf["npoints"])
    else:
        grid = default_grid(params, prescription if prescription == "post" else "pre")
    spectrum = evaluate(prescription, grid, params)

    if prescription == "pre":
        feature = pre_feature(params).as_dict()
    elif prescription == "post":
        feature = post_feature(params).as_dict()
    else:
        feature = None
    out = _outdir(args)
    stem = f"spectrum_{prescription}_seed{conf['seed']}"
    _emit_csv(out / f"{stem}.csv", "spectrum", conf, {"omega": spectrum.grid, "value": spectrum.values})
    _emit_json(out / f"{stem}.json", "spectrum", conf, {
        "baseline": params.baseline,
        "beta": params.beta,
        "gamma_sq": params.gamma_sq,
        "omega_q": params.omega_q,
        "well_resolved": params.well_resolved,
        "feature": feature,
    })
    print(out / f"{stem}.csv")
    print(out / f"{stem}.json")
    return 0


# ---------------------------------------------------------------- dynamics

def cmd_dynamics(args) -> int:
    conf = resolve(args, {
        **_EXPERIMENT_SPEC,
        "t_final": _REQUIRED,
        "dt": None,
        "store_every": 1,
        "x0": 0.0,
        "p0": 0.0,
        "squeeze": 0.0,
        "sn_weight": 0.5,
        "seed": 0,
    })
    exp = _experiment(conf)
    state = GaussianState.ground(exp.osc).squeezed(conf["squeeze"]).displaced(conf["x0"], conf["p0"])
    traj = evolve_moments(
        state, exp.osc, conf["t_final"],
        dt=conf["dt"], sn_weight=conf["sn_weight"], store_every=conf["store_every"],
    )
    if traj.times.size > 1:
        conf["dt"] = float(traj.times[1] - traj.times[0]) / conf["store_every"]
    out = _outdir(args)
    stem = f"dynamics_{conf['material']}_seed{conf['seed']}"
    _emit_csv(out / f"{stem}.csv", "dynamics", conf, {
        "t": traj.times,
        "mean_x": traj.mean_x,
        "mean_p": traj.mean_p,
        "var_xx": traj.var_xx,
        "cov_xp": traj.cov_xp,
        "var_pp": traj.var_pp,
        "energy": traj.energy,
    })
    print(out / f"{stem}.csv")
    return 0


# ---------------------------------------------------------------- synth

def _alt_model(conf) -> BasebandModel:
    kind = conf["kind"]
    if kind == "flat":
        return BasebandModel("flat")
    if conf.get("amp") is None:
        raise ConfigError(f"--amp is required for kind {kind!r}")
    return BasebandModel(kind, amplitude=conf["amp"], fwhm_gamma=conf["gamma"])


def cmd_synth(args) -> int:
    conf = resolve(args, {
        "kind": "peak",
        "amp": None,
        "gamma": 1.0,
        "duration": _REQUIRED,
        "dt": _REQUIRED,
        "method": "auto",
        "seed": 0,
    })
    model = _alt_model(conf)
    series = gen_baseband(model, conf["duration"], conf["dt"], conf["seed"], method=conf["method"])
    out = _outdir(args)
    path = out / f"synth_{conf['kind']}_seed{conf['seed']}.csv"
    header_conf = {"dt": series.dt, "n": series.n, "seed": series.seed, "model": series.model_tag, **{k: v for k, v in conf.items() if k not in ("dt", "seed")}}
    _emit_csv(path, "synth", header_conf, {"sample": series.samples})
    print(path)
    return 0


# ---------------------------------------------------------------- detect

def cmd_detect(args) -> int:
    conf = resolve(args, {
        "truth": _REQUIRED,
        "kind": "dip",
        "amp": _REQUIRED,
        "gamma": 1.0,
        "duration": _REQUIRED,
        "dt": _REQUIRED,
        "yth": _REQUIRED,
        "n": 10000,
        "seed": 0,
        "jobs": 1,
    })
    if conf["truth"] not in ("flat", conf["kind"]):
        raise ConfigError(f"truth must be flat or {conf['kind']!r}, got {conf['truth']!r}")
    alt = _alt_model(conf)
    pair = HypothesisPair(BasebandModel("flat"), alt)
    truth = BasebandModel("flat") if conf["truth"] == "flat" else alt
    report = outcome_probs(
        truth, pair, conf["duration"], conf["dt"], conf["yth"],
        conf["n"], conf["seed"], jobs=conf["jobs"],
    )
    out = _outdir(args)
    path = out / f"detect_{conf['truth']}_seed{conf['seed']}.json"
    _emit_json(path, "detect", conf, report.as_dict())
    print(path)
    return 0


# ---------------------------------------------------------------- taumin

def cmd_taumin(args) -> int:
    conf = resolve(args, {
        "kind": "dip",
        "amp": _REQUIRED,
        "gamma": 1.0,
        "p": 10.0,
        "dt_gamma": 0.14,
        "n": 10000,
        "max_samples": 8192,
        "fit_only": False,
        "seed": 0,
        "jobs": 1,
    })
    fit = fit_prediction(conf["kind"], conf["amp"], conf["gamma"], p=conf["p"])
    fit_block = {
        "seconds": fit.seconds,
        "seconds_unhalved": fit.seconds_unhalved,
        "coherence_times": fit.coherence_times,
        "coherence_times_unhalved": fit.coherence_times_unhalved,
        "warnings": list(fit.warnings),
    }
    if conf["fit_only"]:
        result = {"fit": fit_block}
    else:
        pair = HypothesisPair(BasebandModel("flat"), _alt_model(conf))
        res = tau_min(
            pair, conf["p"] / 100.0, dt_gamma=conf["dt_gamma"], n_trials=conf["n"],
            master_seed=conf["seed"], jobs=conf["jobs"], max_samples=conf["max_samples"],
        )
        result = {**res.as_dict(), "fit": fit_block}
    out = _outdir(args)
    path = out / f"taumin_{conf['kind']}_seed{conf['seed']}.json"
    _emit_json(path, "taumin", conf, result)
    print(path)
    return 0


# ------------------------------------------------------------- feasibility

def cmd_feasibility(args) -> int:
    prescription = getattr(args, "prescription", None)
    if prescription is None and getattr(args, "config", None):
        prescription = load_config(args.config).get("prescription")
    if prescription not in ("pre", "post"):
        raise ConfigError(f"prescription must be pre or post, got {prescription!r}")
    defaults = dict(_EXPERIMENT_SPEC)
    if prescription == "post":
        defaults.update(material="Os", omega_cm=_TWO_PI * 0.004, q=1e7, t0=1.0)
    conf = resolve(args, {
        **defaults,
        "prescription": prescription,
        "beta": None,
        "sweep": False,
        "p": 10.0,
        "n_grid": 481,
        "seed": 0,
    })
    exp = _experiment(conf)
    report = (pre_report if prescription == "pre" else post_report)(exp, beta=conf["beta"])
    conf["beta"] = report.beta_used
    result = report.as_dict()
    out = _outdir(args)
    stem = f"feasibility_{prescription}_seed{conf['seed']}"
    if conf["sweep"]:
        sweep = optimize_beta(gamma_squared(exp.osc), exp.osc.gamma_m, p=conf["p"], n_grid=conf["n_grid"])
        result["sweep"] = {
            "beta_opt": sweep.beta_opt,
            "tau_min": sweep.tau_min,
            "depth_at_opt": sweep.depth_at_opt,
            "law_ratio": sweep.law_ratio,
        }
        _emit_csv(out / f"{stem}_sweep.csv", "feasibility", conf, {"beta": sweep.betas, "tau_min": sweep.taus})
        print(out / f"{stem}_sweep.csv")
    _emit_json(out / f"{stem}.json", "feasibility", conf, result)
    print(out / f"{stem}.json")
    return 0


# ---------------------------------------------------------------- parser

def _add_common(sub):
    sub.add_argument("--config", help="key = value file, or an emitted JSON report")
    sub.add_argument("--outdir", help="output directory (default $SNOPTO_OUTDIR or .)")
    sub.add_argument("--seed", type=int, help="master seed stamped into outputs")
    sub.add_argument("--jobs", type=int, help="Monte Carlo worker count")


def _add_experiment(sub):
    sub.add_argument("--material", help="builtin material name (e.g. W, Os)")
    sub.add_argument("--mass", type=parse_quantity, help="total mass, e.g. '200 g'")
    sub.add_argument("--omega-cm", dest="omega_cm", type=parse_quantity,
                     help="trap frequency, e.g. '10 mHz' (hertz become angular)")
    sub.add_argument("--q", type=parse_quantity, help="mechanical quality factor")
    sub.add_argument("--t0", type=parse_quantity, help="bath temperature, e.g. '300 K'")
    sub.add_argument("--i-in", dest="i_in", type=parse_quantity, help="input power, e.g. '432 mW'")
    sub.add_argument("--transmissivity", type=parse_quantity)
    sub.add_argument("--omega-c", dest="omega_c", type=parse_quantity, help="carrier, e.g. '0.2 THz'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snopto",
        description="Spectra, trajectories, synthetic records, decision statistics and planning laws.",
    )
    parser.add_argument("--version", action="version", version=f"snopto {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("material", help="builtin material table")
    p.add_argument("name", nargs="?", help="element symbol, e.g. W")
    p.add_argument("--all", action="store_true", help="print every builtin row")
    p.set_defaults(func=cmd_material)

    p = subs.add_parser("spectrum", help="output spectrum curve plus feature block")
    _add_common(p)
    _add_experiment(p)
    p.add_argument("--prescription", choices=("qm", "pre", "post"))
    p.add_argument("--beta", type=parse_quantity, help="measurement strength (overrides --i-in)")
    p.add_argument("--wmin", type=parse_quantity)
    p.add_argument("--wmax", type=parse_quantity)
    p.add_argument("--npoints", type=int)
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("dynamics", help="moment trajectory CSV")
    _add_common(p)
    _add_experiment(p)
    p.add_argument("--t-final", dest="t_final", type=parse_quantity)
    p.add_argument("--dt", type=parse_quantity)
    p.add_argument("--store-every", dest="store_every", type=int)
    p.add_argument("--x0", type=parse_quantity)
    p.add_argument("--p0", type=parse_quantity)
    p.add_argument("--squeeze", type=parse_quantity)
    p.add_argument("--sn-weight", dest="sn_weight", type=parse_quantity)
    p.set_defaults(func=cmd_dynamics)

    p = subs.add_parser("synth", help="draw one stationary record")
    _add_common(p)
    p.add_argument("--kind", choices=tuple(KINDS))
    p.add_argument("--amp", type=parse_quantity)
    p.add_argument("--gamma", type=parse_quantity)
    p.add_argument("--duration", type=parse_quantity)
    p.add_argument("--dt", type=parse_quantity)
    p.add_argument("--method", choices=("auto", "cholesky", "circulant"))
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("detect", help="Monte Carlo verdict rates at a threshold")
    _add_common(p)
    p.add_argument("--truth", help="flat, or the alternative kind")
    p.add_argument("--kind", choices=("peak", "dip"))
    p.add_argument("--amp", type=parse_quantity)
    p.add_argument("--gamma", type=parse_quantity)
    p.add_argument("--duration", type=parse_quantity)
    p.add_argument("--dt", type=parse_quantity)
    p.add_argument("--yth", type=parse_quantity)
    p.add_argument("--n", type=int, help="trial count")
    p.set_defaults(func=cmd_detect)

    p = subs.add_parser("taumin", help="minimum record length search")
    _add_common(p)
    p.add_argument("--kind", choices=("peak", "dip"))
    p.add_argument("--amp", type=parse_quantity)
    p.add_argument("--gamma", type=parse_quantity)
    p.add_argument("--p", type=parse_quantity, help="confidence target in percent")
    p.add_argument("--dt-gamma", dest="dt_gamma", type=parse_quantity)
    p.add_argument("--n", type=int, help="trials per probed duration")
    p.add_argument("--max-samples", dest="max_samples", type=int)
    p.add_argument("--fit-only", dest="fit_only", action="store_true",
                   help="emit the printed-fit estimate without Monte Carlo")
    p.set_defaults(func=cmd_taumin)

    p = subs.add_parser("feasibility", help="planning report from the anchored laws")
    _add_common(p)
    _add_experiment(p)
    p.add_argument("--prescription", choices=("pre", "post"))
    p.add_argument("--beta", type=parse_quantity)
    p.add_argument("--sweep", action="store_true", help="also emit the strength sweep curve")
    p.add_argument("--p", type=parse_quantity)
    p.add_argument("--n-grid", dest="n_grid", type=int)
    p.set_defaults(func=cmd_feasibility)

    return parser


# union of every resolvable key, for tolerating emitted configs across commands
_ALL_KEYS = (
    set(_EXPERIMENT_SPEC)
    | _STR_KEYS | _INT_KEYS | _BOOL_KEYS
    | {"beta", "wmin", "wmax", "t_final", "dt", "x0", "p0", "squeeze", "sn_weight",
       "amp", "gamma", "duration", "yth", "p", "dt_gamma", "n", "command", "version"}
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, BoundedSearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
