"""Command-line front end: one subcommand per experiment, CSV output.

Usage::

    chiralchain <transport|coupling-map|collective|disorder> --config run.json
                [--out DIR] [--seed INT] [--threads INT] [--svg]

Exit status is 0 on success, 2 for an invalid configuration and 3 when a
numerical routine fails to converge.
"""

import argparse
import copy
import csv
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .chiral import ChainGeometry, ModeModel, evolve, exact_zero_times, front_zero_times
from .collective import dicke_state, gamma_init_closed, gamma_init_slope, survival_amplitude
from .errors import ChiralChainError, ConfigError, NumericalError
from .evolution import (
    Calibration,
    DisorderConfig,
    NanowireModel,
    calibrate,
    disorder_ensemble,
    effective_hamiltonian,
    evolve_matrix_exp,
    ideal_selfenergy,
)
from .greens import DipoleSpec, NanowireSpec, coupling_pairs, spp_mode
from .plot import line_plot

EXPERIMENTS = ("transport", "coupling-map", "collective", "disorder")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props, **extra):
    return {"type": "object", "properties": props, "additionalProperties": False, **extra}


SCHEMA = _obj(
    {
        "experiment": {"enum": list(EXPERIMENTS)},
        "model": {"enum": ["ideal", "nanowire"]},
        "seed": {"type": "integer", "minimum": 0},
        "svg": {"type": "boolean"},
        "initial_emitter": {"type": "integer", "minimum": 1},
        "chain": _obj(
            {
                "N": {"type": "integer", "minimum": 1, "maximum": 400},
                "spacing": _POS,
                "delta_rho": _NONNEG,
                "positions": {"type": ["array", "null"], "items": _NUM, "minItems": 1},
            }
        ),
        "mode": _obj(
            {
                "gamma_g": _NONNEG,
                "gamma_r": _NUM,
                "delta_L": _NUM,
                "k_g": {"oneOf": [_NUM, _PAIR]},
                "beta": {"type": "number", "minimum": 0, "maximum": 1},
            }
        ),
        "nanowire": _obj(
            {
                "rho_c": _POS,
                "epsilon": _PAIR,
                "polarization": {"enum": ["sigma_plus", "sigma_minus", "linear"]},
                "direction": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                "n_max": {"type": "integer", "minimum": 1, "maximum": 64},
                "free_space_coupling": {"type": "boolean"},
            }
        ),
        "time": _obj(
            {
                "t_max": {"oneOf": [_POS, {"type": "null"}]},
                "points": {"type": "integer", "minimum": 2},
            }
        ),
        "fronts": _obj({"families": {"type": "integer", "minimum": 1, "maximum": 50}}),
        "coupling_map": _obj(
            {
                "dz_min": _POS,
                "dz_max": _POS,
                "points": {"type": "integer", "minimum": 1},
                "free_space_coupling": {"type": "boolean"},
            }
        ),
        "collective": _obj({"xi_points": {"type": "integer", "minimum": 2}}),
        "disorder": _obj(
            {
                "realizations": {"type": "integer", "minimum": 1},
                "amplitude": _NONNEG,
                "amplitude_unit": {"enum": ["lambda_pl", "lambda0"]},
                "max_retries": {"type": "integer", "minimum": 1},
            }
        ),
    }
)

DEFAULTS = {
    "model": "ideal",
    "seed": 0,
    "svg": False,
    "initial_emitter": 1,
    "chain": {"N": 5, "spacing": 2.0, "delta_rho": 0.05, "positions": None},
    "mode": {"gamma_g": 1.0, "gamma_r": 0.0, "delta_L": 0.0, "k_g": 2 * math.pi, "beta": 1.0},
    "nanowire": {
        "rho_c": 0.05,
        "epsilon": [-16.0, 0.44],
        "polarization": "sigma_plus",
        "direction": [0.0, 1.0, 0.0],
        "n_max": 12,
        "free_space_coupling": True,
    },
    "time": {"t_max": None, "points": 600},
    "fronts": {"families": 1},
    "coupling_map": {"dz_min": 0.1, "dz_max": 6.0, "points": 120, "free_space_coupling": False},
    "collective": {"xi_points": 720},
    "disorder": {"realizations": 20, "amplitude": 0.5, "amplitude_unit": "lambda_pl", "max_retries": 100},
}

# per-experiment defaults layered over DEFAULTS
_EXPERIMENT_DEFAULTS = {
    "coupling-map": {"model": "nanowire"},
    "collective": {"chain": {"N": 10}, "mode": {"gamma_r": 1.0}},
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve_config(raw, experiment, seed=None):
    """Validate a user config and fill in defaults.

    Raises
    ------
    ConfigError
        With the dotted path of the offending key in the message.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "config"
        if exc.validator == "additionalProperties":
            unknown = sorted(set(exc.instance) - set(exc.schema.get("properties", {})))
            where = ".".join([*map(str, exc.absolute_path), unknown[0]]) if unknown else where
            raise ConfigError(f"{where}: unknown key") from None
        raise ConfigError(f"{where}: {exc.message}") from None
    if raw.get("experiment", experiment) != experiment:
        raise ConfigError(f"experiment: config is for {raw['experiment']!r}, command is {experiment!r}")
    cfg = _merge(_merge(DEFAULTS, _EXPERIMENT_DEFAULTS.get(experiment, {})), raw)
    cfg["experiment"] = experiment
    if seed is not None:
        cfg["seed"] = int(seed)
    _check_semantics(cfg, raw)
    return cfg


def _check_semantics(cfg, raw):
    mode, chain = cfg["mode"], cfg["chain"]
    if mode["gamma_g"] + mode["gamma_r"] < 0:
        raise ConfigError("mode.gamma_r: total decay rate gamma_g + gamma_r must be non-negative")
    k = _complex(mode["k_g"])
    if k.imag < 0:
        raise ConfigError("mode.k_g: imaginary part must be non-negative")
    pos = chain["positions"]
    if pos is not None:
        if "N" in raw.get("chain", {}) and len(pos) != chain["N"]:
            raise ConfigError("chain.positions: length differs from chain.N")
        if np.any(np.diff(pos) <= 0):
            raise ConfigError("chain.positions: must be strictly increasing")
        chain["N"] = len(pos)
    if cfg["initial_emitter"] > chain["N"]:
        raise ConfigError(f"initial_emitter: exceeds chain.N = {chain['N']}")
    exp = cfg["experiment"]
    if exp == "coupling-map" and cfg["model"] != "nanowire":
        raise ConfigError("model: coupling-map needs the nanowire model")
    if exp == "collective":
        if cfg["model"] != "ideal":
            raise ConfigError("model: collective needs the ideal model")
        if mode["beta"] != 1.0:
            raise ConfigError("mode.beta: collective closed form needs beta = 1")
    cm = cfg["coupling_map"]
    if cm["dz_max"] < cm["dz_min"]:
        raise ConfigError("coupling_map.dz_max: smaller than dz_min")
    if cfg["model"] == "nanowire" and cfg["nanowire"]["epsilon"][0] >= -1:
        raise ConfigError("nanowire.epsilon: real part must be below -1 for a guided plasmon")


def _complex(v):
    return complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)


# -- builders -------------------------------------------------------------------


def _geometry(cfg):
    ch = cfg["chain"]
    if ch["positions"] is not None:
        return ChainGeometry(np.asarray(ch["positions"], dtype=float), ch["delta_rho"])
    return ChainGeometry.regular(ch["N"], ch["spacing"], delta_rho=ch["delta_rho"])


def _mode(cfg):
    m = cfg["mode"]
    return ModeModel(
        gamma_g=m["gamma_g"], gamma_r=m["gamma_r"], delta_L=m["delta_L"], k_g=_complex(m["k_g"]), beta=m["beta"]
    )


def _wire(cfg):
    w = cfg["nanowire"]
    return NanowireSpec(rho_c=w["rho_c"], epsilon=_complex(w["epsilon"]))


def _dipole(cfg, polarization=None):
    w = cfg["nanowire"]
    return DipoleSpec(polarization=polarization or w["polarization"], direction=tuple(w["direction"]))


def _nanowire_model(cfg):
    w = cfg["nanowire"]
    return NanowireModel(_wire(cfg), _dipole(cfg), free_space_coupling=w["free_space_coupling"], n_max=w["n_max"])


def _times(cfg, gamma_tot):
    t = cfg["time"]
    t_max = t["t_max"]
    if t_max is None:
        t_max = 20.0 / gamma_tot if gamma_tot > 0 else 20.0
    return np.linspace(0.0, t_max, t["points"])


def _initial(cfg, N):
    c0 = np.zeros(N, dtype=complex)
    c0[cfg["initial_emitter"] - 1] = 1.0
    return c0


def _calibrated(cfg, geom):
    """Nanowire couplings for ``geom`` plus the matching ideal parameters."""
    model = _nanowire_model(cfg)
    sigma = model.self_energy(geom)
    if geom.N < 2:
        diag = complex(sigma.values[0, 0])
        k_g = spp_mode(model.spec).k_g
        cal = Calibration(0.0, -2 * diag.imag, diag.real, k_g, 2 * math.pi / k_g.real, 0.0)
    else:
        cal = calibrate(sigma, geom, spp_mode(model.spec).k_g)
    return model, sigma, cal


def _ideal_calibration(mode):
    k = complex(mode.k_g)
    lam = 2 * math.pi / k.real if k.real != 0 else math.inf
    return Calibration(mode.gamma_g, mode.gamma_tot, mode.delta_L, k, lam, 0.0)


# -- output ---------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


class _Outputs:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files = []

    def csv(self, name, header, rows):
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(name)

    def json(self, name, data):
        with open(self.root / name, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.files.append(name)

    def svg(self, name, *args, **kw):
        line_plot(self.root / name, *args, **kw)
        self.files.append(name)


def _prob_header(N):
    return ["t [1/gamma0]"] + [f"P_{n} [1]" for n in range(1, N + 1)]


def _calibration_dict(cal):
    d = cal.as_dict()
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


# -- experiments ----------------------------------------------------------------


def cmd_transport(cfg, out, threads=1):
    """Excitation transport along the chain and the wave-front zero times."""
    geom = _geometry(cfg)
    c0 = _initial(cfg, geom.N)
    curves = []
    if cfg["model"] == "ideal":
        mode = _mode(cfg)
        times = _times(cfg, mode.gamma_tot)
        if mode.beta == 1.0:
            traj = evolve(c0, times, mode, geom)
        else:
            traj = evolve_matrix_exp(effective_hamiltonian(ideal_selfenergy(mode, geom), mode.delta_L), c0, times)
        curves.append(("ideal", traj.probabilities))
        gamma_g = mode.gamma_g
    else:
        _, sigma, cal = _calibrated(cfg, geom)
        times = _times(cfg, cal.gamma_tot)
        traj = evolve_matrix_exp(effective_hamiltonian(sigma), c0, times)
        curves.append(("nanowire", traj.probabilities))
        if geom.N >= 2:
            curves.append(("calibrated", evolve(c0, times, cal.mode_model(), geom).probabilities))
        out.json("calibration.json", _calibration_dict(cal))
        gamma_g = cal.gamma_g

    rows = []
    for tag, p in curves:
        rows.extend([t, *p[:, j], tag] for j, t in enumerate(times))
    out.csv("transport.csv", _prob_header(geom.N) + ["model"], rows)

    families = cfg["fronts"]["families"]
    front_rows = []
    if gamma_g > 0:
        for k in range(1, families + 1):
            for n in range(2, geom.N + 1):
                exact = exact_zero_times(n, gamma_g)
                front_rows.append([k, n, exact[k - 1] if len(exact) >= k else None, front_zero_times(n, gamma_g, k)])
    out.csv("fronts.csv", ["family [1]", "emitter [1]", "t_exact [1/gamma0]", "t_bessel [1/gamma0]"], front_rows)

    if cfg["svg"]:
        tag, p = curves[0]
        out.svg("transport.svg", times, [(f"P_{n + 1}", p[n]) for n in range(geom.N)], title=f"transport ({tag})",
                xlabel="t [1/gamma0]", ylabel="P_n")


def cmd_coupling_map(cfg, out, threads=1):
    """Forward and backward wire-mediated coupling versus axial separation."""
    cm = cfg["coupling_map"]
    spec = _wire(cfg)
    dz = np.linspace(cm["dz_min"], cm["dz_max"], cm["points"])
    n_max = cfg["nanowire"]["n_max"]
    delta_rho = cfg["chain"]["delta_rho"]
    header, cols, plots = ["dz [lambda0]"], [dz], []
    for pol in ("sigma_plus", "sigma_minus", "linear"):
        d = _dipole(cfg, pol)
        fwd = np.abs(coupling_pairs(dz, spec, d, delta_rho, n_max, cm["free_space_coupling"]))
        bwd = np.abs(coupling_pairs(-dz, spec, d, delta_rho, n_max, cm["free_space_coupling"]))
        header += [f"abs_forward_{pol} [hbar gamma0]", f"abs_backward_{pol} [hbar gamma0]", f"ratio_{pol} [1]"]
        cols += [fwd, bwd, fwd / bwd]
        plots += [(f"{pol} fwd", fwd), (f"{pol} bwd", bwd)]
    out.csv("coupling.csv", header, zip(*cols))
    if cfg["svg"]:
        out.svg("coupling.svg", dz, plots, title="coupling strength", xlabel="dz [lambda0]", ylabel="|Sigma| [hbar gamma0]")


def _phased_state(mode, geom, xi):
    spacing = geom.z[1] - geom.z[0] if geom.N > 1 else 0.0
    # ramp psi = phi - xi with phi the propagation phase per spacing
    return dicke_state(geom.N, complex(mode.k_g).real * spacing - xi)


def cmd_collective(cfg, out, threads=1):
    """Initial collective decay rate of phased Dicke states and their decay."""
    mode, geom = _mode(cfg), _geometry(cfg)
    if np.any(np.abs(np.diff(geom.z, 2)) > 1e-12 * max(1.0, np.abs(geom.z).max())):
        raise ConfigError("chain.positions: collective runs need a regular chain")
    N = geom.N
    xis = np.linspace(0.0, 2 * math.pi, cfg["collective"]["xi_points"])
    rows = []
    for xi in xis:
        state = _phased_state(mode, geom, xi)
        closed = gamma_init_closed(xi, N, mode)
        slope = gamma_init_slope(state, mode, geom)
        rows.append([xi, closed, slope, closed / mode.gamma_tot if mode.gamma_tot > 0 else None])
    out.csv(
        "gamma0.csv",
        ["xi [rad]", "gamma0_closed [gamma0]", "gamma0_slope [gamma0]", "gamma0_over_gamma_tot [1]"],
        rows,
    )

    times = _times(cfg, mode.gamma_tot)
    cols, header = [times], ["t [1/gamma0]"]
    for label, xi in (("xi0", 0.0), ("xipi", math.pi)):
        state = _phased_state(mode, geom, xi)
        exact = np.abs(survival_amplitude(times, state, mode, geom)) ** 2
        approx = np.exp(-gamma_init_closed(xi, N, mode) * times)
        cols += [exact, approx]
        header += [f"P_exact_{label} [1]", f"P_exp_{label} [1]"]
    out.csv("dicke_dynamics.csv", header, zip(*cols))
    if cfg["svg"]:
        out.svg("gamma0.svg", xis, [("closed form", [r[1] for r in rows]), ("slope fit", [r[2] for r in rows])],
                title=f"initial decay rate, N = {N}", xlabel="xi [rad]", ylabel="Gamma0 [gamma0]")


def cmd_disorder(cfg, out, threads=1):
    """Transport averaged over random axial displacements."""
    geom = _geometry(cfg)
    c0 = _initial(cfg, geom.N)
    dis = cfg["disorder"]
    if cfg["model"] == "ideal":
        model = _mode(cfg)
        cal = _ideal_calibration(model)
    else:
        model, _, cal = _calibrated(cfg, _geometry(cfg))
    amp = dis["amplitude"] * (cal.lambda_pl if dis["amplitude_unit"] == "lambda_pl" else 1.0)
    if not math.isfinite(amp):
        raise ConfigError("disorder.amplitude_unit: lambda_pl is undefined for k_g with zero real part")
    times = _times(cfg, cal.gamma_tot)
    dcfg = DisorderConfig(dis["realizations"], amp, cfg["seed"], dis["max_retries"])
    ens = disorder_ensemble(geom, dcfg, model, c0, times, threads=threads)

    header = _prob_header(geom.N)
    out.csv("disorder_mean.csv", header, ([t, *ens.mean[:, j]] for j, t in enumerate(times)))
    width = max(3, len(str(dis["realizations"] - 1)))
    for i, p in enumerate(ens.probabilities):
        out.csv(f"realizations/realization_{i:0{width}d}.csv", header, ([t, *p[:, j]] for j, t in enumerate(times)))
    out.csv(
        "realizations/positions.csv",
        ["realization [1]"] + [f"z_{n} [lambda0]" for n in range(1, geom.N + 1)],
        ([i, *z] for i, z in enumerate(ens.positions)),
    )
    if cfg["model"] == "nanowire" and geom.N >= 2:
        ref = evolve(c0, times, cal.mode_model(), geom).probabilities
        out.csv("analytic.csv", header, ([t, *ref[:, j]] for j, t in enumerate(times)))
    out.json("calibration.json", _calibration_dict(cal) | {"disorder_amplitude": amp})
    if cfg["svg"]:
        out.svg("disorder.svg", times, [(f"P_{n + 1}", ens.mean[n]) for n in range(geom.N)],
                title=f"mean over {dis['realizations']} realizations", xlabel="t [1/gamma0]", ylabel="P_n")


COMMANDS = {
    "transport": cmd_transport,
    "coupling-map": cmd_coupling_map,
    "collective": cmd_collective,
    "disorder": cmd_disorder,
}


def build_parser():
    p = argparse.ArgumentParser(prog="chiralchain", description="Chirally coupled emitter-chain experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for ensemble runs")
    p.add_argument("--svg", action="store_true", help="also render SVG plots")
    return p


def run(experiment, raw_config, out_dir, seed=None, threads=1, svg=False):
    """Run one experiment programmatically; returns the resolved config."""
    cfg = resolve_config(raw_config, experiment, seed)
    if svg:
        cfg["svg"] = True
    out = _Outputs(out_dir)
    COMMANDS[experiment](cfg, out, threads=max(1, int(threads)))
    out.json(
        "manifest.json",
        {"artifact": "chiralchain", "version": __version__, "experiment": experiment, "seed": cfg["seed"],
         "config": cfg, "files": sorted(out.files)},
    )
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: config: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: config: invalid JSON ({exc})", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("error: seed: must be non-negative", file=sys.stderr)
        return 2
    try:
        run(args.experiment, raw, args.out, args.seed, args.threads, args.svg)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ChiralChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
