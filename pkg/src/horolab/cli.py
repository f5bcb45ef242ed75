"""Experiment runner: one subcommand per experiment, TOML config, CSV/JSON out.

Every run writes its data files plus a manifest.json recording the resolved
configuration, the seed, the package version, and a sha256 digest of each
emitted file. Reruns with the same manifest settings reproduce the outputs
byte for byte: all randomness flows from one seeded generator per run, drawn
in a fixed order, and floats are serialized with repr.

Exit codes: 0 success, 2 configuration problems, 3 precision exhaustion,
4 a verifier subcommand found a violated inequality (the witness is written
to witness.json in the output directory).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib as _toml_reader

    _TOML_BINARY = True
except ImportError:  # python < 3.11
    import toml as _toml_reader

    _TOML_BINARY = False

from . import __version__
from .density import (
    FiniteSignal,
    IndexSet,
    maximal_inequality_check,
    merge_subsequences,
    shift_maximal_check,
)
from .errors import ConfigError, PrecisionExhausted, VerifierFailure
from .groups import AlgebraElement
from .measures import (
    default_dictionary,
    density_one_extraction,
    dictionary_sha256,
    orbit_discrepancy_series,
    translated_measure_discrepancy,
)
from .orbits import OrbitSpec, TimeSequence, orbit_coordinate_arrays, orbit_prefix
from .ratner import (
    UnipotentSchedule,
    appendix_vn,
    ball_overlap_ratio,
    correlation_decay_experiment,
    correlation_fit,
    correlations_to_csv,
    example_theta_limit,
    jm_conjugation,
    lln_experiment,
)
from .sl2 import d_h_compute, decompose_adjoint, jacobson_morozov
from .surface import TestFunction, haar_integral, reduce


def _load_toml(path: str) -> dict:
    try:
        if _TOML_BINARY:
            with open(path, "rb") as fh:
                return _toml_reader.load(fh)
        with open(path, "r", encoding="utf-8") as fh:
            return _toml_reader.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except Exception as exc:
        raise ConfigError("cannot parse config %s: %s" % (path, exc))


def _resolve(defaults: dict, overrides: dict) -> dict:
    unknown = sorted(set(overrides) - set(defaults))
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
    out = dict(defaults)
    out.update(overrides)
    return out


def _times_from(cfg: dict) -> TimeSequence:
    kind = cfg["times_kind"]
    if kind == "exponential":
        return TimeSequence(kind=kind, rate=float(cfg["rate"]), scale=float(cfg.get("scale", 1.0)))
    if kind == "polynomial":
        return TimeSequence(kind=kind, degree=float(cfg.get("degree", 0.0)))
    if kind == "primes":
        return TimeSequence(kind=kind)
    if kind == "explicit":
        return TimeSequence(kind=kind, values=tuple(float(v) for v in cfg.get("values", ())))
    raise ConfigError("unknown times_kind %r" % (kind,))


def _policy_from(precision_bits):
    if precision_bits is None:
        return None
    bits = int(precision_bits)

    def policy(_n):
        return bits

    return policy


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _base_bump(width: float) -> TestFunction:
    return TestFunction(kind="distance-bump", center=reduce(0.0, 1.0, 0.0), width=float(width))


def _direction_from(rows) -> AlgebraElement:
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ConfigError("direction must be a 2x2 matrix")
    return AlgebraElement.from_rows(tuple(tuple(r) for r in rows), 192)


# ---------------------------------------------------------------------------
# subcommand runners: cfg -> (files dict, manifest extras)


def run_orbit(cfg, seed, precision_bits):
    times = _times_from(cfg)
    n_max = int(cfg["n_max"])
    spec = OrbitSpec(
        times=times,
        theta=float(cfg["theta"]),
        n_max=n_max,
        precision_policy=_policy_from(precision_bits),
    )
    points = orbit_prefix(spec, n_max)
    bits = spec.policy_bits(n_max)
    rows = ["n,t_n,x,y,theta,word_length"]
    for n, pt in enumerate(points, 1):
        x, y, th = pt.as_floats()
        rows.append(
            "%d,%r,%r,%r,%r,%d"
            % (n, float(times.value(n, bits)), x, y, th, len(pt.word))
        )
    return {"orbit.csv": "\n".join(rows) + "\n"}, {}


def run_discrepancy(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    times = _times_from(cfg)
    theta = cfg["theta"]
    if theta is None:
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
    dictionary = default_dictionary(int(cfg["dictionary_seed"]))
    spec = OrbitSpec(
        times=times,
        theta=float(theta),
        n_max=int(cfg["n_max"]),
        precision_policy=_policy_from(precision_bits),
    )
    series = orbit_discrepancy_series(
        spec, rng, dictionary=dictionary, haar_samples=int(cfg["haar_samples"])
    )
    extraction = density_one_extraction(
        series, float(cfg["epsilon"]), float(cfg["burn_in_fraction"])
    )
    report = {
        "epsilon": float(cfg["epsilon"]),
        "burn_in_fraction": float(cfg["burn_in_fraction"]),
        "theta": float(theta),
        "good_lengths": extraction.lengths.to_json_dict(),
        "upper_density": extraction.upper_density,
        "final_discrepancy": series.values[-1],
    }
    files = {
        "discrepancy.csv": series.to_csv(),
        "extraction.json": _json_text(report),
    }
    return files, {"dictionary_sha256": dictionary_sha256(dictionary)}


def run_translated(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    times = _times_from(cfg)
    dictionary = default_dictionary(int(cfg["dictionary_seed"]))
    series = translated_measure_discrepancy(
        times,
        None,
        int(cfg["n_max"]),
        int(cfg["m_theta"]),
        rng,
        dictionary=dictionary,
        haar_samples=int(cfg["haar_samples"]),
    )
    report = {
        "final_discrepancy": series.values[-1],
        "first_discrepancy": series.values[0],
        "decreased": series.values[-1] < series.values[0],
        "noise_floor_final": series.noise_floors[-1],
    }
    files = {
        "translated.csv": series.to_csv(),
        "translated.json": _json_text(report),
    }
    return files, {"dictionary_sha256": dictionary_sha256(dictionary)}


def _doubling_psi(u: np.ndarray) -> np.ndarray:
    return np.exp(-((u - 0.5) ** 2) / 0.02) - 0.25


def run_maximal(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    alpha = float(cfg["alpha"])
    beta = float(cfg["beta"])
    n_avg = int(cfg["n_avg"])
    length = int((1 + beta) * n_avg) + 2
    source = cfg["source"]
    if source == "doubling":
        from scipy import integrate

        n_samples = int(cfg["n_samples"])
        starts = rng.uniform(0.0, 1.0, n_samples)
        vals = np.empty((n_samples, length))
        cur = starts.copy()
        for k in range(length):
            vals[:, k] = _doubling_psi(cur)
            cur = (2.0 * cur) % 1.0
        psi_l1, _err = integrate.quad(lambda u: abs(float(_doubling_psi(np.array(u)))), 0.0, 1.0)
        l1_se = 0.0
    elif source == "horocycle":
        n_samples = int(cfg["n_samples"])
        times = TimeSequence(kind="exponential", rate=float(cfg["rate"]))
        phi = _base_bump(cfg["bump_width"])
        thetas = rng.uniform(0.0, 2.0 * math.pi, n_samples)
        vals = np.empty((n_samples, length))
        for i, th in enumerate(thetas):
            spec = OrbitSpec(
                times=times,
                theta=float(th),
                n_max=length,
                precision_policy=_policy_from(precision_bits),
            )
            x, y, t = orbit_coordinate_arrays(orbit_prefix(spec, length))
            vals[i] = phi.evaluate_batch(x, y, t)
        psi_l1, l1_se = haar_integral(phi, int(cfg["haar_samples"]), rng)
    else:
        raise ConfigError("source must be 'doubling' or 'horocycle'")
    res = maximal_inequality_check(vals, alpha, beta, n_avg, psi_l1)
    report = {
        "source": source,
        "shift": res.j_n,
        "nu_mass": res.nu_mass,
        "bound": res.bound,
        "sampling_slack": res.sampling_slack,
        "psi_l1": psi_l1,
        "psi_l1_std_error": l1_se,
        "ok": res.ok,
    }
    files = {"maximal.json": _json_text(report)}
    if not res.ok:
        raise VerifierFailure("weak-type maximal bound violated", witness=report)
    return files, {}


def run_shift_maximal(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    count = int(cfg["count"])
    if count < 1:
        raise ConfigError("count must be positive")
    worst = 0.0
    for i in range(count):
        size = int(rng.integers(1, int(cfg["size_max"])))
        start = int(rng.integers(-20, 20))
        values = tuple(float(v) for v in np.round(rng.normal(size=size), 3))
        alpha = float(rng.uniform(float(cfg["alpha_lo"]), float(cfg["alpha_hi"])))
        res = shift_maximal_check(FiniteSignal(start, values), alpha)
        if res.rhs > 0:
            worst = max(worst, res.lhs / res.rhs)
        if not res.ok:
            witness = {
                "index": i,
                "start": start,
                "values": list(values),
                "alpha": alpha,
                "lhs": res.lhs,
                "rhs": res.rhs,
                "exceptional_set": list(res.e_alpha),
            }
            raise VerifierFailure("shift maximal inequality violated", witness=witness)
    report = {"count": count, "all_ok": True, "worst_lhs_over_rhs": worst}
    return {"shift_maximal.json": _json_text(report)}, {}


def run_merge(cfg, seed, precision_bits):
    horizon = int(cfg["horizon"])
    j_count = int(cfg["j_count"])
    if horizon < 2 or j_count < 1:
        raise ConfigError("need horizon >= 2 and j_count >= 1")
    family = []
    for j in range(1, j_count + 1):
        # drop every 2^j-th index: density exactly 1 - 2^-j at every scale
        members = tuple(n for n in range(1, horizon + 1) if n % 2**j)
        family.append((IndexSet(members, horizon), 2.0**-j, 100 * 2**j))
    res = merge_subsequences(family)
    rows = ["j,M_j,block_density"]
    for j, m_j, dens in res.blocks:
        rows.append("%d,%d,%r" % (j, m_j, dens))
    report = {
        "achieved_density": res.achieved_density,
        "complete": res.complete,
        "horizon": horizon,
        "blocks": len(res.blocks),
    }
    files = {"merge.csv": "\n".join(rows) + "\n", "merge.json": _json_text(report)}
    return files, {}


def run_conjugate(cfg, seed, precision_bits):
    mode = cfg["mode"]
    times = _times_from(cfg)
    n_count = int(cfg["n_count"])
    if mode == "example":
        alpha = float(cfg["alpha"])
        traj = example_theta_limit(alpha, times, n_count)
        limit = np.array([[1.0, alpha], [0.0, 1.0]])
        rows = ["n,m00,m01,m10,m11,dist_to_limit"]
        final_error = None
        for n, g in enumerate(traj, 1):
            m = g.to_float_array()
            final_error = float(np.max(np.abs(m - limit)))
            rows.append(
                "%d,%r,%r,%r,%r,%r"
                % (
                    n,
                    float(m[0, 0]),
                    float(m[0, 1]),
                    float(m[1, 0]),
                    float(m[1, 1]),
                    final_error,
                )
            )
        report = {"mode": mode, "alpha": alpha, "final_error": final_error}
        return {"conjugate.csv": "\n".join(rows) + "\n", "conjugate.json": _json_text(report)}, {}
    if mode == "jm":
        exp = jm_conjugation(_direction_from(cfg["direction"]), times, n_count)
    elif mode == "appendix":
        from .groups import GroupElement, mul, rotation
        from .precision import prec_ctx

        import gmpy2

        rate = float(cfg["diag_rate"])
        if rate <= 0:
            raise ConfigError("diag_rate must be positive")
        seq = []
        bits = 256
        for n in range(1, n_count + 1):
            with prec_ctx(bits):
                s = gmpy2.exp(gmpy2.mpfr(rate) * n)
                rows_m = ((s, gmpy2.mpfr(0)), (gmpy2.mpfr(0), 1 / s))
            g = GroupElement(rows_m, bits)
            if cfg["pre_rotation"]:
                g = mul(rotation(float(cfg["pre_rotation"]), bits), g)
            seq.append(g)
        exp = appendix_vn(seq)
    else:
        raise ConfigError("mode must be 'example', 'jm', or 'appendix'")
    report = {
        "mode": mode,
        "degree": exp.degree,
        "scaling_mode": exp.scaling_mode,
        "converged_at": exp.converged_at,
        "selected": list(exp.selected),
        "unipotent_ok": exp.unipotent_ok,
        "centralizer_ok": exp.centralizer_ok,
        "limit": None if exp.limit is None else exp.limit.to_float_array().tolist(),
    }
    return {"conjugate.csv": exp.to_csv(), "conjugate.json": _json_text(report)}, {}


def run_correlations(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    times = _times_from(cfg)
    schedule = UnipotentSchedule(times=times, direction=_direction_from(cfg["direction"]))
    base = int(cfg["base_index"])
    pairs = [(base, base)] + [(base + int(g), base) for g in cfg["gaps"]]
    thick = cfg["thick_radius"]
    records = correlation_decay_experiment(
        _base_bump(cfg["bump_width"]),
        schedule,
        pairs,
        int(cfg["m_theta"]),
        rng,
        thick_radius=None if thick is None else float(thick),
    )
    slope, n_used = correlation_fit(records)
    far = [r for r in records if r.n != r.m]
    report = {
        "slope": slope,
        "pairs_in_fit": n_used,
        "all_far_below_noise": all(abs(r.estimate) <= 3.0 * r.std_error for r in far),
    }
    files = {
        "correlations.csv": correlations_to_csv(records),
        "fit.json": _json_text(report),
    }
    return files, {}


def run_lln(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    times = _times_from(cfg)
    schedule = UnipotentSchedule(times=times, direction=_direction_from(cfg["direction"]))
    thetas = rng.uniform(0.0, 2.0 * math.pi, int(cfg["m_theta"]))
    res = lln_experiment(_base_bump(cfg["bump_width"]), schedule, int(cfg["k_max"]), thetas)
    report = {
        "n_grid": list(res.n_grid),
        "median_abs": list(res.median_abs()),
        "second_moments": list(res.second_moments),
        "slope": res.slope,
    }
    return {"lln.csv": res.to_csv(), "lln.json": _json_text(report)}, {}


def run_jm(cfg, seed, precision_bits):
    rows = cfg["matrix"]
    triple = jacobson_morozov(tuple(tuple(r) for r in rows))
    decomp = decompose_adjoint(triple)
    report = {
        "triple": triple.to_json_dict(),
        "verified": triple.verify(),
        "weights": [
            {"weight": comp.weight, "dimension": comp.dimension}
            for comp in decomp.components
        ],
        "dimension_total": sum(c.dimension for c in decomp.components),
    }
    if triple.n == 2:
        report["d_h_so2"] = d_h_compute(decomp, [((0, 1), (-1, 0))])
    return {"jm.json": _json_text(report)}, {}


def run_ball_overlap(cfg, seed, precision_bits):
    rng = np.random.default_rng(seed)
    res = ball_overlap_ratio(
        cfg["group"],
        float(cfg["radius"]),
        float(cfg["displacement"]),
        int(cfg["m_samples"]),
        rng,
    )
    report = {
        "group": cfg["group"],
        "radius": float(cfg["radius"]),
        "displacement": float(cfg["displacement"]),
        "ratio": res.ratio,
        "std_error": res.std_error,
        "saturated": res.saturated,
    }
    return {"overlap.json": _json_text(report)}, {}


_TIMES_KEYS = {"times_kind": "exponential", "rate": 0.1, "degree": 0.0, "scale": 1.0, "values": []}


def _with_times(extra: dict) -> dict:
    out = dict(_TIMES_KEYS)
    out.update(extra)
    return out


_SUBCOMMANDS = {
    "orbit": (
        run_orbit,
        _with_times({"theta": 0.0, "n_max": 200}),
    ),
    "discrepancy": (
        run_discrepancy,
        _with_times(
            {
                "rate": 0.05,
                "theta": None,
                "n_max": 2000,
                "haar_samples": 200_000,
                "dictionary_seed": 0,
                "epsilon": 0.1,
                "burn_in_fraction": 0.2,
            }
        ),
    ),
    "translated": (
        run_translated,
        _with_times(
            {
                "rate": 0.2,
                "n_max": 200,
                "m_theta": 400,
                "haar_samples": 200_000,
                "dictionary_seed": 0,
            }
        ),
    ),
    "maximal": (
        run_maximal,
        {
            "source": "doubling",
            "n_samples": 1000,
            "alpha": 0.5,
            "beta": 0.25,
            "n_avg": 512,
            "rate": 0.1,
            "bump_width": 0.5,
            "haar_samples": 200_000,
        },
    ),
    "shift-maximal": (
        run_shift_maximal,
        {"count": 1000, "size_max": 50, "alpha_lo": 0.05, "alpha_hi": 2.0},
    ),
    "merge": (run_merge, {"horizon": 2_000_000, "j_count": 6}),
    "conjugate": (
        run_conjugate,
        _with_times(
            {
                "mode": "example",
                "alpha": 0.5,
                "rate": math.log(2.0),
                "n_count": 12,
                "direction": [[0, 1], [-1, 0]],
                "diag_rate": 1.0,
                "pre_rotation": 0.0,
            }
        ),
    ),
    "correlations": (
        run_correlations,
        _with_times(
            {
                "rate": 0.3,
                "direction": [[0, 1], [-1, 0]],
                "base_index": 6,
                "gaps": [5, 10, 15],
                "m_theta": 400,
                "bump_width": 0.5,
                "thick_radius": None,
            }
        ),
    ),
    "lln": (
        run_lln,
        _with_times(
            {
                "rate": 0.3,
                "direction": [[0, 1], [-1, 0]],
                "k_max": 6,
                "m_theta": 100,
                "bump_width": 0.5,
            }
        ),
    ),
    "jm": (run_jm, {"matrix": [[0, 1], [0, 0]]}),
    "ball-overlap": (
        run_ball_overlap,
        {"group": "sl2", "radius": 0.3, "displacement": 0.03, "m_samples": 100_000},
    ),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horolab",
        description="Run a horolab experiment and emit CSV/JSON plus a manifest.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--precision-bits", type=int, default=None)
        p.add_argument("--out", default=".", help="output directory")
        if name == "conjugate":
            p.add_argument("--mode", default=None, choices=["example", "jm", "appendix"])
            p.add_argument("--alpha", type=float, default=None)
    return parser


def _write_outputs(outdir: Path, files: dict) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, text in sorted(files.items()):
        data = text.encode("utf-8")
        (outdir / name).write_bytes(data)
        digests[name] = hashlib.sha256(data).hexdigest()
    return digests


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    runner, defaults = _SUBCOMMANDS[args.subcommand]
    outdir = Path(args.out)
    try:
        overrides = _load_toml(args.config) if args.config else {}
        if args.subcommand == "conjugate":
            if args.mode is not None:
                overrides["mode"] = args.mode
            if args.alpha is not None:
                overrides["alpha"] = args.alpha
        cfg = _resolve(defaults, overrides)
        files, extras = runner(cfg, args.seed, args.precision_bits)
        digests = _write_outputs(outdir, files)
        manifest = {
            "artifact_version": __version__,
            "subcommand": args.subcommand,
            "config": cfg,
            "seed": args.seed,
            "precision_bits": args.precision_bits,
            "outputs": digests,
        }
        manifest.update(extras)
        (outdir / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        print("precision exhausted: %s" % exc, file=sys.stderr)
        return 3
    except VerifierFailure as exc:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "witness.json").write_text(_json_text(exc.witness), encoding="utf-8")
        print("verifier failure: %s (witness.json written)" % exc, file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
