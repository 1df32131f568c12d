"""Declarative JSON configuration for models, contamination and studies.

Top-level schema (all sections optional unless a command needs them):

    {
      "model":  {"preset": "simb"}                  # or explicit matrices:
                {"F": [[...]], "Z": [[...]], "Q": [[...]], "V": [[...]],
                 "a0": [...], "Q0": [[...]]},
      "horizon": 50,
      "seed": 42,
      "contamination": {
         "r_ao": 0.1, "r_io": 0.1,
         "dist_ao": {"kind": "cauchy", "loc": 5.0, "scale": 1.0},
         "dist_io": {"kind": "multivariate_cauchy",
                     "center": [0,0,0], "shape": [[...]]}
      },
      "bench": {
         "regimes": ["ideal", "ao", "io"], "runs": 10000, "score_time": 35,
         "variants": ["classical", "rls-ao", "rls-io"],
         "calibration": {"criterion": "radius", "value": 0.1},
         "seminorm": false, "threads": 1
      }
    }

Contaminant kinds: point_mass {value}, gaussian {mean, cov},
cauchy {loc, scale}, multivariate_cauchy {center, shape},
block_signal {mean_duration, amplitude_scale}.

Time-varying and nonlinear models cannot be spelled out as plain matrices;
they round-trip through their preset reference instead.
"""

import json

import numpy as np

from .bench import Scenario, default_variants
from .contamination import (BlockSignal, CauchyDist, ContaminationSpec,
                            GaussianDist, MultivariateCauchy, PointMass)
from .errors import ConfigError
from .filters import classical, rls_ao, rls_io
from .models import LinearSSM
from .presets import PRESET_NAMES, build_preset

_DIST_KINDS = ("point_mass", "gaussian", "cauchy", "multivariate_cauchy",
               "block_signal")


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _require(d, key, kinds, where):
    if key not in d:
        raise ConfigError(f"missing key {key!r} in {where}")
    v = d[key]
    if kinds is not None and not isinstance(v, kinds):
        raise ConfigError(f"{where}.{key} has the wrong type")
    return v


def model_from_config(section, T=200, seed=0):
    """Build a model from its config section (preset reference or matrices)."""
    if not isinstance(section, dict):
        raise ConfigError("'model' must be an object")
    if "preset" in section:
        name = section["preset"]
        if name not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
        args = section.get("preset_args", {})
        return build_preset(name, T=args.get("T", T), seed=args.get("seed", seed),
                            dt=args.get("dt", 1.0))
    try:
        return LinearSSM(
            F=np.asarray(_require(section, "F", list, "model"), dtype=float),
            Z=np.asarray(_require(section, "Z", list, "model"), dtype=float),
            Q=np.asarray(_require(section, "Q", list, "model"), dtype=float),
            V=np.asarray(_require(section, "V", list, "model"), dtype=float),
            a0=np.asarray(_require(section, "a0", list, "model"), dtype=float),
            Q0=np.asarray(_require(section, "Q0", list, "model"), dtype=float))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid model matrices: {exc}") from exc


def model_to_config(model):
    """Config section reconstructing an equivalent model.

    Presets dump as a preset reference (with their construction arguments);
    plain time-invariant linear models dump their matrices.
    """
    preset = getattr(model, "preset", None)
    if preset is not None:
        name, args = preset
        return {"preset": name, "preset_args": dict(args)}
    if isinstance(model, LinearSSM) and model.time_invariant:
        F, Z, Q, V = model.constant_matrices()
        return {"F": F.tolist(), "Z": Z.tolist(), "Q": Q.tolist(),
                "V": V.tolist(), "a0": model.a0.tolist(),
                "Q0": model.Q0.tolist()}
    raise ConfigError("only presets and time-invariant linear models can be "
                      "dumped to config form")


def dist_from_config(d):
    kind = _require(d, "kind", str, "contaminant")
    if kind == "point_mass":
        return PointMass(value=_require(d, "value", None, "point_mass"))
    if kind == "gaussian":
        return GaussianDist(mean=_require(d, "mean", None, "gaussian"),
                            cov=_require(d, "cov", list, "gaussian"))
    if kind == "cauchy":
        return CauchyDist(loc=d.get("loc", 0.0), scale=d.get("scale", 1.0))
    if kind == "multivariate_cauchy":
        return MultivariateCauchy(
            center=_require(d, "center", None, "multivariate_cauchy"),
            shape=_require(d, "shape", list, "multivariate_cauchy"))
    if kind == "block_signal":
        return BlockSignal(
            mean_duration=_require(d, "mean_duration", (int, float), "block_signal"),
            amplitude_scale=_require(d, "amplitude_scale", (int, float), "block_signal"))
    raise ConfigError(f"unknown contaminant kind {kind!r}; choose from {_DIST_KINDS}")


def dist_to_config(dist):
    if dist is None:
        return None
    if isinstance(dist, PointMass):
        return {"kind": "point_mass", "value": np.asarray(dist.value).tolist()}
    if isinstance(dist, GaussianDist):
        return {"kind": "gaussian", "mean": np.asarray(dist.mean).tolist(),
                "cov": np.asarray(dist.cov).tolist()}
    if isinstance(dist, CauchyDist):
        return {"kind": "cauchy", "loc": np.asarray(dist.loc).tolist(),
                "scale": np.asarray(dist.scale).tolist()}
    if isinstance(dist, MultivariateCauchy):
        return {"kind": "multivariate_cauchy",
                "center": np.asarray(dist.center).tolist(),
                "shape": np.asarray(dist.shape).tolist()}
    if isinstance(dist, BlockSignal):
        return {"kind": "block_signal", "mean_duration": dist.mean_duration,
                "amplitude_scale": dist.amplitude_scale}
    raise ConfigError(f"cannot serialize contaminant {dist!r}")


def contamination_from_config(section):
    if section is None:
        return None
    if not isinstance(section, dict):
        raise ConfigError("'contamination' must be an object")
    return ContaminationSpec(
        r_ao=float(section.get("r_ao", 0.0)),
        r_io=float(section.get("r_io", 0.0)),
        dist_ao=dist_from_config(section["dist_ao"]) if section.get("dist_ao") else None,
        dist_io=dist_from_config(section["dist_io"]) if section.get("dist_io") else None)


def contamination_to_config(spec):
    if spec is None:
        return None
    return {"r_ao": spec.r_ao, "r_io": spec.r_io,
            "dist_ao": dist_to_config(spec.dist_ao),
            "dist_io": dist_to_config(spec.dist_io)}


def variant_from_name(name, b=None, norm=None):
    key = str(name).lower()
    if key == "classical":
        return classical()
    if key in ("rls-ao", "rls_ao", "ao"):
        return rls_ao(b=b, norm=norm)
    if key in ("rls-io", "rls_io", "io"):
        return rls_io(b=b, norm=norm)
    raise ConfigError(f"unknown filter variant {name!r}; "
                      "choose classical, rls-ao or rls-io")


def scenario_from_config(cfg, model=None, **overrides):
    """Assemble a Scenario from a config dict plus keyword overrides."""
    bench = cfg.get("bench", {})
    if not isinstance(bench, dict):
        raise ConfigError("'bench' must be an object")
    cal = bench.get("calibration", {"criterion": "radius", "value": 0.1})
    variants = tuple(variant_from_name(v) for v in
                     bench.get("variants", ("classical", "rls-ao", "rls-io"))) \
        if "variants" in bench else default_variants()
    kwargs = dict(
        model=model if model is not None else cfg.get("model", {}).get("preset"),
        regimes=tuple(bench.get("regimes", ("ideal", "ao", "io"))),
        n_runs=int(bench.get("runs", 10_000)),
        T=int(cfg.get("horizon", 50)),
        t_star=int(bench.get("score_time", 35)),
        seed=int(cfg.get("seed", 0)),
        variants=variants,
        calibration_criterion=cal.get("criterion", "radius"),
        calibration_value=float(cal.get("value", 0.1)),
        contamination=contamination_from_config(cfg.get("contamination")),
        seminorm=bool(bench.get("seminorm", False)),
        threads=int(bench.get("threads", 1)))
    kwargs.update(overrides)
    if kwargs["model"] is None:
        raise ConfigError("no model given: add a 'model' section or use --preset")
    return Scenario(**kwargs)
