"""File formats: datasets, fitted models, predictions, model configs.

Datasets are text matrices with a one-line `d=..,n=..,has_oracle=..`
header; rows hold X, Y and (when the oracle flag is set) the generating
arc length and tangent.  Models are versioned JSON documents whose floats
round-trip exactly.  Model configs are flat `key = value` files with a
fixed vocabulary; unknown keys are errors, not warnings.
"""

import json
from pathlib import Path

import numpy as np

from .curves import CurveSpec, build_curve, normalize_to_reach
from .estimator import FitConfig, LocalRegressor, SliceStats, SvrModel
from .synthesis import Dataset, LinkSpec, ModelSpec

MODEL_FORMAT_VERSION = 1

_FLOAT_FMT = "%.17g"             # exact float64 round-trip


def save_dataset(path, ds):
    cols = [ds.X, ds.Y[:, None]]
    has_oracle = ds.oracle_t is not None and ds.oracle_tangent is not None
    if has_oracle:
        cols += [ds.oracle_t[:, None], ds.oracle_tangent]
    header = f"d={ds.d},n={ds.n},has_oracle={int(has_oracle)}"
    np.savetxt(path, np.concatenate(cols, axis=1), fmt=_FLOAT_FMT,
               delimiter=",", header=header, comments="")


def load_dataset(path):
    """Read a dataset written by save_dataset.  The seed is not stored in
    the file; loaded datasets carry seed = -1."""
    with open(path) as fh:
        header = fh.readline().strip()
    try:
        fields = dict(item.split("=") for item in header.split(","))
        d, n = int(fields["d"]), int(fields["n"])
        has_oracle = bool(int(fields["has_oracle"]))
    except (ValueError, KeyError):
        raise ValueError(f"malformed dataset header {header!r}") from None
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    want = 2 * d + 2 if has_oracle else d + 1
    if data.shape != (n, want):
        raise ValueError(f"expected {n} x {want} matrix, got {data.shape}")
    return Dataset(
        X=data[:, :d], Y=data[:, d],
        oracle_t=data[:, d + 1] if has_oracle else None,
        oracle_tangent=data[:, d + 2:] if has_oracle else None,
        seed=-1)


def _vec(a):
    return np.asarray(a, dtype=float).tolist()


def save_model(path, model):
    slices = []
    for s in model.slices:
        entry = {"h": s.h, "n": s.n_lh, "mean": _vec(s.mean),
                 "eigvals": _vec(s.eigvals), "sig_vec": _vec(s.sig_vec),
                 "H": s.H, "heavy": s.heavy}
        if s.basis is not None:
            entry["basis"] = [_vec(col) for col in s.basis.T]
        slices.append(entry)
    regressors = {}
    for h, reg in model.regressors.items():
        regressors[str(h)] = {
            "edges": _vec(reg.edges), "centers": _vec(reg.centers),
            "coefs": [None if c is None else _vec(c) for c in reg.coefs],
            "fallback": reg.fallback}
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "config": {"l": model.config.l, "j": model.config.j,
                   "m": model.config.m, "M": model.config.M,
                   "partition": model.config.partition,
                   "distance": model.config.distance,
                   "heavy_threshold_factor":
                       model.config.heavy_threshold_factor,
                   "strict_paper_fallback":
                       model.config.strict_paper_fallback},
        "n": model.n,
        "d": model.d,
        "range_knots": _vec(model.knots),
        "slices": slices,
        "regressors": regressors,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    config = FitConfig(**doc["config"])
    slices = []
    for entry in doc["slices"]:
        basis = entry.get("basis")
        slices.append(SliceStats(
            h=entry["h"], n_lh=entry["n"],
            mean=np.asarray(entry["mean"], dtype=float),
            eigvals=np.asarray(entry["eigvals"], dtype=float),
            H=entry["H"],
            sig_vec=np.asarray(entry["sig_vec"], dtype=float),
            heavy=entry["heavy"],
            basis=None if basis is None
            else np.asarray(basis, dtype=float).T))
    regressors = {}
    for key, reg in doc["regressors"].items():
        regressors[int(key)] = LocalRegressor(
            edges=np.asarray(reg["edges"], dtype=float),
            centers=np.asarray(reg["centers"], dtype=float),
            coefs=tuple(None if c is None else np.asarray(c, dtype=float)
                        for c in reg["coefs"]),
            fallback=reg["fallback"])
    return SvrModel(config=config, n=doc["n"], d=doc["d"],
                    knots=np.asarray(doc["range_knots"], dtype=float),
                    slices=tuple(slices),
                    heavy_indices=tuple(s.h for s in slices if s.heavy),
                    regressors=regressors)


def save_predictions(path, preds):
    np.savetxt(path, np.asarray(preds, dtype=float), fmt=_FLOAT_FMT,
               delimiter=",", header="prediction", comments="")


MODEL_CONFIG_KEYS = {
    "curve.kind", "curve.d", "curve.length", "curve.kappa", "curve.delta",
    "curve.a", "curve.amplitude", "curve.decay", "curve.scale",
    "curve.grid", "curve.normalize_reach",
    "link.kind", "link.s", "link.scale", "link.knots", "link.values",
    "sigma_gamma", "sigma_zeta", "trunc_frac",
}


def parse_flat_config(text, known_keys, prefixes=()):
    """`key = value` per line; '#' starts a comment; keys must be known
    (exactly, or by one of the allowed dotted prefixes)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', "
                             f"got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known_keys and not key.startswith(tuple(prefixes)):
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _number(value):
    try:
        return int(value)
    except ValueError:
        return float(value)


def _float_tuple(value):
    return tuple(float(part) for part in value.split(",") if part.strip())


def model_from_config(path):
    """Build a ModelSpec from a flat config file."""
    raw = parse_flat_config(Path(path).read_text(), MODEL_CONFIG_KEYS)
    return _model_from_items(raw)


def _model_from_items(raw):
    for key in ("curve.kind", "curve.d", "link.kind", "sigma_gamma"):
        if key not in raw:
            raise ValueError(f"config is missing required key {key!r}")

    curve_kw = {"kind": raw["curve.kind"], "d": int(raw["curve.d"])}
    for key, conv in (("length", float), ("kappa", float), ("delta", float),
                      ("a", float), ("amplitude", float), ("decay", str),
                      ("scale", float)):
        if f"curve.{key}" in raw:
            curve_kw[key] = conv(raw[f"curve.{key}"])
    grid = int(raw.get("curve.grid", 1000))
    curve = build_curve(CurveSpec(**curve_kw), grid_size=grid)
    if "curve.normalize_reach" in raw:
        curve = normalize_to_reach(curve, float(raw["curve.normalize_reach"]))

    link_kw = {"kind": raw["link.kind"]}
    if "link.s" in raw:
        link_kw["s"] = float(raw["link.s"])
    if "link.scale" in raw:
        link_kw["scale"] = float(raw["link.scale"])
    if "link.knots" in raw:
        link_kw["knots"] = _float_tuple(raw["link.knots"])
    if "link.values" in raw:
        link_kw["values"] = _float_tuple(raw["link.values"])
    link = LinkSpec(**link_kw)

    return ModelSpec(curve=curve, link=link,
                     sigma_gamma=float(raw["sigma_gamma"]),
                     sigma_zeta=float(raw.get("sigma_zeta", 0.0)),
                     trunc_frac=float(raw.get("trunc_frac", 0.9)))


FIT_CONFIG_KEYS = {
    "l", "j", "m", "M", "partition", "distance",
    "heavy_threshold_factor", "strict_paper_fallback",
}

EXPERIMENT_CONFIG_KEYS = MODEL_CONFIG_KEYS | {
    "n_grid", "reps", "train_frac", "strategy",
    "fixed.l", "fixed.j", "fixed.m",
    "oracle_n", "seed", "experiment_id",
    "partition", "distance", "heavy_threshold_factor",
    "strict_paper_fallback", "M", "timing",
}


def _bool(value):
    lowered = value.lower()
    if lowered in ("1", "true", "yes"):
        return True
    if lowered in ("0", "false", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def fit_config_from_file(path):
    """Build a FitConfig ('l' is required) from a flat config file."""
    raw = parse_flat_config(Path(path).read_text(), FIT_CONFIG_KEYS)
    if "l" not in raw:
        raise ValueError("fit config is missing required key 'l'")
    kwargs = {"l": int(raw["l"])}
    for key, conv in (("j", int), ("m", int), ("M", float),
                      ("partition", str), ("distance", str),
                      ("heavy_threshold_factor", float),
                      ("strict_paper_fallback", _bool)):
        if key in raw:
            kwargs[key] = conv(raw[key])
    return FitConfig(**kwargs)


def experiment_config_from_file(path, out=None):
    """Build an ExperimentConfig from one flat file holding both the model
    keys and the study keys; `abs_const.<name>` entries feed the tuning
    constants."""
    from .experiments import ExperimentConfig

    raw = parse_flat_config(Path(path).read_text(), EXPERIMENT_CONFIG_KEYS,
                            prefixes=("abs_const.",))
    model = _model_from_items({k: v for k, v in raw.items()
                               if k in MODEL_CONFIG_KEYS})
    if "n_grid" not in raw:
        raise ValueError("experiment config is missing required key "
                         "'n_grid'")
    abs_const = {key.split(".", 1)[1]: float(value)
                 for key, value in raw.items()
                 if key.startswith("abs_const.")}
    kwargs = {
        "model": model,
        "n_grid": tuple(int(part) for part in raw["n_grid"].split(",")
                        if part.strip()),
        "abs_const": abs_const or None,
        "out": out,
    }
    for key, field, conv in (
            ("reps", "reps", int),
            ("train_frac", "train_frac", float),
            ("strategy", "param_strategy", str),
            ("fixed.l", "fixed_l", int),
            ("fixed.j", "fixed_j", int),
            ("fixed.m", "fixed_m", int),
            ("oracle_n", "oracle_n", int),
            ("seed", "seed", int),
            ("experiment_id", "experiment_id", str),
            ("partition", "partition", str),
            ("distance", "distance", str),
            ("heavy_threshold_factor", "heavy_threshold_factor", float),
            ("strict_paper_fallback", "strict_paper_fallback", _bool),
            ("M", "M", float),
            ("timing", "timing", _bool)):
        if key in raw:
            kwargs[field] = conv(raw[key])
    return ExperimentConfig(**kwargs)
