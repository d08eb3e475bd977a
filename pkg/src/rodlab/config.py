"""INI-style run configuration with every default materialised.

Lists are comma separated; parameter points are written ``s:r`` (or ``p:q``).
Unknown sections or keys are rejected so typos surface immediately.
"""

from __future__ import annotations

import configparser
import os


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _points(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        a, b = item.split(":")
        out.append((float(a), float(b)))
    return out


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {options}, got {t!r}")
        return t
    return parse


# section -> key -> (parser, default text)
SCHEMA = {
    "run": {
        "jobs": (int, "0"),  # worker processes; 0 means one per available core
    },
    "evolve": {
        "n_points": (int, "256"),
        "gamma": (float, "1.0"),
        "dt": (float, "0.001"),
        "t_final": (float, "1.0"),
        "snapshot_every": (int, "100"),
        "initial": (_choice("zero", "cosine", "random"), "cosine"),
        "amplitude": (float, "0.1"),
        "seed": (int, "0"),
        "index": (float, "3.0"),
        "radius": (float, "1.0"),
    },
    "inequality": {
        "seed": (int, "0"),
        "ensemble_size": (int, "100"),
        "bandwidths": (_ints, "64, 128, 256, 512"),
        "commutator_points": (_points, "2:0.5, 2:1, 1.6:0.6"),
        "product_points": (_points, "2:0.5, 1.6:0.4, 2:0"),
        "kernel_points": (_points, "2:0.25, 2:0, 1.6:0"),
        "kernel_ks": (_ints, "1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024"),
        "peetre_pairs": (_points, "1:1, 2:2, 0.75:0.5, 1:2"),
        "peetre_shifts": (_floats, "1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024"),
        "nonperiodic_points": (_points, "2:1, 1.75:0.5, 1.7:0.3, 2:0.5"),
        "epsilon": (float, "0.01"),
    },
    "holder": {
        "points": (_points, "2:0.5, 2:1.5, 1.6:-0.5"),
        "radius": (float, "1.0"),
        "gamma": (float, "1.0"),
        "n_points": (int, "256"),
        "dt": (float, "0.001"),
        "t_final": (float, "1.0"),
        "eps": (_floats, ", ".join(repr(2.0 ** -j) for j in range(3, 11))),
        "seed": (int, "0"),
        "perturbation_seed": (int, "1"),
        "slope_tol": (float, "0.05"),
        "c0": (float, "1.0"),
        "max_over_time": (_bool, "false"),
    },
    "region_map": {
        "s_min": (float, "1.0"),
        "s_max": (float, "4.0"),
        "s_step": (float, "0.05"),
        "r_min": (float, "-1.0"),
        "r_max": (float, "3.95"),
        "r_step": (float, "0.05"),
    },
}


def load(path=None, sections=None) -> dict:
    """Parse ``path`` (or defaults only) into ``{section: {key: value}}``.

    Also returns the materialised text form under the ``"_text"`` key of each
    section, used for the manifest.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in SCHEMA[name]:
                raise ConfigError(f"unknown key [{name}] {key}")
    wanted = sections or list(SCHEMA)
    out = {}
    for name in wanted:
        values, text = {}, {}
        for key, (parse, default) in SCHEMA[name].items():
            raw = parser.get(name, key, fallback=default) if parser.has_section(name) else default
            try:
                values[key] = parse(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"[{name}] {key} = {raw!r}: {exc}") from exc
            text[key] = raw.strip()
        values["_text"] = text
        out[name] = values
    return out


def dump(cfg: dict) -> str:
    lines = []
    for name, values in cfg.items():
        lines.append(f"[{name}]")
        for key, raw in values["_text"].items():
            lines.append(f"{key} = {raw}")
        lines.append("")
    return "\n".join(lines)
