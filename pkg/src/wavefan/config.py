"""Key-value run configuration and system description files.

Run config: INI-like sections [law], [solver], [sweep], [output] whose keys
mirror the command-line flags; flags override file values. All diagnostics
carry file:line so a bad run can be traced to its source text.

System description file (eigen / nsystem): `n = N`, then matrix entries
A11.. / B11.. or flux components F1.. as expressions in u1..uN, plus
optional state vectors. Expressions use the grammar in exprgrammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

_SECTIONS = ("law", "solver", "sweep", "output")


def parse_config(path: str) -> dict:
    """Read a sectioned key-value file into {section: {key: (value, line)}}."""
    out = {s: {} for s in _SECTIONS}
    section = None
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip().lower()
                if name not in _SECTIONS:
                    raise ConfigError(
                        f"{path}:{ln}: unknown section [{name}] "
                        f"(expected one of {', '.join(_SECTIONS)})"
                    )
                section = name
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value', got {line!r}")
            if section is None:
                raise ConfigError(f"{path}:{ln}: key outside any [section]")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.lower().replace("-", "_")
            if key in out[section]:
                raise ConfigError(
                    f"{path}:{ln}: duplicate key {key!r} in [{section}] "
                    f"(first at line {out[section][key][1]})"
                )
            out[section][key] = (val, ln)
    return out


def cfg_get(cfg: dict, section: str, key: str, default=None):
    """Raw string value or default."""
    entry = cfg.get(section, {}).get(key)
    return default if entry is None else entry[0]


def cfg_float(cfg, section, key, default=None):
    entry = cfg.get(section, {}).get(key)
    if entry is None:
        return default
    val, ln = entry
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"[{section}] {key} (line {ln}): {val!r} is not a number")


def cfg_int(cfg, section, key, default=None):
    entry = cfg.get(section, {}).get(key)
    if entry is None:
        return default
    val, ln = entry
    try:
        return int(val)
    except ValueError:
        raise ConfigError(f"[{section}] {key} (line {ln}): {val!r} is not an integer")


def cfg_float_list(cfg, section, key, default=None):
    entry = cfg.get(section, {}).get(key)
    if entry is None:
        return default
    val, ln = entry
    try:
        return [float(part) for part in val.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"[{section}] {key} (line {ln}): {val!r} is not a number list")


# --------------------------------------------------------------------------
# system description files


@dataclass
class SystemSpec:
    """Parsed eigen/nsystem description: n plus whichever blocks appear."""

    n: int
    a_entries: dict = field(default_factory=dict)
    b_entries: dict = field(default_factory=dict)
    f_sources: dict = field(default_factory=dict)
    states: dict = field(default_factory=dict)
    eta: float = 0.0
    y: float = 0.0
    samples: int = 0

    def flux_list(self):
        if not self.f_sources:
            return None
        missing = [k for k in range(1, self.n + 1) if k not in self.f_sources]
        if missing:
            raise ConfigError(f"system file: missing flux components F{missing}")
        return [self.f_sources[k] for k in range(1, self.n + 1)]


def _parse_vector(val: str, n: int, where: str):
    parts = [p for p in val.split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigError(f"{where}: expected {n} components, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"{where}: {val!r} is not a number list")


def parse_system_file(path: str) -> SystemSpec:
    """Read a system description: n, A/B entries, F components, states.

    Keys (case-insensitive): `n`, `Aij`, `Bij`, `Fk`, `eta`, and state
    vectors `u`, `wb`, `wr` as comma lists. Entries are stored as source
    strings; expression compilation happens at build time so errors name
    the offending entry.
    """
    n = None
    spec = None
    pending = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value', got {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.lower()
            if key == "n":
                if spec is not None:
                    raise ConfigError(f"{path}:{ln}: duplicate 'n =' line")
                try:
                    n = int(val)
                except ValueError:
                    raise ConfigError(f"{path}:{ln}: n must be an integer")
                if n < 1:
                    raise ConfigError(f"{path}:{ln}: n must be >= 1")
                spec = SystemSpec(n=n)
                for item in pending:
                    _system_key(spec, *item)
                pending = []
                continue
            if spec is None:
                pending.append((path, ln, key, val))
                continue
            _system_key(spec, path, ln, key, val)
    if spec is None:
        raise ConfigError(f"{path}: missing 'n = ...' line")
    return spec


def _system_key(spec: SystemSpec, path: str, ln: int, key: str, val: str) -> None:
    where = f"{path}:{ln}"
    n = spec.n
    if key in ("eta", "y"):
        try:
            setattr(spec, key, float(val))
        except ValueError:
            raise ConfigError(f"{where}: {key} must be a number")
        return
    if key == "samples":
        try:
            spec.samples = int(val)
        except ValueError:
            raise ConfigError(f"{where}: samples must be an integer")
        return
    if key in ("u", "wb", "wr"):
        spec.states[key] = _parse_vector(val, n, where)
        return
    if len(key) >= 2 and key[0] in "ab" and key[1:].isdigit():
        digits = key[1:]
        if len(digits) != 2:
            raise ConfigError(f"{where}: matrix keys are two single digits, e.g. a12")
        i, j = int(digits[0]), int(digits[1])
        if not (1 <= i <= n and 1 <= j <= n):
            raise ConfigError(f"{where}: index ({i},{j}) outside 1..{n}")
        target = spec.a_entries if key[0] == "a" else spec.b_entries
        if (i, j) in target:
            raise ConfigError(f"{where}: duplicate entry {key}")
        target[(i, j)] = val
        return
    if key[0] == "f" and key[1:].isdigit():
        k = int(key[1:])
        if not 1 <= k <= n:
            raise ConfigError(f"{where}: F{k} outside 1..{n}")
        if k in spec.f_sources:
            raise ConfigError(f"{where}: duplicate entry {key}")
        spec.f_sources[k] = val
        return
    raise ConfigError(f"{where}: unknown key {key!r}")
