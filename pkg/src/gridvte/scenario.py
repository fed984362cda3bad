"""Scenario configuration files (TOML) and the objects they describe.

See ``docs/config-schema.md`` for the full key reference. Validation errors
carry the dotted path of the offending key so the CLI can report it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from gridvte import ansatz as ans
from gridvte import diagonalizer as diag
from gridvte.grid import GridHamiltonian, GridSpec, PotentialSpec, WavepacketParams, gaussian_wavepacket
from gridvte.grid import load_tabulated_potential
from gridvte.vqte import AdaptiveRK45, EvolutionConfig, ExactStatevector, ExplicitRK8, FixedRK4, ShotBased

PRESET_DIR = Path(__file__).with_name("presets")

SOLVERS = ("rk45", "rk8", "rk4")
WRAPPERS = ("position", "momentum", "local_diagonal", "mixed")


class ConfigError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path
        self.message = message


# --- typed views of the config tables ---------------------------------------------


@dataclass(frozen=True)
class AnsatzSpec:
    form: str
    depth: int
    wrapper: str = "position"
    cut: float = 0.0
    position_depth: int = 0
    momentum_depth: int = 0
    diagonalizer_files: tuple[str, ...] = ()


@dataclass(frozen=True)
class InitialSpec:
    mode: str = "fit"  # "fit" or "embedded"
    seed: int = 0
    threshold: float = 0.99
    restarts: int = 10
    max_iter: int = 500
    theta: tuple[float, ...] = ()
    fit_fidelity: float | None = None


@dataclass(frozen=True)
class OutputSpec:
    trajectory: bool = True
    snapshots: tuple[float, ...] = ()
    density_cuts: tuple[float, ...] = ()


@dataclass
class Scenario:
    name: str
    description: str
    grid: GridSpec
    potential: PotentialSpec
    mass: float
    wavepacket: WavepacketParams
    ansatz: AnsatzSpec
    evolution: EvolutionConfig
    initial: InitialSpec
    outputs: OutputSpec
    raw: dict = field(repr=False, default_factory=dict)
    source: Path | None = None

    def hamiltonian(self) -> GridHamiltonian:
        return GridHamiltonian.build(self.grid, self.potential, self.mass)

    def initial_state(self) -> np.ndarray:
        return gaussian_wavepacket(self.grid, self.wavepacket)

    def diagonalizers(self, ham: GridHamiltonian) -> list[diag.Diagonalizer]:
        spec = self.ansatz
        if spec.diagonalizer_files:
            base = self.source.parent if self.source else Path(".")
            return [diag.load_diagonalizer(base / f)[0] for f in spec.diagonalizer_files]
        return diag.ld_diagonalizers(ham, spec.cut)

    def build_ansatz(self, ham: GridHamiltonian | None = None) -> tuple[ans.Ansatz, list]:
        spec = self.ansatz
        found: list = []
        if spec.wrapper == "local_diagonal":
            found = self.diagonalizers(ham if ham is not None else self.hamiltonian())
            provenance = ";".join(d.source for d in found)
            wrapper = ans.SpaceWrapper.local_diagonal([d.matrix for d in found], provenance)
        elif spec.wrapper == "mixed":
            wrapper = ans.SpaceWrapper("mixed", position_depth=spec.position_depth, momentum_depth=spec.momentum_depth)
        else:
            wrapper = ans.SpaceWrapper(spec.wrapper)
        a = ans.Ansatz(spec.form, spec.depth, self.grid.num_qubits, wrapper, self.grid.num_dims)
        return a, found


@dataclass
class Batch:
    name: str
    description: str
    kind: str
    members: list[Scenario]
    raw: dict = field(repr=False, default_factory=dict)


# --- parsing helpers ------------------------------------------------------------------


def _table(doc: dict, key: str, required: bool = True) -> dict:
    if key not in doc:
        if required:
            raise ConfigError(key, "missing table")
        return {}
    val = doc[key]
    if not isinstance(val, dict):
        raise ConfigError(key, "expected a table")
    return val


def _num(tab: dict, key: str, path: str, default: Any = None, positive: bool = False) -> float:
    if key not in tab:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing value")
        return default
    val = tab[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{path}.{key}", "must be positive")
    return float(val)


def _int(tab: dict, key: str, path: str, default: int | None = None, minimum: int | None = None) -> int:
    if key not in tab:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing value")
        return default
    val = tab[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}")
    return val


def _vec(tab: dict, key: str, path: str, length: int | None = None, default=None) -> tuple[float, ...]:
    if key not in tab:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing value")
        return tuple(default)
    val = tab[key]
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        val = [val]
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        raise ConfigError(f"{path}.{key}", "expected a number or a list of numbers")
    if length is not None and len(val) != length:
        raise ConfigError(f"{path}.{key}", f"expected {length} entries, got {len(val)}")
    if not all(math.isfinite(v) for v in val):
        raise ConfigError(f"{path}.{key}", "entries must be finite")
    return tuple(float(v) for v in val)


def _str(tab: dict, key: str, path: str, choices=None, default: str | None = None) -> str:
    if key not in tab:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing value")
        return default
    val = tab[key]
    if not isinstance(val, str):
        raise ConfigError(f"{path}.{key}", f"expected a string, got {val!r}")
    if choices is not None and val not in choices:
        raise ConfigError(f"{path}.{key}", f"{val!r} is not one of {', '.join(choices)}")
    return val


def _unknown(tab: dict, allowed: set, path: str) -> None:
    extra = sorted(set(tab) - allowed)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown key")


def parse_estimator(text: str) -> ExactStatevector | ShotBased:
    if text == "exact":
        return ExactStatevector()
    if text.startswith("shots:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad shot count in {text!r}") from None
        if n < 1:
            raise ValueError("shot count must be >= 1")
        return ShotBased(n)
    raise ValueError(f"estimator must be 'exact' or 'shots:N', got {text!r}")


# --- scenario parsing -------------------------------------------------------------------


def _grid(doc: dict) -> GridSpec:
    g = _table(doc, "grid")
    _unknown(g, {"num_dims", "qubits_per_dim", "length", "origin"}, "grid")
    nd = _int(g, "num_dims", "grid", 1, minimum=1)
    q = _int(g, "qubits_per_dim", "grid", minimum=1)
    length = _vec(g, "length", "grid", nd)
    origin = _vec(g, "origin", "grid", nd, default=[-0.5 * v for v in length])
    try:
        return GridSpec(nd, q, length, origin)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from None


def _potential(doc: dict, base: Path) -> PotentialSpec:
    p = _table(doc, "potential")
    _unknown(p, {"kind", "coeffs", "file"}, "potential")
    kind = _str(p, "kind", "potential", ("free", "harmonic", "eckart", "mexican_hat", "tabulated"))
    if kind == "tabulated":
        path = _str(p, "file", "potential")
        try:
            return load_tabulated_potential(base / path)
        except (OSError, ValueError) as exc:
            raise ConfigError("potential.file", str(exc)) from None
    coeffs = _vec(p, "coeffs", "potential", default=())
    try:
        return PotentialSpec(kind, coeffs)
    except ValueError as exc:
        raise ConfigError("potential.coeffs", str(exc)) from None


def _ansatz(doc: dict, grid: GridSpec) -> AnsatzSpec:
    a = _table(doc, "ansatz")
    _unknown(
        a,
        {"form", "depth", "wrapper", "cut", "position_depth", "momentum_depth", "diagonalizer_files"},
        "ansatz",
    )
    form = _str(a, "form", "ansatz", ans.FORMS)
    wrapper = _str(a, "wrapper", "ansatz", WRAPPERS, default="position")
    if wrapper == "mixed":
        depth = 0
        pd = _int(a, "position_depth", "ansatz", minimum=0)
        md = _int(a, "momentum_depth", "ansatz", minimum=0)
    else:
        depth = _int(a, "depth", "ansatz", minimum=0)
        pd = md = 0
    cut = _num(a, "cut", "ansatz", 0.0)
    if cut < 0:
        raise ConfigError("ansatz.cut", "must be >= 0")
    files = a.get("diagonalizer_files", [])
    if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
        raise ConfigError("ansatz.diagonalizer_files", "expected a list of file names")
    if files and len(files) != grid.num_dims:
        raise ConfigError("ansatz.diagonalizer_files", f"need one file per dimension ({grid.num_dims})")
    if grid.num_qubits < 2 and (depth or pd or md):
        raise ConfigError("ansatz.depth", "entangling layers need at least two qubits")
    return AnsatzSpec(form, depth, wrapper, cut, pd, md, tuple(files))


def _evolution(doc: dict, outputs: OutputSpec) -> EvolutionConfig:
    e = _table(doc, "evolution")
    allowed = {
        "t_total", "epsilon", "rcond", "solver", "step", "rtol", "atol", "max_step", "record_points",
        "record_times", "estimator", "seed", "derivative", "max_rhs_calls",
    }
    _unknown(e, allowed, "evolution")
    t_total = _num(e, "t_total", "evolution")
    if t_total < 0:
        raise ConfigError("evolution.t_total", "must be >= 0")
    solver_name = _str(e, "solver", "evolution", SOLVERS, default="rk45")
    if solver_name == "rk4":
        solver = FixedRK4(_num(e, "step", "evolution", positive=True))
    else:
        solver = ExplicitRK8() if solver_name == "rk8" else AdaptiveRK45()
    if "record_times" in e:
        times = list(_vec(e, "record_times", "evolution"))
    else:
        n = _int(e, "record_points", "evolution", 151, minimum=1)
        times = list(np.linspace(0.0, t_total, n)) if t_total > 0 else [0.0]
    # snapshot times join the record grid so every snapshot has parameters
    for s in outputs.snapshots:
        if s < 0 or s > t_total:
            raise ConfigError("outputs.snapshots", f"time {s} outside [0, t_total]")
    times = sorted(set(times) | set(outputs.snapshots))
    try:
        estimator = parse_estimator(_str(e, "estimator", "evolution", default="exact"))
    except ValueError as exc:
        raise ConfigError("evolution.estimator", str(exc)) from None
    kw = {}
    for key in ("epsilon", "rcond", "rtol", "atol"):
        if key in e:
            kw[key] = _num(e, key, "evolution", positive=True)
    if "max_step" in e:
        kw["max_step"] = _num(e, "max_step", "evolution", positive=True)
    if "max_rhs_calls" in e:
        kw["max_rhs_calls"] = _int(e, "max_rhs_calls", "evolution", minimum=1)
    try:
        return EvolutionConfig(
            t_total=t_total,
            solver=solver,
            record_times=tuple(times),
            estimator=estimator,
            rng_seed=_int(e, "seed", "evolution", 0),
            derivative=_str(e, "derivative", "evolution", ("forward", "analytic"), default="forward"),
            **kw,
        )
    except ValueError as exc:
        raise ConfigError("evolution", str(exc)) from None


def _initial(doc: dict, num_params: int) -> InitialSpec:
    i = _table(doc, "initial", required=False)
    _unknown(i, {"mode", "seed", "threshold", "restarts", "max_iter", "theta", "fit_fidelity"}, "initial")
    mode = _str(i, "mode", "initial", ("fit", "embedded"), default="fit")
    theta: tuple[float, ...] = ()
    if mode == "embedded":
        theta = _vec(i, "theta", "initial", num_params)
    threshold = _num(i, "threshold", "initial", 0.99)
    if not 0 < threshold <= 1:
        raise ConfigError("initial.threshold", "must lie in (0, 1]")
    fit_fid = _num(i, "fit_fidelity", "initial", float("nan"))
    return InitialSpec(
        mode=mode,
        seed=_int(i, "seed", "initial", 0),
        threshold=threshold,
        restarts=_int(i, "restarts", "initial", 10, minimum=0),
        max_iter=_int(i, "max_iter", "initial", 500, minimum=1),
        theta=theta,
        fit_fidelity=None if math.isnan(fit_fid) else fit_fid,
    )


def _outputs(doc: dict) -> OutputSpec:
    o = _table(doc, "outputs", required=False)
    _unknown(o, {"trajectory", "snapshots", "density_cuts"}, "outputs")
    traj = o.get("trajectory", True)
    if not isinstance(traj, bool):
        raise ConfigError("outputs.trajectory", "expected true or false")
    cuts = _vec(o, "density_cuts", "outputs", default=())
    if any(c < 0 for c in cuts):
        raise ConfigError("outputs.density_cuts", "cuts must be >= 0")
    return OutputSpec(traj, tuple(sorted(set(_vec(o, "snapshots", "outputs", default=())))), cuts)


def scenario_from_dict(doc: dict, source: Path | None = None) -> Scenario:
    base = source.parent if source else Path(".")
    top = {"name", "description", "mass", "grid", "potential", "wavepacket", "ansatz", "evolution", "initial", "outputs"}
    _unknown(doc, top, "")
    name = _str(doc, "name", "name")
    description = _str(doc, "description", "description", default="")
    mass = _num(doc, "mass", "mass", 1.0, positive=True)
    grid = _grid(doc)
    potential = _potential(doc, base)
    if potential.kind == "mexican_hat" and grid.num_dims != 2:
        raise ConfigError("potential.kind", "mexican_hat needs a two-dimensional grid")
    w = _table(doc, "wavepacket")
    _unknown(w, {"x0", "p0", "width"}, "wavepacket")
    nd = grid.num_dims
    try:
        wp = WavepacketParams(_vec(w, "x0", "wavepacket", nd), _vec(w, "p0", "wavepacket", nd), _vec(w, "width", "wavepacket", nd))
    except ValueError as exc:
        raise ConfigError("wavepacket.width", str(exc)) from None
    for d in range(nd):
        lo = grid.origin[d]
        if not lo <= wp.x0[d] <= lo + grid.length[d]:
            raise ConfigError("wavepacket.x0", f"x0[{d}] = {wp.x0[d]} lies outside the box")
    ansatz_spec = _ansatz(doc, grid)
    outputs = _outputs(doc)
    evolution = _evolution(doc, outputs)
    sc = Scenario(name, description, grid, potential, mass, wp, ansatz_spec, evolution, InitialSpec(), outputs, doc, source)
    try:
        num_params = ans.build_ansatz(
            ansatz_spec.form,
            grid.num_qubits,
            ansatz_spec.depth,
            ans.SpaceWrapper(
                "mixed" if ansatz_spec.wrapper == "mixed" else "position",
                position_depth=ansatz_spec.position_depth,
                momentum_depth=ansatz_spec.momentum_depth,
            ),
            grid.num_dims,
        )[0].num_params
    except ValueError as exc:
        raise ConfigError("ansatz", str(exc)) from None
    sc.initial = _initial(doc, num_params)
    return sc


# --- files ------------------------------------------------------------------------------------


def resolve(name_or_path: str) -> Path:
    """A config path, or the name of a shipped preset."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    preset = PRESET_DIR / f"{name_or_path}.toml"
    if preset.is_file():
        return preset
    raise ConfigError("config", f"no such file or preset: {name_or_path}")


def read_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None


def load(name_or_path: str) -> Scenario | Batch:
    path = resolve(name_or_path)
    doc = read_toml(path)
    if "batch" in doc:
        return _batch(doc, path)
    return scenario_from_dict(doc, path)


def _batch(doc: dict, path: Path) -> Batch:
    _unknown(doc, {"name", "description", "batch"}, "")
    b = _table(doc, "batch")
    _unknown(b, {"kind", "members"}, "batch")
    kind = _str(b, "kind", "batch", ("width", "mesh", "plain"), default="plain")
    names = b.get("members")
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        raise ConfigError("batch.members", "expected a non-empty list of config names")
    members = []
    for n in names:
        local = path.parent / f"{n}.toml"
        target = local if local.is_file() else resolve(n)
        member = read_toml(target)
        if "batch" in member:
            raise ConfigError("batch.members", f"{n} is itself a batch")
        try:
            members.append(scenario_from_dict(member, target))
        except ConfigError as exc:
            raise ConfigError(f"batch.members[{n}].{exc.field}", exc.message) from None
    return Batch(_str(doc, "name", "name"), _str(doc, "description", "description", default=""), kind, members, doc)


def list_presets() -> list[tuple[str, str]]:
    out = []
    for p in sorted(PRESET_DIR.glob("*.toml")):
        doc = read_toml(p)
        out.append((p.stem, str(doc.get("description", ""))))
    return out
