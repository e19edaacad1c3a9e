#!/usr/bin/env python3
"""
Problem / Result Documents
==========================

JSON interchange for the gdl command-line tool and the task dispatcher.

A problem document looks like

    {
      "group":   {"orders": [4]},
      "lattice": {"generators": [[1, 0], [0, 2]], "weight": 1},
      "windows": {"d": 1, "n": 1, "data": [[[[1, 0], [0, 0], [0, 0], [0, 0]]]]},
      "task": "bounds",
      "task_params": {}
    }

Complex numbers are [re, im] pairs; window data is indexed data[k][j][t]
with t the lex index of the group element. Instead of "data" a window
block may name a generator: {"kind": "discrete_gaussian", "sigma": 2.0,
"d": 1, "n": 1} or {"kind": "random", "seed": 7, "d": 2, "n": 3}.

Results carry the task echo, the outputs, tool version, seed and wall
time. Floats are written with 17 significant digits.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Real
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import IO_CONFIG, TOLERANCE_CONFIG
from lattice.errors import InvalidInputError, NumericFailure
from lattice.group_core import (
    GroupSpec,
    Subgroup,
    as_weight,
    enumerate_subgroups,
    make_group,
    quotient_point_mass,
    subgroup_closure,
    weil_verify,
)
from lattice.phase_space import PhaseSpace
from gabor.gabor_engine import (
    GaborSystem,
    WindowFamily,
    bessel_bound,
    canonical_dual,
    canonical_tight,
    density_check,
    dual_pair_residual,
    frame_bounds,
    riesz_bounds,
)
from gabor.duality_suite import (
    Verdict,
    adjoint_system,
    bessel_duality_check,
    duality_certificate,
    figa_residual,
    janssen_residual,
    periodization_residual,
    wexler_raz_check,
)
from gabor.frame_construction import (
    full_plane_tight,
    gram_schmidt,
    minimal_window_search,
    random_family,
    refine_until_frame,
    window_generator,
    WindowKind,
)
from heisenberg.module_algebra import (
    associativity_residual,
    block_associativity_residual,
    family_inner,
    idempotent_residual,
    matrix_lhs,
    matrix_rhs,
    module_frame_energy,
    module_norm_report,
    range_residual,
)
from interface.spectrogram import emit_spectrogram

logger = logging.getLogger("cli_io")

TASKS = (
    'adjoint',
    'covolume',
    'bounds',
    'riesz-bounds',
    'dual',
    'tight',
    'check-figa',
    'check-wexler-raz',
    'check-duality',
    'check-associativity',
    'check-weil',
    'construct',
    'module-norm',
    'spectrogram',
    'subgroups',
)

_DOCUMENT_KEYS = {'group', 'lattice', 'windows', 'task', 'task_params'}


# =========================================================================
# JSON PARSING AND WRITING
# =========================================================================

def _reject_constant(name):
    raise InvalidInputError(f"non-finite number {name} in document")


def _finite_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise InvalidInputError(f"non-finite number {text} in document")
    return value


def parse_json(text) -> dict:
    """Parse a JSON object; malformed text, NaN and Infinity are invalid input."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant, parse_float=_finite_float)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError("document must be a JSON object")
    return doc


def complex_array(value, what: str) -> np.ndarray:
    """Nested arrays ending in [re, im] pairs -> complex ndarray."""
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{what} must be nested arrays of [re, im] pairs") from None
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise InvalidInputError(f"{what} must be nested arrays of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains NaN or Inf")
    return arr[..., 0] + 1j * arr[..., 1]


def complex_to_json(arr) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def to_plain(value):
    """Reduce results to JSON-ready Python values (complex -> [re, im])."""
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return complex_to_json(value)
        return to_plain(value.tolist())
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, Real):
        return float(value)
    if hasattr(value, 'to_dict'):
        return to_plain(value.to_dict())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise NumericFailure(f"non-finite value {value!r} in result")
    text = format(value, f".{IO_CONFIG['float_digits']}g")
    if not any(c in text for c in '.en'):
        text += '.0'
    return text


def _is_leaf(value) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))


def _encode(value, level: int, indent: int):
    if isinstance(value, float):
        yield _format_float(value)
    elif _is_leaf(value):
        yield json.dumps(value)
    elif isinstance(value, list):
        if all(_is_leaf(v) for v in value):
            yield '[' + ', '.join(''.join(_encode(v, 0, indent)) for v in value) + ']'
            return
        pad = '\n' + ' ' * (indent * (level + 1))
        yield '['
        for i, item in enumerate(value):
            yield (',' if i else '') + pad
            yield from _encode(item, level + 1, indent)
        yield '\n' + ' ' * (indent * level) + ']'
    elif isinstance(value, dict):
        if not value:
            yield '{}'
            return
        pad = '\n' + ' ' * (indent * (level + 1))
        yield '{'
        for i, (key, item) in enumerate(value.items()):
            yield (',' if i else '') + pad + json.dumps(key) + ': '
            yield from _encode(item, level + 1, indent)
        yield '\n' + ' ' * (indent * level) + '}'
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value, indent: int = 2) -> str:
    """JSON text with full double precision."""
    return ''.join(_encode(to_plain(value), 0, indent))


# =========================================================================
# DOCUMENTS
# =========================================================================

def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise InvalidInputError(f"{what} must be an integer, got {value!r}")
    return int(value)


@dataclass(eq=False)
class WindowSpec:
    """Window block of a problem: explicit data or a named generator."""

    d: int
    n: int
    data: Optional[np.ndarray] = None
    kind: Optional[str] = None
    sigma: Optional[float] = None
    seed: Optional[int] = None

    @classmethod
    def from_dict(cls, raw, group: GroupSpec) -> "WindowSpec":
        if not isinstance(raw, dict):
            raise InvalidInputError("windows must be an object")
        unknown = set(raw) - {'d', 'n', 'data', 'kind', 'sigma', 'seed'}
        if unknown:
            raise InvalidInputError(f"unknown window fields: {sorted(unknown)}")
        if 'data' in raw and 'kind' in raw:
            raise InvalidInputError("windows take either data or kind, not both")
        if 'data' in raw:
            data = complex_array(raw['data'], "window data")
            if data.ndim != 3:
                raise InvalidInputError(f"window data must be indexed [k][j][t], got shape {data.shape}")
            d, n, length = data.shape
            if length != group.order:
                raise InvalidInputError(f"windows have length {length}, group has order {group.order}")
            if 'd' in raw and _as_int(raw['d'], "d") != d or 'n' in raw and _as_int(raw['n'], "n") != n:
                raise InvalidInputError(f"declared d, n do not match data of shape {data.shape}")
            return cls(d, n, data=data)
        if 'kind' not in raw:
            raise InvalidInputError("windows need data or kind")
        try:
            kind = WindowKind(raw['kind']).value
        except ValueError:
            raise InvalidInputError(f"unknown window kind {raw['kind']!r}") from None
        d = _as_int(raw.get('d', 1), "d")
        n = _as_int(raw.get('n', 1), "n")
        if d < 1 or n < 1:
            raise InvalidInputError(f"need d, n >= 1, got d={d}, n={n}")
        if kind != WindowKind.RANDOM.value and (d, n) != (1, 1):
            raise InvalidInputError(f"kind {kind!r} gives a single window; use d = n = 1 or explicit data")
        sigma = raw.get('sigma')
        if sigma is not None:
            if isinstance(sigma, bool) or not isinstance(sigma, Real):
                raise InvalidInputError(f"sigma must be a number, got {sigma!r}")
            sigma = float(sigma)
        seed = raw.get('seed')
        if seed is not None:
            seed = _as_int(seed, "window seed")
        return cls(d, n, kind=kind, sigma=sigma, seed=seed)

    def build(self, group: GroupSpec, seed: int) -> WindowFamily:
        if self.data is not None:
            return WindowFamily(group, self.data)
        kind = WindowKind(self.kind)
        if kind is WindowKind.RANDOM:
            return random_family(group, self.d, self.n, seed if self.seed is None else self.seed)
        g = window_generator(kind, group, sigma=self.sigma, seed=self.seed)
        return WindowFamily.single(group, g)

    def to_dict(self) -> dict:
        if self.data is not None:
            return {'d': self.d, 'n': self.n, 'data': complex_to_json(self.data)}
        out = {'kind': self.kind, 'd': self.d, 'n': self.n}
        if self.sigma is not None:
            out['sigma'] = self.sigma
        if self.seed is not None:
            out['seed'] = self.seed
        return out


@dataclass(eq=False)
class ProblemDocument:
    """A validated problem: group, optional lattice and windows, task and parameters."""

    orders: Tuple[int, ...]
    generators: Optional[List[Tuple[int, ...]]] = None
    weight: Fraction = Fraction(1)
    windows: Optional[WindowSpec] = None
    task: Optional[str] = None
    task_params: dict = field(default_factory=dict)

    @cached_property
    def group(self) -> GroupSpec:
        return make_group(self.orders)

    @classmethod
    def from_dict(cls, doc) -> "ProblemDocument":
        if not isinstance(doc, dict):
            raise InvalidInputError("document must be a JSON object")
        unknown = set(doc) - _DOCUMENT_KEYS
        if unknown:
            raise InvalidInputError(f"unknown document fields: {sorted(unknown)}")

        group_raw = doc.get('group')
        if not isinstance(group_raw, dict) or 'orders' not in group_raw:
            raise InvalidInputError("document needs group.orders")
        group = make_group(group_raw['orders'])

        generators = None
        weight = Fraction(1)
        lattice_raw = doc.get('lattice')
        if lattice_raw is not None:
            if not isinstance(lattice_raw, dict):
                raise InvalidInputError("lattice must be an object")
            gens = lattice_raw.get('generators', [])
            if not isinstance(gens, list):
                raise InvalidInputError("lattice.generators must be a list of phase points")
            phase_orders = group.orders + group.orders
            generators = []
            for gen in gens:
                if not isinstance(gen, list) or len(gen) != len(phase_orders):
                    raise InvalidInputError(
                        f"generator {gen!r} must have {len(phase_orders)} integer coordinates")
                generators.append(tuple(_as_int(v, "generator coordinate") % m
                                        for v, m in zip(gen, phase_orders)))
            weight = as_weight(lattice_raw.get('weight', 1))

        windows = None
        if doc.get('windows') is not None:
            windows = WindowSpec.from_dict(doc['windows'], group)

        task = doc.get('task')
        if task is not None and task not in TASKS:
            raise InvalidInputError(f"unknown task {task!r}")
        params = doc.get('task_params', {})
        if params is None:
            params = {}
        if not isinstance(params, dict):
            raise InvalidInputError("task_params must be an object")
        return cls(group.orders, generators, weight, windows, task, dict(params))

    def to_dict(self) -> dict:
        out = {'group': {'orders': list(self.orders)}}
        if self.generators is not None:
            weight = self.weight.numerator if self.weight.denominator == 1 else str(self.weight)
            out['lattice'] = {'generators': [list(g) for g in self.generators], 'weight': weight}
        if self.windows is not None:
            out['windows'] = self.windows.to_dict()
        if self.task is not None:
            out['task'] = self.task
        out['task_params'] = self.task_params
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemDocument):
            return NotImplemented
        return to_plain(self.to_dict()) == to_plain(other.to_dict())


@dataclass
class ResultDocument:
    """Outputs of one task run."""

    task: str
    outputs: dict
    tool_version: str = IO_CONFIG['tool_version']
    seed: int = IO_CONFIG['default_seed']
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            'task': self.task,
            'tool_version': self.tool_version,
            'seed': self.seed,
            'wall_time_ms': self.wall_time_ms,
            'outputs': self.outputs,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ResultDocument":
        try:
            return cls(doc['task'], doc['outputs'], doc['tool_version'], doc['seed'], doc['wall_time_ms'])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"not a result document: {exc}") from None


def load_problem(text) -> ProblemDocument:
    return ProblemDocument.from_dict(parse_json(text))


# =========================================================================
# TASKS
# =========================================================================

# random streams, one per generated input
_STREAM_F1, _STREAM_F2, _STREAM_H, _STREAM_F, _STREAM_WEIL = range(5)


class RunContext:
    """Lazily built objects shared by the task handlers of one run."""

    def __init__(self, problem: ProblemDocument, seed: int, tolerance: Optional[float], png: bool):
        self.problem = problem
        self.params = problem.task_params
        self.seed = seed
        self.tolerance = tolerance
        self.png = png

    @cached_property
    def group(self) -> GroupSpec:
        return self.problem.group

    @cached_property
    def space(self) -> PhaseSpace:
        return PhaseSpace(self.group)

    @cached_property
    def lattice(self) -> Subgroup:
        if self.problem.generators is None:
            raise InvalidInputError("this task needs a lattice")
        return subgroup_closure(self.space.phase, self.problem.generators, self.problem.weight)

    @cached_property
    def windows(self) -> WindowFamily:
        if self.problem.windows is None:
            raise InvalidInputError("this task needs windows")
        return self.problem.windows.build(self.group, self.seed)

    @cached_property
    def system(self) -> GaborSystem:
        return GaborSystem(self.windows, self.lattice)

    def flag(self, name: str, default: bool = False) -> bool:
        value = self.params.get(name, default)
        if not isinstance(value, bool):
            raise InvalidInputError(f"task parameter {name} must be true or false")
        return value

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def signal(self, name: str, shape, stream: int) -> np.ndarray:
        """Parameter `name` as complex data of the given shape, or a seeded random draw."""
        if name in self.params:
            values = complex_array(self.params[name], name)
            if values.size != math.prod(shape):
                raise InvalidInputError(f"{name} must have {math.prod(shape)} entries, got {values.size}")
            return values.reshape(shape)
        rng = self.rng(stream)
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def family_param(self, name: str) -> Optional[WindowFamily]:
        raw = self.params.get(name)
        if raw is None:
            return None
        family = WindowSpec.from_dict(raw, self.group).build(self.group, self.seed)
        if not family.same_shape(self.windows):
            raise InvalidInputError(f"{name} must have the shape of the windows {self.windows.shape}")
        return family


def _verdict(ok: bool) -> str:
    return (Verdict.PASS if ok else Verdict.FAIL).value


def task_adjoint(ctx: RunContext) -> dict:
    lattice = ctx.lattice
    adjoint = ctx.space.adjoint_subgroup(lattice)
    s = ctx.space.covolume(lattice)
    return {
        'lattice': lattice.to_dict(),
        'adjoint': adjoint.to_dict(),
        'elements': [list(e) for e in adjoint.elements],
        'weight': float(adjoint.weight),
        'covolume': float(s),
        'covolume_exact': str(s),
        'adjoint_covolume': float(ctx.space.covolume(adjoint.with_weight(1))),
        'size_product': lattice.size * adjoint.size,
    }


def task_covolume(ctx: RunContext) -> dict:
    lattice = ctx.lattice
    adjoint = ctx.space.adjoint_subgroup(lattice)
    s = ctx.space.covolume(lattice)
    # unit weights on both sides: s(Lambda) s(adjoint) = 1
    s_adjoint = ctx.space.covolume(adjoint.with_weight(1))
    return {
        'covolume': float(s),
        'covolume_exact': str(s),
        'counting_covolume_exact': str(Fraction(ctx.group.order, lattice.size)),
        'adjoint_covolume_exact': str(s_adjoint),
        'reciprocity_exact': str(ctx.space.covolume(lattice.with_weight(1)) * s_adjoint),
        'quotient_point_mass_exact': str(quotient_point_mass(ctx.space.phase, lattice)),
        'lattice_size': lattice.size,
        'adjoint_size': adjoint.size,
    }


def task_bounds(ctx: RunContext) -> dict:
    report = frame_bounds(ctx.system, ctx.tolerance)
    out = report.to_dict()
    out['density'] = density_check(ctx.system, ctx.tolerance).to_dict()
    return out


def task_riesz_bounds(ctx: RunContext) -> dict:
    use_adjoint = ctx.flag('adjoint')
    reference = ctx.params.get('reference_covolume')
    if reference is not None:
        reference = as_weight(reference)
    sys = ctx.system
    if use_adjoint:
        target = adjoint_system(sys)
        if reference is None:
            reference = sys.covolume
    else:
        target = sys
    report = riesz_bounds(target, reference_covolume=reference, tolerance=ctx.tolerance)
    out = report.to_dict()
    out['system'] = 'adjoint' if use_adjoint else 'lattice'
    out['reference_covolume'] = float(reference) if reference is not None else 1 / float(target.weight)
    return out


def task_dual(ctx: RunContext) -> dict:
    dual = canonical_dual(ctx.system, ctx.tolerance)
    return {
        'dual_windows': dual.to_dict(),
        'dual_pair_residual': dual_pair_residual(ctx.system, dual),
        'frame_bounds': frame_bounds(ctx.system, ctx.tolerance).to_dict(include_spectrum=False),
    }


def task_tight(ctx: RunContext) -> dict:
    tight = canonical_tight(ctx.system, ctx.tolerance)
    bounds = frame_bounds(ctx.system.with_windows(tight), ctx.tolerance)
    return {
        'tight_windows': tight.to_dict(),
        'tight_bounds': bounds.to_dict(include_spectrum=False),
    }


def task_check_figa(ctx: RunContext) -> dict:
    g = ctx.windows
    h = ctx.family_param('dual_windows')
    if h is None:
        h = g
    shape = (g.d, g.group.order)
    f1 = ctx.signal('f1', shape, _STREAM_F1)
    f2 = ctx.signal('f2', shape, _STREAM_F2)
    figa = figa_residual(f1, f2, g, h, ctx.lattice)
    janssen = janssen_residual(f1, f2, g, h)
    periodized = periodization_residual(f1, f2, g, h, ctx.lattice)
    scale = max(1.0, float(np.linalg.norm(f1) * np.linalg.norm(f2)
                           * np.sqrt(g.norm_squared() * h.norm_squared())))
    threshold = TOLERANCE_CONFIG['identity'] * scale
    return {
        'figa_residual': figa,
        'janssen_residual': janssen,
        'periodization_residual': periodized,
        'threshold': threshold,
        'verdict': _verdict(max(figa, janssen, periodized) < threshold),
    }


def task_check_wexler_raz(ctx: RunContext) -> dict:
    h = ctx.family_param('dual_windows')
    source = 'given'
    if h is None:
        h = canonical_dual(ctx.system, ctx.tolerance)
        source = 'canonical'
    report = wexler_raz_check(ctx.windows, h, ctx.lattice)
    out = report.to_dict()
    out['dual_source'] = source
    out['verdict'] = _verdict(report.is_dual_pair)
    return out


def task_check_duality(ctx: RunContext) -> dict:
    cert = duality_certificate(ctx.system, ctx.tolerance)
    out = cert.to_dict()
    out['degenerate_agree'] = cert.degenerate_agree
    out['bessel'] = bessel_duality_check(ctx.windows, ctx.lattice).to_dict()
    return out


def task_check_associativity(ctx: RunContext) -> dict:
    g = ctx.windows
    lattice = ctx.lattice
    f = WindowFamily(g.group, ctx.signal('f', g.shape, _STREAM_F))
    h = WindowFamily(g.group, ctx.signal('h', g.shape, _STREAM_H))
    out = {
        'block_associativity_residual': block_associativity_residual(f, g, h, lattice),
        'associativity_residual': associativity_residual(f.data[0, 0], g.data[0, 0], h.data[0, 0], lattice),
        'trace_residual': max(abs(matrix_lhs(f, g, lattice).trace() - family_inner(f, g)),
                              abs(matrix_rhs(g, f, lattice).trace() - family_inner(f, g))),
    }
    if g.d == 1:
        out['module_frame_energy'] = module_frame_energy(f.data[0, 0], g, lattice).to_dict()
    if frame_bounds(ctx.system, ctx.tolerance).holds:
        dual = canonical_dual(ctx.system, ctx.tolerance)
        out['idempotent_residual'] = idempotent_residual(matrix_lhs(g, dual, lattice))
        out['range_residual'] = range_residual(g, dual, lattice)
    else:
        out['idempotent_residual'] = None
        out['range_residual'] = None
    checked = [v for k, v in out.items() if k.endswith('_residual') and v is not None]
    out['verdict'] = _verdict(max(checked) < TOLERANCE_CONFIG['idempotent'] * max(1.0, f.norm_squared()
                                                                                   + h.norm_squared()
                                                                                   + g.norm_squared()))
    return out


def task_check_weil(ctx: RunContext) -> dict:
    phase = ctx.space.phase
    F = ctx.signal('F', (phase.order,), _STREAM_WEIL)
    weil = weil_verify(phase, ctx.lattice, F)
    poisson = ctx.space.poisson_residual(F, ctx.lattice)
    threshold = TOLERANCE_CONFIG['identity'] * max(1.0, float(np.sum(np.abs(F))))
    return {
        'weil_residual': weil,
        'poisson_residual': poisson,
        'quotient_point_mass_exact': str(quotient_point_mass(phase, ctx.lattice)),
        'threshold': threshold,
        'verdict': _verdict(max(weil, poisson) < threshold),
    }


def _seed_family(ctx: RunContext) -> WindowFamily:
    """Orthonormalized super window for the constructions (default: first d point masses)."""
    if ctx.problem.windows is None:
        d = _as_int(ctx.params.get('d', 1), "d")
        if d < 1 or d > ctx.group.order:
            raise InvalidInputError(f"d must be in [1, {ctx.group.order}], got {d}")
        components = list(np.eye(ctx.group.order, dtype=complex)[:d])
    else:
        if ctx.windows.n != 1:
            raise InvalidInputError(f"construction seeds have one window (n = 1), got n = {ctx.windows.n}")
        components = list(ctx.windows.data[:, 0, :])
    return WindowFamily.from_super(ctx.group, gram_schmidt(components))


def task_construct(ctx: RunContext) -> dict:
    strategy = ctx.params.get('strategy', 'refine')
    if strategy == 'refine':
        result = refine_until_frame(_seed_family(ctx), ctx.lattice, ctx.params.get('mode'), ctx.tolerance)
        return {'strategy': strategy, **result.to_dict()}
    if strategy == 'full_plane':
        seed = _seed_family(ctx)
        result = full_plane_tight(ctx.group, seed.d, list(seed.data[:, 0, :]))
        return {'strategy': strategy, **result.to_dict()}
    if strategy == 'search':
        d = _as_int(ctx.params.get('d', 1), "d")
        result = minimal_window_search(ctx.group, ctx.lattice, d, seed=ctx.seed, tolerance=ctx.tolerance)
        out = {'strategy': strategy, **result.to_dict()}
        if result.windows is not None:
            out['windows'] = result.windows.to_dict()
        return out
    raise InvalidInputError(f"unknown construction strategy {strategy!r}")


def task_module_norm(ctx: RunContext) -> dict:
    report = module_norm_report(ctx.windows, ctx.lattice)
    out = report.to_dict()
    out['optimal_bessel_bound'] = bessel_bound(ctx.system)
    return out


def task_spectrogram(ctx: RunContext) -> dict:
    path = ctx.params.get('path')
    if not isinstance(path, str) or not path:
        raise InvalidInputError("spectrogram needs task_params.path")
    index = ctx.params.get('window', [0, 0])
    if not isinstance(index, list) or len(index) != 2:
        raise InvalidInputError("task_params.window must be [k, j]")
    k, j = (_as_int(v, "window index") for v in index)
    g_family = ctx.windows
    if not (0 <= k < g_family.d and 0 <= j < g_family.n):
        raise InvalidInputError(f"window index {[k, j]} out of range for shape {g_family.shape}")
    g = g_family.data[k, j]
    if 'f' in ctx.params:
        f = complex_array(ctx.params['f'], 'f').reshape(-1)
    else:
        f = g
    files = emit_spectrogram(ctx.group, g, f, path, png=ctx.png or ctx.flag('png'))
    return files.to_dict()


def task_subgroups(ctx: RunContext) -> dict:
    space = ctx.space
    subgroups = enumerate_subgroups(space.phase, ctx.problem.weight)
    rows = []
    for sub in subgroups:
        adjoint = space.adjoint_subgroup(sub)
        rows.append({
            'size': sub.size,
            'generators': [list(g) for g in sub.generators],
            'covolume_exact': str(space.covolume(sub)),
            'adjoint_size': adjoint.size,
            'adjoint_generators': [list(g) for g in adjoint.generators],
        })
    return {'count': len(subgroups), 'subgroups': rows}


TASK_HANDLERS: Dict[str, Callable[[RunContext], dict]] = {
    'adjoint': task_adjoint,
    'covolume': task_covolume,
    'bounds': task_bounds,
    'riesz-bounds': task_riesz_bounds,
    'dual': task_dual,
    'tight': task_tight,
    'check-figa': task_check_figa,
    'check-wexler-raz': task_check_wexler_raz,
    'check-duality': task_check_duality,
    'check-associativity': task_check_associativity,
    'check-weil': task_check_weil,
    'construct': task_construct,
    'module-norm': task_module_norm,
    'spectrogram': task_spectrogram,
    'subgroups': task_subgroups,
}


def run(command: Optional[str], problem: ProblemDocument, seed: Optional[int] = None,
        tolerance: Optional[float] = None, png: bool = False) -> ResultDocument:
    """
    Dispatch one task. The command wins over the document's task field;
    a mismatch is logged. Failed verdicts are results, errors raise.
    """
    task = command or problem.task
    if task is None:
        raise InvalidInputError("no task given (command line or document)")
    if task not in TASK_HANDLERS:
        raise InvalidInputError(f"unknown task {task!r}; choose from {', '.join(TASKS)}")
    if problem.task is not None and problem.task != task:
        logger.warning(f"document task {problem.task!r} overridden by command {task!r}")

    if seed is None:
        seed = problem.task_params.get('seed', IO_CONFIG['default_seed'])
    seed = _as_int(seed, "seed")
    if seed < 0:
        raise InvalidInputError(f"seed must be >= 0, got {seed}")
    if tolerance is not None and (not math.isfinite(tolerance) or tolerance <= 0):
        raise InvalidInputError(f"tolerance must be > 0, got {tolerance!r}")

    logger.info(f"task {task} on Z{list(problem.orders)} (seed {seed})")
    start = time.perf_counter()
    try:
        outputs = TASK_HANDLERS[task](RunContext(problem, seed, tolerance, png))
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"linear algebra failure in {task}: {exc}") from exc
    elapsed = (time.perf_counter() - start) * 1000.0
    logger.info(f"task {task} finished in {elapsed:.1f} ms")
    return ResultDocument(task, to_plain(outputs), IO_CONFIG['tool_version'], seed, elapsed)
