"""Loading and validation of run configurations.

A configuration is a YAML mapping of sections; every key has a default, so
an empty document is a complete configuration. Values are resolved with the
precedence command line > environment > file > defaults, and every rejected
value is reported with its key path and, when it came from a file, the
file:line:column of the offending key.
"""

import copy
import logging
import os
from typing import Any, Callable, Dict, List, Mapping, Optional, Text, Tuple

import numpy as np
import ruamel.yaml as yaml
from ruamel.yaml.comments import CommentedMap
from ruamel.yaml.error import YAMLError
from schema_salad.exceptions import ValidationException
from schema_salad.sourceline import SourceLine, add_lc_filename

from .errors import StructuralError
from .gaussian import DiagonalCovariance, ModelSpec
from .heat import HeatProblem
from .spectral import CONSTANT, EXPLICIT, EXPONENTIAL, FAMILY_KINDS, H1, H2, \
    POWER_LAW, SequenceFamily, SingularSystem

_logger = logging.getLogger("fhptool")

ENV_PREFIX = "FHPTOOL_"

COMMANDS = ("filter", "verify-optimality", "monte-carlo", "admissibility",
            "scale-report", "heat-demo", "classical-hp")

DATASET_FORMATS = ("coefficients", "grid", "series")

FAMILY_KEYS = {
    POWER_LAW: ("kind", "exponent", "scale"),
    EXPONENTIAL: ("kind", "rate", "quadratic", "scale"),
    CONSTANT: ("kind", "value"),
    EXPLICIT: ("kind", "values"),
}

DEFAULTS = {
    "run": {
        "command": "admissibility",
        "seed": 0,
        "samples": 10000,
        "output_dir": "fhptool-out",
        "strict": False,
        "workers": 1,
        "scale_index": None,
        "candidates": 200,
        "observations": 20,
    },
    "model": {
        "truncation": 32,
        "kernel_dim": 2,
        "singular_values": {"kind": POWER_LAW, "exponent": 2.0},
        "sigma_u": {"kind": POWER_LAW, "exponent": 8.0},
        "sigma_v": {"kind": POWER_LAW, "exponent": 6.0},
        "kernel_vars": None,
        "y0": None,
    },
    "heat": {
        "tau": 1.0,
        "t0": 0.5,
        "truncation": 12,
        "grid": 2048,
        "sigma_u": {"kind": POWER_LAW, "exponent": 2.0},
        # decays faster than exp(-2 n^2 (tau - t0)) so that Q_v is trace class,
        # and exp(-2 n^2) stays a normal float up to n = 18
        "sigma_v": {"kind": EXPONENTIAL, "rate": 2.0, "quadratic": True},
    },
    "scale": {
        "n_max": 4,
    },
    "classical": {
        "length": 16,
        "sigma_u": 1.0,
        "sigma_v": 1.0,
        "alpha": None,
    },
    "dataset": {
        "path": None,
        "format": "coefficients",
    },
    "tolerances": {
        "sigma_factor": 3.0,
        "absolute_floor": 1e-12,
        "rtol": 1e-12,
    },
}  # type: Dict[Text, Dict[Text, Any]]

FAMILY_SETTINGS = (("model", "singular_values"), ("model", "sigma_u"),
                   ("model", "sigma_v"), ("heat", "sigma_u"), ("heat", "sigma_v"))

CONVERSION_ERRORS = (ValueError, TypeError, StructuralError)


class FieldError(ValueError):
    """A rejected value nested under `field` of the value being converted."""

    def __init__(self, field, message):  # type: (Text, Text) -> None
        super(FieldError, self).__init__(message)
        self.field = field


def _is_int(value):  # type: (Any) -> bool
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _is_number(value):  # type: (Any) -> bool
    return (isinstance(value, (int, float, np.integer, np.floating)) and
            not isinstance(value, bool))


def integer(value):  # type: (Any) -> int
    if not _is_int(value):
        raise ValueError(u"must be an integer, got %r" % (value,))
    return int(value)


def positive_int(value):  # type: (Any) -> int
    if not _is_int(value) or value < 1:
        raise ValueError(u"must be a positive integer, got %r" % (value,))
    return int(value)


def nonnegative_int(value):  # type: (Any) -> int
    if not _is_int(value) or value < 0:
        raise ValueError(u"must be a nonnegative integer, got %r" % (value,))
    return int(value)


def optional(convert):  # type: (Callable[[Any], Any]) -> Callable[[Any], Any]
    def wrapped(value):  # type: (Any) -> Any
        return None if value is None else convert(value)
    return wrapped


def number(value):  # type: (Any) -> float
    if not _is_number(value) or not np.isfinite(value):
        raise ValueError(u"must be a finite number, got %r" % (value,))
    return float(value)


def positive(value):  # type: (Any) -> float
    out = number(value)
    if not out > 0:
        raise ValueError(u"must be > 0, got %r" % (value,))
    return out


def nonnegative(value):  # type: (Any) -> float
    out = number(value)
    if out < 0:
        raise ValueError(u"must be >= 0, got %r" % (value,))
    return out


def boolean(value):  # type: (Any) -> bool
    if not isinstance(value, bool):
        raise ValueError(u"must be true or false, got %r" % (value,))
    return value


def text(value):  # type: (Any) -> Text
    if not isinstance(value, str):
        raise ValueError(u"must be a string, got %r" % (value,))
    return value


def number_list(value):  # type: (Any) -> List[float]
    if not isinstance(value, (list, tuple)):
        raise ValueError(u"must be a list of numbers, got %r" % (value,))
    return [number(v) for v in value]


def choice(options):  # type: (Tuple[Text, ...]) -> Callable[[Any], Text]
    def convert(value):  # type: (Any) -> Text
        if value not in options:
            raise ValueError(u"must be one of %s, got %r" % (", ".join(options), value))
        return value
    return convert


def family(value):  # type: (Any) -> SequenceFamily
    """Build a SequenceFamily from its mapping form."""
    if not isinstance(value, Mapping):
        raise ValueError(u"must be a mapping with a 'kind' key, got %r" % (value,))
    kind = value.get("kind")
    if kind not in FAMILY_KINDS:
        raise ValueError(u"kind must be one of %s, got %r" % (", ".join(FAMILY_KINDS), kind))
    for key in value:
        if key not in FAMILY_KEYS[kind]:
            raise FieldError(key, u"unknown key for kind %s" % kind)
    try:
        if kind == POWER_LAW:
            return SequenceFamily.power_law(_field(value, "exponent", number),
                                            _field(value, "scale", number, 1.0))
        if kind == EXPONENTIAL:
            return SequenceFamily.exponential(_field(value, "rate", number),
                                              _field(value, "quadratic", boolean, False),
                                              _field(value, "scale", number, 1.0))
        if kind == CONSTANT:
            return SequenceFamily.constant(_field(value, "value", number))
        return SequenceFamily.explicit(_field(value, "values", number_list))
    except StructuralError as e:
        # messages of SequenceFamily start with the offending parameter
        raise FieldError(str(e).split(" ", 1)[0], str(e))


def _field(mapping, key, convert, default=None):
    # type: (Mapping[Text, Any], Text, Callable[[Any], Any], Any) -> Any
    if key not in mapping:
        if default is None:
            raise FieldError(key, u"%s is required" % key)
        return default
    try:
        return convert(mapping[key])
    except ValueError as e:
        raise FieldError(key, u"%s %s" % (key, e))


SCHEMA = {
    "run": {
        "command": choice(COMMANDS),
        "seed": integer,
        "samples": positive_int,
        "output_dir": text,
        "strict": boolean,
        "workers": positive_int,
        "scale_index": optional(positive_int),
        "candidates": nonnegative_int,
        "observations": positive_int,
    },
    "model": {
        "truncation": positive_int,
        "kernel_dim": nonnegative_int,
        "singular_values": family,
        "sigma_u": family,
        "sigma_v": family,
        "kernel_vars": optional(number_list),
        "y0": optional(number_list),
    },
    "heat": {
        "tau": number,
        "t0": number,
        "truncation": positive_int,
        "grid": positive_int,
        "sigma_u": family,
        "sigma_v": family,
    },
    "scale": {
        "n_max": positive_int,
    },
    "classical": {
        "length": positive_int,
        "sigma_u": positive,
        "sigma_v": positive,
        "alpha": optional(positive),
    },
    "dataset": {
        "path": optional(text),
        "format": choice(DATASET_FORMATS),
    },
    "tolerances": {
        "sigma_factor": positive,
        "absolute_floor": nonnegative,
        "rtol": positive,
    },
}  # type: Dict[Text, Dict[Text, Callable[[Any], Any]]]


class RunConfig(object):
    """Validated configuration of one run."""

    def __init__(self, settings, source=None):
        # type: (Dict[Text, Dict[Text, Any]], Optional[Text]) -> None
        self.settings = settings
        self.source = source
        run = settings["run"]
        self.command = run["command"]  # type: Text
        self.seed = run["seed"]  # type: int
        self.samples = run["samples"]  # type: int
        self.output_dir = run["output_dir"]  # type: Text
        self.strict = run["strict"]  # type: bool
        self.workers = run["workers"]  # type: int
        self.scale_index = run["scale_index"]  # type: Optional[int]
        self.candidates = run["candidates"]  # type: int
        self.observations = run["observations"]  # type: int
        self.n_max = settings["scale"]["n_max"]  # type: int
        self.tolerances = settings["tolerances"]  # type: Dict[Text, float]
        self.classical = settings["classical"]  # type: Dict[Text, Any]
        self.dataset_format = settings["dataset"]["format"]  # type: Text
        self.dataset_path = settings["dataset"]["path"]  # type: Optional[Text]

        model = settings["model"]
        self.truncation = model["truncation"]  # type: int
        self.kernel_dim = model["kernel_dim"]  # type: int
        self.singular_values = model["singular_values"]  # type: SequenceFamily
        self.sigma_u = model["sigma_u"]  # type: SequenceFamily
        self.sigma_v = model["sigma_v"]  # type: SequenceFamily
        self.kernel_vars = (model["kernel_vars"] if model["kernel_vars"] is not None
                            else [1.0] * self.kernel_dim)  # type: List[float]
        self.y0 = (model["y0"] if model["y0"] is not None
                   else [0.0] * self.kernel_dim)  # type: List[float]

        heat = settings["heat"]
        self.heat_sigma_u = heat["sigma_u"]  # type: SequenceFamily
        self.heat_sigma_v = heat["sigma_v"]  # type: SequenceFamily

    def build_model(self):  # type: () -> ModelSpec
        A = SingularSystem.from_family(self.singular_values, self.truncation, self.kernel_dim)
        return ModelSpec(
            A,
            DiagonalCovariance.from_family(self.sigma_u, self.truncation, self.kernel_vars, H1),
            DiagonalCovariance.from_family(self.sigma_v, self.truncation, None, H2),
            self.y0)

    def heat_problem(self):  # type: () -> HeatProblem
        heat = self.settings["heat"]
        return HeatProblem(heat["tau"], heat["t0"], heat["truncation"], heat["grid"])

    def resolve_path(self, path):  # type: (Text) -> Text
        """Paths in a configuration file are relative to the file."""
        if self.source is None or os.path.isabs(path):
            return path
        return os.path.join(os.path.dirname(os.path.abspath(self.source)), path)

    def as_dict(self):  # type: () -> Dict[Text, Dict[Text, Any]]
        out = {}  # type: Dict[Text, Dict[Text, Any]]
        for section, values in self.settings.items():
            out[section] = dict(
                (key, value.as_dict() if isinstance(value, SequenceFamily) else value)
                for key, value in values.items())
        return out


def _load_yaml(path):  # type: (Text) -> CommentedMap
    if not os.path.isfile(path):
        raise ValidationException(u"Not found: '%s'" % path)
    try:
        with open(path, encoding="utf-8") as f:
            doc = yaml.YAML(typ="rt").load(f)
    except UnicodeDecodeError as e:
        raise ValidationException(u"%s: not valid UTF-8 text (%s)" % (path, e.reason))
    except YAMLError as e:
        raise ValidationException(u"%s: %s" % (path, e))
    if doc is None:
        doc = CommentedMap()
    if not isinstance(doc, CommentedMap):
        raise ValidationException(u"%s: configuration must be a mapping of sections" % path)
    add_lc_filename(doc, path)
    return doc


def _parse_env(env):
    # type: (Mapping[Text, Text]) -> Tuple[Dict[Tuple[Text, Text], Tuple[Text, Any]], Dict[Tuple[Text, Text], Dict[Text, Tuple[Text, Any]]]]
    """FHPTOOL_<SECTION>__<KEY>[__<SUBKEY>] variables, values read as YAML scalars."""
    values = {}  # type: Dict[Tuple[Text, Text], Tuple[Text, Any]]
    subvalues = {}  # type: Dict[Tuple[Text, Text], Dict[Text, Tuple[Text, Any]]]
    scalar = yaml.YAML(typ="safe")
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].lower().split("__")
        section = parts[0]
        if section not in SCHEMA:
            raise ValidationException(u"%s: unknown section '%s'" % (name, section))
        if len(parts) < 2 or parts[1] not in SCHEMA[section]:
            raise ValidationException(u"%s: unknown key in section '%s'" % (name, section))
        try:
            value = scalar.load(env[name])
        except YAMLError as e:
            raise ValidationException(u"%s: %s" % (name, e))
        key = parts[1]
        if len(parts) == 2:
            values[(section, key)] = (name, value)
        elif len(parts) == 3 and (section, key) in FAMILY_SETTINGS:
            subvalues.setdefault((section, key), {})[parts[2]] = (name, value)
        else:
            raise ValidationException(u"%s: %s.%s has no subkeys" % (name, section, key))
    return values, subvalues


def load_config(path=None, env=None, overrides=None):
    # type: (Optional[Text], Optional[Mapping[Text, Text]], Optional[Dict[Tuple[Text, Text], Any]]) -> RunConfig
    """Resolve a RunConfig from defaults, an optional YAML file, environment
    variables and command-line overrides keyed by (section, key)."""
    doc = _load_yaml(path) if path is not None else CommentedMap()
    env_values, env_subvalues = _parse_env(os.environ if env is None else env)
    overrides = overrides or {}

    for section in doc:
        with SourceLine(doc, section, ValidationException):
            if section not in SCHEMA:
                raise ValidationException(u"unknown section '%s'" % section)
            if doc[section] is not None and not isinstance(doc[section], CommentedMap):
                raise ValidationException(u"section '%s' must be a mapping" % section)
        for key in doc[section] or {}:
            with SourceLine(doc[section], key, ValidationException):
                if key not in SCHEMA[section]:
                    raise ValidationException(u"%s.%s: unknown key" % (section, key))

    settings = {}  # type: Dict[Text, Dict[Text, Any]]
    for section, keys in SCHEMA.items():
        settings[section] = {}
        mapping = doc.get(section) or CommentedMap()
        for key, convert in keys.items():
            where = u"%s.%s" % (section, key)
            if (section, key) in overrides:
                settings[section][key] = _convert(
                    convert, overrides[(section, key)], where, u"command line")
            elif (section, key) in env_values:
                name, value = env_values[(section, key)]
                settings[section][key] = _convert(convert, value, where, name)
            elif (section, key) in env_subvalues:
                base = mapping[key] if key in mapping else DEFAULTS[section][key]
                merged = dict(base)
                names = []
                for subkey, (name, value) in sorted(env_subvalues[(section, key)].items()):
                    merged[subkey] = value
                    names.append(name)
                settings[section][key] = _convert(convert, merged, where, u", ".join(names))
            elif key in mapping:
                with SourceLine(mapping, key, ValidationException):
                    settings[section][key] = _convert(convert, mapping[key], where)
            else:
                settings[section][key] = convert(copy.deepcopy(DEFAULTS[section][key]))

    _check_dimensions(settings, doc)
    _logger.debug(u"resolved configuration: %s", settings)
    return RunConfig(settings, path)


def _convert(convert, value, where, origin=None):
    # type: (Callable[[Any], Any], Any, Text, Optional[Text]) -> Any
    lead = u"%s: " % origin if origin else u""
    try:
        return convert(value)
    except FieldError as e:
        raise ValidationException(u"%s%s.%s: %s" % (lead, where, e.field, e))
    except CONVERSION_ERRORS as e:
        raise ValidationException(u"%s%s: %s" % (lead, where, e))


def _check_dimensions(settings, doc):
    # type: (Dict[Text, Dict[Text, Any]], CommentedMap) -> None
    model = settings["model"]
    mapping = doc.get("model") or CommentedMap()
    for key in ("kernel_vars", "y0"):
        if model[key] is not None and len(model[key]) != model["kernel_dim"]:
            with SourceLine(mapping, key if key in mapping else None, ValidationException):
                raise ValidationException(u"model.%s: must have kernel_dim=%d entries, got %d"
                                          % (key, model["kernel_dim"], len(model[key])))
    if model["kernel_vars"] is not None and any(v <= 0 for v in model["kernel_vars"]):
        with SourceLine(mapping, "kernel_vars" if "kernel_vars" in mapping else None,
                        ValidationException):
            raise ValidationException(u"model.kernel_vars: variances must be > 0")
    heat = settings["heat"]
    if not heat["tau"] > heat["t0"]:
        raise ValidationException(u"heat.tau: must exceed heat.t0 (%r <= %r)"
                                  % (heat["tau"], heat["t0"]))
    if settings["classical"]["length"] < 3:
        raise ValidationException(u"classical.length: must be >= 3")
    if settings["heat"]["grid"] < 3:
        raise ValidationException(u"heat.grid: must be >= 3")
