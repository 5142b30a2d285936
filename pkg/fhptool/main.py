#!/usr/bin/env python
import argparse
import logging
import os
import sys
from typing import IO, Any, Callable, Dict, List, Mapping, Optional, Text, Tuple

from schema_salad.exceptions import ValidationException

from .emit import Report, RunManifest, emit_results, preflight
from .errors import AdmissibilityError, EmissionError, PreconditionError, StructuralError
from .load_config import COMMANDS, load_config
from .runner import enforce_strict, run_command

try:
    from importlib.metadata import PackageNotFoundError, version as _dist_version
except ImportError:  # pragma: no cover
    PackageNotFoundError = Exception  # type: ignore
    _dist_version = None  # type: ignore

_logger = logging.getLogger("fhptool")

defaultStreamHandler = logging.StreamHandler()
_logger.addHandler(defaultStreamHandler)
_logger.setLevel(logging.INFO)

EXIT_SUCCESS = 0
EXIT_INVALID = 1
EXIT_STRICT = 2
EXIT_IO = 3


def arg_parser():  # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(
        description='Functional Hodrick-Prescott filtering: admissibility checks, '
                    'optimal smoothing operators and numerical experiments')
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="Experiment to run (default: run.command from the "
                             "configuration, else admissibility)")
    parser.add_argument("--config", type=Text, default=None,
                        help="YAML configuration file")
    parser.add_argument("--seed", type=int, default=None,
                        help="Seed for every random draw of the run")
    parser.add_argument("--samples", type=int, default=None,
                        help="Number of Monte Carlo samples")
    parser.add_argument("--out", type=Text, default=None, dest="output_dir",
                        help="Output directory for tables, summary and manifest")
    parser.add_argument("--scale-index", type=int, default=None,
                        help="Index n of the Hilbert scale H1^-n to lift the model to")
    parser.add_argument("--workers", type=int, default=None,
                        help="Worker threads; results do not depend on this value")
    parser.add_argument("--strict", action="store_true", default=None,
                        help="Exit with status 2 when any warning was recorded")

    exgroup = parser.add_mutually_exclusive_group()
    exgroup.add_argument("--quiet", action="store_true", help="Only print warnings and errors.")
    exgroup.add_argument("--debug", action="store_true", help="Print even more logging")

    parser.add_argument("--version", action="store_true", help="Print version and exit")
    return parser


def versionstring():
    # type: () -> Text
    try:
        if _dist_version is None:
            raise PackageNotFoundError("fhptool")
        return u"%s %s" % (sys.argv[0], _dist_version("fhptool"))
    except PackageNotFoundError:
        return u"%s %s" % (sys.argv[0], "unknown version")


def overrides_from_args(args):
    # type: (argparse.Namespace) -> Dict[Tuple[Text, Text], Any]
    """Command-line values that were given, keyed by (section, key)."""
    overrides = {}  # type: Dict[Tuple[Text, Text], Any]
    for attr, key in (("command", "command"), ("seed", "seed"), ("samples", "samples"),
                      ("output_dir", "output_dir"), ("scale_index", "scale_index"),
                      ("workers", "workers"), ("strict", "strict")):
        value = getattr(args, attr)
        if value is not None:
            overrides[("run", key)] = value
    return overrides


def main(argsl=None,  # type: List[str]
         args=None,  # type: argparse.Namespace
         stdout=sys.stdout,  # type: IO[Any]
         stderr=sys.stderr,  # type: IO[Any]
         env=None,  # type: Mapping[Text, Text]
         versionfunc=versionstring,  # type: Callable[[], Text]
         logger_handler=None  # type: Optional[logging.Handler]
         ):
    # type: (...) -> int

    _logger.removeHandler(defaultStreamHandler)
    if logger_handler:
        stderr_handler = logger_handler
    else:
        stderr_handler = logging.StreamHandler(stderr)
    _logger.addHandler(stderr_handler)
    try:
        if args is None:
            if argsl is None:
                argsl = sys.argv[1:]
            args = arg_parser().parse_args(argsl)

        # Callers may build their own Namespace; fill in the options they left out.
        for k, v in {'command': None,
                     'config': None,
                     'seed': None,
                     'samples': None,
                     'output_dir': None,
                     'scale_index': None,
                     'workers': None,
                     'strict': None,
                     'quiet': False,
                     'debug': False,
                     'version': False}.items():
            if not hasattr(args, k):
                setattr(args, k, v)

        if args.quiet:
            _logger.setLevel(logging.WARN)
        if args.debug:
            _logger.setLevel(logging.DEBUG)

        if args.version:
            print(versionfunc(), file=stdout)
            return EXIT_SUCCESS
        else:
            _logger.info(versionfunc())

        try:
            cfg = load_config(args.config, env if env is not None else os.environ,
                              overrides_from_args(args))
        except ValidationException as exc:
            _logger.error(u"Configuration failed validation:\n%s", exc, exc_info=args.debug)
            return EXIT_INVALID

        try:
            preflight(cfg.output_dir)
            manifest = RunManifest(cfg.output_dir, cfg.command, cfg.as_dict(), versionfunc())
            manifest.write()
        except EmissionError as exc:
            _logger.error(u"%s", exc, exc_info=args.debug)
            return EXIT_IO

        status = "failed"
        files = None  # type: Optional[List[Dict[Text, Any]]]
        report = None  # type: Optional[Report]
        exit_code = EXIT_INVALID
        try:
            report = run_command(cfg)
            files = emit_results(report, cfg.output_dir)
            enforce_strict(cfg, report)
            status, exit_code = "success", EXIT_SUCCESS
        except (ValidationException, StructuralError, PreconditionError) as exc:
            _logger.error(u"%s failed:\n%s", cfg.command, exc, exc_info=args.debug)
        except EmissionError as exc:
            _logger.error(u"%s", exc, exc_info=args.debug)
            exit_code = EXIT_IO
        except AdmissibilityError as exc:
            _logger.error(u"%s", exc, exc_info=args.debug)
            status, exit_code = "strict-failure", EXIT_STRICT
        finally:
            # also reached by unexpected exceptions, which then propagate
            try:
                manifest.finalize(status, files, report)
            except EmissionError as exc:
                _logger.error(u"%s", exc, exc_info=args.debug)
                exit_code = EXIT_IO

        if exit_code == EXIT_SUCCESS:
            _logger.info(u"Final status is success; results in %s", cfg.output_dir)
        return exit_code

    finally:
        _logger.removeHandler(stderr_handler)
        _logger.addHandler(defaultStreamHandler)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
