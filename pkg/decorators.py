import os
from functools import wraps

import click
from flask import current_app
from werkzeug.utils import safe_join

from exceptions import ConfigError, PogError


def handles_errors(fn):
    """
    Map failures onto the CLI exit-code contract.
    ConfigError -> usage error (exit 2); any other PogError or I/O error -> exit 1.
    """
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            current_app.logger.error("configuration error: %s", exc)
            raise click.UsageError(str(exc))
        except (PogError, OSError) as exc:
            current_app.logger.error("%s failed: %s", fn.__name__, exc)
            raise click.ClickException(str(exc))
    return wrapper


def writes_to_out_dir(fn):
    """Create the `out_dir` argument, when given, before the command runs and check it is writable."""
    @wraps(fn)
    def wrapper(*args, **kwargs):
        out_dir = kwargs["out_dir"]
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            if not os.access(out_dir, os.W_OK):
                raise ConfigError(f"output directory {out_dir} is not writable")
        return fn(*args, **kwargs)
    return wrapper


def output_path(out_dir, name):
    path = safe_join(out_dir, name)
    if path is None:
        raise ConfigError(f"refusing to write {name!r} outside {out_dir}")
    return path


def scenario_options(fn):
    """Attach the shared --config and --set options (`config_path`, `overrides`)."""
    fn = click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                      help="Override a scenario value, e.g. --set icp.max_iterations=80")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      help="Scenario YAML (defaults to the bundled scenario)")(fn)
    return fn
