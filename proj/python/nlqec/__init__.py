"""Numerical laboratory for nonlinear quantum error correction codes.

The heavy lifting lives in the compiled extension; this package re-exports
its surface and adds a couple of convenience helpers.
"""

import json as _json

from ._nlqec import *  # noqa: F401,F403
from ._nlqec import __version__, builtin_config, run_scenario  # noqa: F401


def load_builtin(name):
    """Return the config of a built-in scenario as a dict."""
    return _json.loads(builtin_config(name))


def check(config):
    """Run the criterion check on a config dict; returns (exit_code, report)."""
    result = run_scenario("check", _json.dumps(config))
    return result["exit_code"], result["report"]


def recover(config):
    """Run criterion + recovery on a config dict; returns (exit_code, report)."""
    result = run_scenario("recover", _json.dumps(config))
    return result["exit_code"], result["report"]
