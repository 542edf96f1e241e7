import argparse
import asyncio

import pytest

from varlab.exceptions import OracleRefusedError, ValidationError
from varlab.handlers.progress import SweepProgress
from varlab.handlers.utils import file_defaults, given_flags, parse_bool, parse_config_file
from varlab.helpers import parse_int_list
from varlab.utils.decorators import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, exit_on_error


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser()
    parser.add_argument("--N", dest="schedule", type=parse_int_list, default=None)
    parser.add_argument("--delta", type=float, default=2.0)
    parser.add_argument("--estimate-error", action="store_true")
    parser.add_argument("--mode", choices=("bracket", "exact"), default="bracket")
    return parser


def test_progress_is_throttled():
    messages = []
    progress = SweepProgress("sweep", sink=messages.append)
    for done in range(1, 11):
        progress(done, 10)
    # first report and the final one; the rest fall inside the time window
    assert messages == ["sweep: 1/10 points (10%)", "sweep: 10/10 points (100%)"]


def test_progress_survives_a_failing_sink():
    def broken(message):
        raise RuntimeError("closed")

    SweepProgress("sweep", sink=broken)(1, 2)


@pytest.mark.parametrize("error,code", [
    (None, EXIT_OK),
    (ValidationError("bad"), EXIT_VALIDATION),
    (OracleRefusedError("too long"), EXIT_RUNTIME),
    (KeyError("x"), EXIT_RUNTIME),
])
def test_exit_on_error_codes(error, code):
    @exit_on_error
    async def command():
        if error is not None:
            raise error
        return None

    assert asyncio.run(command()) == code


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\n[config]\nestimate-error = yes\nN = 8..32\n\ndelta = 3\n", encoding="utf-8")
    assert parse_config_file(str(path)) == {"estimate_error": "yes", "N": "8..32", "delta": "3"}
    path.write_text("delta 3\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        parse_config_file(str(path))


def test_file_defaults_use_flag_types():
    defaults = file_defaults(_parser(), {"N": "8..32", "delta": "3", "estimate_error": "on", "colour": "red"})
    assert defaults == {"schedule": [8, 16, 32], "delta": 3.0, "estimate_error": True}
    with pytest.raises(ValidationError):
        file_defaults(_parser(), {"mode": "fast"})
    with pytest.raises(ValidationError):
        file_defaults(_parser(), {"delta": "three"})


def test_given_flags():
    argv = ["--N=8,16", "--delta", "2", "--estimate-error", "-x", "7"]
    assert given_flags(_parser(), argv) == {"schedule", "delta", "estimate_error"}


def test_parse_bool():
    assert parse_bool("Yes") and not parse_bool("0")
    with pytest.raises(ValidationError):
        parse_bool("maybe")
