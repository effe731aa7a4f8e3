"""Tests for the command line parser of faircause."""
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

import pytest

import faircause
from faircause.__main__ import parse_arguments, run


@contextmanager
def update_argv(args: list) -> Iterator[None]:
    """Update sys.argv."""
    orig, sys.argv = sys.argv, args
    yield
    sys.argv = orig


def test_version() -> None:
    """Test Version is Correct."""
    assert faircause.__version__ == "0.1"


def test_version_flag(capsys: pytest.CaptureFixture) -> None:
    """--version prints the version and exits 0."""
    assert run(["--version"]) == 0
    assert "0.1" in capsys.readouterr().out


def test_default_parse_args() -> None:
    """Global options have their defaults."""
    args = ['faircause', 'simulate', '--nodes', '8', '--interventional', '3', '--n', '2000']
    with update_argv(args):
        parsed = parse_arguments()

    assert parsed.get('command') == 'simulate'
    assert parsed.get('seed') == 0
    assert parsed.get('out_dir') == Path('.')
    assert parsed.get('quiet') is False
    assert parsed.get('threads') == 1
    assert parsed.get('in_degree') == 2.0
    assert parsed.get('out') == 'runs.csv'


@pytest.mark.parametrize("args", [
    ['faircause', '--quiet', 'compare', __file__, __file__],
    ['faircause', '-q', 'compare', __file__, __file__],
])
def test_quiet_option(args: list) -> None:
    """Test that the quiet option is set."""
    with update_argv(args):
        parsed = parse_arguments()
    assert parsed.get('quiet') is True


@pytest.mark.parametrize("args", [
    ['faircause'],
    ['faircause', '--seed', '3'],
    ['faircause', 'simulate', '--nodes', '8'],
    ['faircause', 'discover', '--config', __file__, '--out', 'g.json'],
    ['faircause', 'tradeoff', '--bogus'],
    ['faircause', '--threads', '0', 'compare', __file__, __file__],
    ['faircause', '-q', '-v', 'compare', __file__, __file__],
])
def test_usage_errors_exit_1(args: list) -> None:
    """Missing subcommands, missing or unknown flags exit with status 1."""
    with update_argv(args):
        with pytest.raises(SystemExit) as excinfo:
            parse_arguments()
    assert excinfo.value.code == 1


def test_exit_on_non_existent_file() -> None:
    """Input files must exist."""
    args = ['faircause', 'compare', 'non-existent-graph.json', __file__]
    with update_argv(args):
        with pytest.raises(SystemExit) as excinfo:
            parse_arguments()
    assert excinfo.value.code == 1


def test_run_returns_usage_status(capsys: pytest.CaptureFixture) -> None:
    """run() reports usage errors as status 1 with usage text on stderr."""
    assert run(['ate', '--config', __file__]) == 1
    assert 'usage' in capsys.readouterr().err
