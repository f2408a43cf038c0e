from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("yule-bins")
except PackageNotFoundError:
    __version__ = "0.0.0"


def main(argv=None) -> int:
    """Console-script entry point."""
    from yule_bins.cli import main as cli_main

    return cli_main(argv)
