"""Setup script for yule_bins package."""

from setuptools import find_packages, setup

setup(
    name="yule_bins",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
)
