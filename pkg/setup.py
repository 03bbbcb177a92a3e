"""Workspace manifest: installs hgat-common and hgat-forecast from packages/ in one step."""
import os
from types import SimpleNamespace

from setuptools import find_packages, setup

here = os.path.abspath(os.path.dirname(__file__))
packages_dir = os.path.join(here, "packages")
common_dir = os.path.join(packages_dir, "hgat-common")
forecast_dir = os.path.join(packages_dir, "hgat-forecast")


def read_text(*parts) -> str:
    with open(os.path.join(*parts), encoding="utf-8") as f:
        return f.read()


def package_metadata() -> SimpleNamespace:
    metadata = {}
    exec(read_text(packages_dir, "__packaging__.py"), metadata)
    return SimpleNamespace(**metadata)


def requirement_lines(directory) -> list:
    """Non-comment lines of ``<directory>/requires.txt``."""
    return [
        line.strip()
        for line in read_text(directory, "requires.txt").splitlines()
        if line.strip() and not line.startswith("#")
    ]


about = package_metadata()
common_packages = find_packages(where=common_dir, include=("hgat_common*",))
forecast_packages = find_packages(where=forecast_dir, include=("hgat_forecast*",))
package_dir = {}
for name in common_packages:
    package_dir[name] = os.path.join("packages", "hgat-common", *name.split("."))
for name in forecast_packages:
    package_dir[name] = os.path.join("packages", "hgat-forecast", *name.split("."))

setup(
    name="hgat-forecast-workspace",
    version=about.__version__,
    author=about.__author__,
    license=about.__license__,
    packages=common_packages + forecast_packages,
    package_dir=package_dir,
    python_requires=">=3.9",
    install_requires=(
        requirement_lines(common_dir)
        + requirement_lines(forecast_dir)
        + requirement_lines(packages_dir)
    ),
    entry_points={"console_scripts": ["hgat-forecast=hgat_forecast.cli:cli"]},
)
