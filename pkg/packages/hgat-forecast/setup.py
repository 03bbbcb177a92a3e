import os
from types import SimpleNamespace

from setuptools import find_packages, setup

here = os.path.abspath(os.path.dirname(__file__))
repo_root = os.path.abspath(os.path.join(here, "../../"))
packages_dir = os.path.normpath(os.path.join(here, os.pardir))


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
install_requires = (
    requirement_lines(here)
    + [f"hgat-common=={about.__version__}"]
    + requirement_lines(packages_dir)
)

setup(
    name="hgat-forecast",
    version=about.__version__,
    author=about.__author__,
    description="Multi-agent motion forecasting with a heterogeneous graph attention network"
    " over lanes and trajectories, multimodal type-specific prediction heads and a"
    " map-projection refinement stage. Ships a synthetic scenario generator, training"
    " regimes, benchmark-style metrics and attention dumps.",
    long_description_content_type="text/markdown",
    long_description=read_text(repo_root, "README.md"),
    license=about.__license__,
    packages=find_packages(include=("hgat_forecast*",)),
    classifiers=[
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.9",
    install_requires=install_requires,
    entry_points={"console_scripts": ["hgat-forecast=hgat_forecast.cli:cli"]},
)
