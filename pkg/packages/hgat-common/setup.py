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

setup(
    name="hgat-common",
    version=about.__version__,
    author=about.__author__,
    description="Typed configuration, loguru logging and CLI scaffolding shared by the hgat-forecast packages.",
    long_description_content_type="text/markdown",
    long_description=read_text(repo_root, "README.md"),
    license=about.__license__,
    packages=find_packages(include=("hgat_common*",)),
    classifiers=[
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.9",
    install_requires=requirement_lines(here) + requirement_lines(packages_dir),
)
