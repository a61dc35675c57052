import re
from pathlib import Path

from setuptools import find_namespace_packages, setup

VERSION = re.search(
    r'__version__ = "([^"]+)"',
    (Path(__file__).parent / "otdr_split" / "__init__.py").read_text(),
).group(1)

setup(
    name="OTDRSplit",
    description=(
        "Separate the superimposed OTDR trace of a passive optical network"
        " into its branches using differential evolution"
    ),
    packages=find_namespace_packages(include=("otdr_split*",)),
    license="GPL v3",
    include_package_data=True,
    version=VERSION,
    python_requires=">=3.7",
    install_requires=["numpy>=1.21", "docopt>=0.6"],
    entry_points={"console_scripts": ["otdr-split=otdr_split.cli:run"]},
)
