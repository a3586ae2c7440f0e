"""
Setup configuration for wignerspikes
"""

from setuptools import setup, find_packages

# Import version from centralized location
import sys
sys.path.insert(0, 'src')
from version import __version__ as VERSION

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="wignerspikes",
    version=VERSION,
    description="Outlier eigenvalues of finite-rank deformations of Wigner matrices: simulation and theory checks",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["src", "src.*"]),
    license="MIT",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "packaging>=23.0",
    ],
    entry_points={
        "console_scripts": [
            "wignerspikes=src.main:main",
        ],
    },
)
