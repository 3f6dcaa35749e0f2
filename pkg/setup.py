#!/usr/bin/env python
"""
Setup script for consensusprobe
"""

from pathlib import Path

from setuptools import find_packages, setup

# Read the README file
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="consensusprobe",
    version="1.0.0",
    author="consensusprobe contributors",
    description="Convergence-time bench for local averaging rules on time-varying graphs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Operating System :: OS Independent",
    ],
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    python_requires=">=3.9",
    install_requires=[
        "click>=8.0.0",
        "rich>=10.0.0",
        "pyyaml>=5.4",
        "numpy>=1.22",
        "scipy>=1.8",
        "networkx>=2.6",
    ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "pytest-cov>=2.0",
            "hypothesis>=6.0",
            "black>=21.0",
            "flake8>=3.9",
            "mypy>=0.910",
        ],
    },
    entry_points={
        "console_scripts": [
            "consensusprobe=consensusprobe.ui.cli:cli",
            "cprobe=consensusprobe.ui.cli:cli",  # Short alias
        ],
    },
)
