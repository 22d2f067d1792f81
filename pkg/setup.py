#!/usr/bin/env python3
"""
Setup configuration for the bnrobot package.
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the README file
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

# Runtime requirements; test and development tools go to extras
RUNTIME = ("numpy", "scipy", "python-dotenv", "pydantic", "structlog", "click", "tabulate")

requirements_file = Path(__file__).parent / "requirements.txt"
if requirements_file.exists():
    with open(requirements_file, "r", encoding="utf-8") as f:
        lines = [line.split("#")[0].strip() for line in f]
    requirements = [line for line in lines if line and line.split("==")[0] in RUNTIME]
else:
    requirements = []

setup(
    name="bnrobot",
    version="1.0.0",
    description="Design of Boolean-network robot controllers by stochastic descent",
    long_description=long_description,
    long_description_content_type="text/markdown",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "dev": [
            "pytest>=7.0",
            "pytest-cov>=4.0",
            "pytest-mock>=3.10",
            "black>=23.0",
            "flake8>=6.0",
            "mypy>=1.0",
            "isort>=5.12",
        ],
    },
    entry_points={
        "console_scripts": [
            "bnrobot=bnrobot.main:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
    keywords=[
        "boolean networks",
        "attractors",
        "stochastic descent",
        "evolutionary robotics",
        "phototaxis",
    ],
)
