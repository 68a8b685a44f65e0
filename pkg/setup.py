from pathlib import Path

from setuptools import setup

long_description = Path("README.md").read_text(encoding="utf-8")


setup(
    name="pyblanket",
    version="0.1.0",
    description="Quantum Markov blankets: greedy search, certificates and spin-chain sweeps",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.10",
    install_requires=["numpy>=1.24", "scipy>=1.10"],
    extras_require={"test": ["pytest"]},
    packages=["pyblanket"],
    package_data={"pyblanket": ["py.typed"]},
    entry_points={"console_scripts": ["pyblanket=pyblanket.cli:main"]},
)
