from setuptools import setup, find_packages

version = "0.4.0"

with open("README.md", "r") as fh:
    long_description = fh.read()

setup(
    name="dftsafety",
    version=version,
    packages=find_packages(include=["dftsafety", "dftsafety.*"]),
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.8",
        "networkx>=2.6",
        "PyYAML>=6.0",
        "pydot>=1.4.2",
        "sympy>=1.9",
        "lark>=1.1",
    ],
    extras_require={
        "dev": ["pytest", "pdoc", "ruff"],
    },
    entry_points={
        "console_scripts": ["dftsafety=dftsafety.cli:main"],
    },
    description="Dynamic fault tree synthesis and CTMC-based safety analysis",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    keywords="dynamic fault tree reliability safety ctmc markov mttf model checking",
    classifiers=[
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering",
    ],
)
