from setuptools import setup, find_packages

setup(
    name="maxlab",
    version="0.1",
    packages=find_packages(exclude=("tests", "tests.*")),
    install_requires = [
        "numpy",
        "scipy",
        "SQLAlchemy",
        "python-dotenv",
    ],
    extras_require={
        "test": [
            "pytest",
            "pytest-html",
            "pytest-json-report",
            "hypothesis",
        ],
    },
    entry_points={
        "console_scripts": ["maxlab=maxlab.runner:main"],
    },
    description="Numerical laboratory for maximal operators with respect to the exponential measure on the positive orthant",
)
