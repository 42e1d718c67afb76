from setuptools import setup, find_packages


setup(
    name="teichscan",
    version="0.1.0",
    packages=find_packages(
        where="teichscan/python",
        exclude=["tests"],
    ),
    package_dir={"": "teichscan/python"},
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "matplotlib",
        "numpy",
        "scipy",
        "pydantic>=2",
    ],
    extras_require={
        "test": [
            "pytest",
            "hypothesis",
        ],
    },
    entry_points={
        "console_scripts": [
            "teichscan = teichscan.cli:main",
        ],
    },
)
