from setuptools import setup, find_packages

setup(
    name="pairchar",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
    package_data={"pairchar.config": ["config.json"]},
    install_requires=[
        "numpy",
        "scipy",
        "tqdm",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={
        "console_scripts": [
            "pairchar=pairchar.main:main",
        ],
    },
    author="pairchar developers",
    description="Photon-pair source characterization with imperfect threshold detectors",
    python_requires=">=3.8",
)
