import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="qomsim",
    version="0.1.0",
    author="The QOMSIM developers",
    description="Quantum measurement and control of mechanical test masses: noise budgets, conditional states, "
                "trajectories, feedback cooling, state verification and macroscopic quantum tests.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=("tests", "examples")),
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy>=1.12",
        "pandas>=1.5",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        'console_scripts': [
            'qomsim = qomsim.main:main',
        ],
    },
    classifiers=(
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ),
)
