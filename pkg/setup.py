from setuptools import setup, find_packages

install_requires = [
    'click>=8.0',
    'numpy>=1.20',      # PCG64 generator, cumulative rate tables
    'scipy>=1.6',       # sparse generator, strong components, logsumexp
    'pandas>=1.0',      # CSV exports
    'tqdm',             # progress bars for enumeration and generator builds
]

extras_require = {
    'dev': [
        'pytest',
        'flake8',
    ]
}


setup(
    name="qwhittaker-torus",
    version="0.1.0",
    description="Exact verification and simulation of q-Whittaker particle dynamics on the torus",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",

    packages=find_packages(exclude=("tests", "tests.*")),
    include_package_data=True,
    install_requires=install_requires,
    extras_require=extras_require,
    entry_points={
        'console_scripts': [
            'qwt=qwhittaker_torus.cli:main',
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
)
