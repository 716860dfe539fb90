from setuptools import setup

setup(
    name="polyddr",
    description="Discrete Stokes and Hessian complexes on polygonal meshes",
    long_description=open("README.rst").read(),
    license="MIT",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.8",
    package_dir={"": "lib"},
    packages=["polyddr", "polyddr.mesh"],
    scripts=["bin/polyddr"],
    install_requires=["numpy", "scipy", "pyyaml"],
    use_scm_version={
        "write_to": "lib/polyddr/version.py",
        "write_to_template": "__version__ = '{version}'\n",
    },
)
