"""Setup script for ruij-lab"""

from setuptools import setup, find_packages

setup(
    name="ruijsenaars-lab",
    version="0.1.0",
    description="Double-sine kernels, wave functions and identity checks for the hyperbolic Ruijsenaars system",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main", "config"],
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.4",
        "pandas>=2.1.4",
        "click>=8.1.7",
        "rich>=13.7.0",
        "python-dotenv>=1.0.0",
        "psutil>=5.9.6",
    ],
    extras_require={
        "test": [
            "pytest>=7.4.3",
            "pytest-cov>=4.1.0",
            "hypothesis>=6.92.0",
        ],
    },
    entry_points={
        'console_scripts': [
            'ruij-lab=main:cli',
        ],
    },
    python_requires='>=3.9',
)
