"""
Setup script for synthal
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="synthal",
    version="0.1.0",
    description="Copy-paste synthetic images and BALD active learning for surgical instrument segmentation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="python"),
    package_dir={"": "python"},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Image Processing",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.7.0",
        "opencv-python>=4.5.0",
        "Pillow>=9.0.0",
        "PyYAML>=6.0",
    ],
    extras_require={
        "dev": ["pytest>=7.0.0", "hypothesis>=6.0", "black>=22.0.0", "flake8>=4.0.0"],
        "docs": ["mkdocs-material>=9.0"],
    },
    entry_points={
        "console_scripts": [
            "synthal=synthal.cli:main",
        ],
    },
)
