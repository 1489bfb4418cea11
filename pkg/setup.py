from setuptools import setup, find_packages

setup(
    name="videomerge-tool",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.7.0",
        "pandas>=1.3.0",
        "matplotlib>=3.4.0",
        "psutil>=5.8.0",
        "PyYAML>=6.0",
        "requests>=2.28.0",
        "tqdm>=4.62.0",
    ],
    extras_require={
        "test": ["pytest>=7.0.0"],
    },
    entry_points={
        "console_scripts": [
            "videomerge=src.main:main",
        ],
    },
    author="Your Name",
    author_email="your.email@example.com",
    description="Tiled long-video latent generation with sine-weighted fusion and long noise initialization",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
)
