from setuptools import setup, find_packages


def readme():
    with open('README.md', 'r') as f:
        return f.read()


setup(
    name='deep-rnmt',
    version='0.1.0',
    description='Deep recurrent encoder-decoder models with attention on a numpy autodiff engine',
    long_description=readme(),
    long_description_content_type='text/markdown',
    license='Apache 2.0 License',
    packages=find_packages(exclude=('tests', 'tests.*', 'examples', 'examples.*')),
    install_requires=[
        'numpy',
        'scipy',
        'tqdm',
        'matplotlib',
        ],
    extras_require={
        'test': [
            'pytest',
            'torch',
            ],
        },
    entry_points={
        'console_scripts': [
            'deep-rnmt=deeprnmt.cli:main',
            ],
        },
    classifiers=[
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
        ],
    keywords='python numpy autodiff rnn gru attention nmt',
    python_requires='>=3.10'
)
