from setuptools import setup, find_packages

def parse_requirements(filename):
    """Load requirements from a pip requirements file."""
    with open(filename, 'r') as f:
        lines = f.readlines()
    lines = [line.strip() for line in lines if line.strip() and not line.startswith('#')]
    return sorted(set(lines))

setup(
    name='glass_ceiling_mi',
    version='0.1.0',
    description='Mutual-information measures of the glass-ceiling effect in attributed networks, '
                'with synthetic generators and SPSA-optimized edge addition.',
    author='Back Propagators',
    author_email='developer@aydie.in',
    packages=find_packages(exclude=['tests', 'tests.*']),
    py_modules=['app'],
    install_requires=parse_requirements('requirements.txt'),
    extras_require={'test': parse_requirements('requirements-dev.txt')},
    entry_points={
        'console_scripts': [
            'glassceiling=glassceiling.cli:main',
        ],
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.10',
)
