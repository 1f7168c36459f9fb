#!/usr/bin/env python3

import sys

from setuptools import setup

sys.path.insert(0, 'clockwork')
import version


packages = ['clockwork', 'clockwork/data', 'clockwork/schedules', 'clockwork/stagenet']

install_requires = ['numpy>=1.17']

with open("pip-description.md", "r") as fh:
    long_description = fh.read()


setup(name='clockwork',
    version='%s.%s.%s' % version.VERSION,
    description='Staged network execution over video frames under clock schedules',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=packages,
    python_requires = '>=3.6',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Image Recognition',
    ],
    install_requires = install_requires,
    entry_points={'console_scripts': ['cwk = clockwork.cli:main']},
)
