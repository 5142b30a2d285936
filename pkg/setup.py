#!/usr/bin/env python
import os
import sys

from setuptools import setup

SETUP_DIR = os.path.dirname(__file__)
README = os.path.join(SETUP_DIR, 'README.rst')

needs_pytest = {'pytest', 'test', 'ptr'}.intersection(sys.argv)
pytest_runner = ['pytest-runner'] if needs_pytest else []

setup(name='fhptool',
      version='1.0',
      description='Functional Hodrick-Prescott filtering on Hilbert spaces',
      long_description=open(README).read(),
      author='fhptool developers',
      license='Apache 2.0',
      packages=["fhptool", 'fhptool.tests'],
      package_dir={'fhptool.tests': 'tests'},
      include_package_data=True,
      python_requires='>=3.8',
      install_requires=[
          'setuptools',
          'numpy >= 1.20',
          'scipy >= 1.6',
          'ruamel.yaml >= 0.16',
          'schema-salad >= 8',
          'joblib >= 1.0',
      ],
      setup_requires=[] + pytest_runner,
      test_suite='tests',
      tests_require=['pytest'],
      entry_points={
          'console_scripts': ["fhptool=fhptool.main:main"]
      },
      zip_safe=True,
      classifiers=[
          'Development Status :: 4 - Beta',
          'Operating System :: OS Independent',
          'Programming Language :: Python :: 3',
          'Topic :: Scientific/Engineering :: Mathematics',
      ]
      )
