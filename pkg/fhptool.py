#!/usr/bin/env python
"""Convenience entry point for fhptool.

This can be used instead of the recommended method of `./setup.py install`
or `./setup.py develop` and then using the generated `fhptool` executable.
"""

import sys

from fhptool import main

if __name__ == "__main__":
    sys.exit(main.main(sys.argv[1:]))
