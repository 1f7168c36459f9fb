#!/usr/bin/env python3

import sys
import os


def _fixSysPath():
    sourceDir = os.path.dirname(os.path.abspath(__file__))
    sys.path.insert(0, sourceDir)  # do not import installed modules


if __name__ == '__main__':
    _fixSysPath()

    from clockwork.cli import main  # after correct sys.path has been set
    sys.exit(main())
