"""Entry point for ``python -m curvepair``."""

import sys

from curvepair.cli import main


if __name__ == '__main__':
    sys.exit(main())
