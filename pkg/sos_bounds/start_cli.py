import sys

from sos_bounds.experiments.cli import main

if __name__ == "__main__":
    sys.exit(main())
