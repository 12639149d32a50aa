import sys

from src.apps.cli import main

if __name__ == "__main__":
    sys.exit(main())
