import sys

from holepy.cli._main import main

if __name__ == "__main__":
    sys.exit(main())
