import sys

from sfwlines.cli import main

sys.exit(main())
