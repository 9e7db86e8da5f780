import sys

from sphmelt.cli import main

sys.exit(main())
