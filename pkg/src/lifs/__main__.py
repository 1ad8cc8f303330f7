import sys

from lifs.cli import main

sys.exit(main())
