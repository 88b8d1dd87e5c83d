import sys

from fersml.cli import main

sys.exit(main())
