import sys

from misspec_bounds.cli import main

sys.exit(main())
